//! Lock-step tick scheduler.
//!
//! Every tick runs in three phases. Intents are collected from the start of
//! tick state; deliveries commit, then send intents are admitted per
//! receiver against the receiver's start-of-tick free capacity, with
//! contention settled by a [`Resolver`]; finally admitted sends and receives
//! commit together. A slot freed by a send this tick cannot be refilled
//! until the next one.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{generate_sequence, GatewayState, Ordering};
use crate::node::{Intent, NodeFault, NodeIntent, NodeState, Packet, PacketKind, Priority};
use crate::routing::ack_route;
use crate::topology::{Axis, Coord, GatewayId, Grid, GridSpec, Place};
use crate::variant::Variant;

pub const DEFAULT_HORIZON: u32 = 300;

/// How a `parallel` node uses its second output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ParallelMode {
    /// The other output is tried only after the primary send is refused;
    /// at most one send per node per tick.
    #[default]
    Fallback,
    /// Both outputs may fire in the same tick.
    Dual,
}

/// Everything that determines the distribution of runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n: usize,
    pub variant: Variant,
    pub ordering: Ordering,
    pub horizon: u32,
    pub parallel_mode: ParallelMode,
    /// Injection attempts the gateway makes per tick.
    pub inject_per_tick: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 10,
            variant: Variant::basic(),
            ordering: Ordering::SWtoNEx,
            horizon: DEFAULT_HORIZON,
            parallel_mode: ParallelMode::Fallback,
            inject_per_tick: 1,
        }
    }
}

impl SimConfig {
    pub fn new(n: usize, variant: Variant, ordering: Ordering) -> Self {
        Self {
            n,
            variant,
            ordering,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(GridSpec::new(self.n, self.variant)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Inject,
    Move,
    Deliver,
    AckCreate,
    AckSink,
    Stall,
}

impl EventKind {
    /// Whether the event changes the state; `Stall` is the only non-action.
    pub const fn is_action(self) -> bool {
        !matches!(self, EventKind::Stall)
    }
}

/// One line of the event log. Events within a tick are unordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u32,
    pub kind: EventKind,
    pub from: Option<Place>,
    pub to: Option<Place>,
    pub packet_id: u64,
    pub packet_kind: PacketKind,
    pub dest: Coord,
}

/// Settles receiver contention: picks one of `options` equally
/// admissible outcomes.
pub trait Resolver {
    fn choose(&mut self, options: usize) -> usize;
}

/// Uniform choices from a seeded ChaCha stream.
#[derive(Debug, Clone)]
pub struct SeededResolver {
    rng: ChaCha8Rng,
}

impl SeededResolver {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Resolver for SeededResolver {
    fn choose(&mut self, options: usize) -> usize {
        self.rng.random_range(0..options)
    }
}

/// Replays a recorded choice sequence; choices past the end default to 0.
#[derive(Debug, Clone, Default)]
pub struct ScriptedResolver {
    choices: Vec<usize>,
    pos: usize,
}

impl ScriptedResolver {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn exhausted(&self) -> bool {
        self.pos >= self.choices.len()
    }
}

impl Resolver for ScriptedResolver {
    fn choose(&mut self, options: usize) -> usize {
        let c = self.choices.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        c.min(options - 1)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// The `idx`-th `k`-subset of `0..n` in lexicographic order.
pub(crate) fn nth_combination(n: usize, k: usize, mut idx: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    while out.len() < k {
        let remaining = k - out.len() - 1;
        let with_next = binomial(n - next - 1, remaining);
        if idx < with_next {
            out.push(next);
        } else {
            idx -= with_next;
        }
        next += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TickReport {
    pub tick: u32,
    pub actions: usize,
    pub stalls: usize,
}

/// Permanent-deadlock test for a completed tick: nothing moved, nothing was
/// consumed or created, and work is still outstanding.
pub fn detect_deadlock(events: &[TraceEvent], work_remaining: bool) -> bool {
    work_remaining && !events.iter().any(|e| e.kind.is_action())
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub acks: usize,
    /// Completion tick, or the horizon when the run did not complete.
    pub time: u32,
    pub deadlocked: bool,
    pub deadlock_tick: Option<u32>,
    pub seed: u64,
    pub events: Option<Vec<TraceEvent>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub record_trace: bool,
    /// Check every invariant after every tick, and stall soundness after a
    /// deadlock.
    pub check_invariants: bool,
}

/// Full simulation state for one run.
#[derive(Debug, Clone)]
pub struct World<'g> {
    pub(crate) grid: &'g Grid,
    pub(crate) cfg: SimConfig,
    pub(crate) tick: u32,
    pub(crate) nodes: Vec<NodeState>,
    pub(crate) sw: GatewayState,
    pub(crate) ne: Option<GatewayState>,
    pub(crate) next_id: u64,
    pub(crate) delivered: usize,
    pub(crate) total: usize,
}

impl<'g> World<'g> {
    pub fn new(grid: &'g Grid, cfg: SimConfig) -> Result<Self> {
        let seq = generate_sequence(grid.n(), cfg.ordering)?;
        Ok(Self::with_sequence(grid, cfg, seq))
    }

    /// A world whose gateway sends exactly `sequence`.
    pub fn with_sequence(grid: &'g Grid, cfg: SimConfig, sequence: Vec<Coord>) -> Self {
        let nodes = grid.spec().coords().map(NodeState::new).collect();
        let total = sequence.len();
        Self {
            grid,
            cfg,
            tick: 0,
            nodes,
            sw: GatewayState::new(GatewayId::SW, sequence),
            ne: grid
                .variant()
                .has_ne_gateway()
                .then(|| GatewayState::sink_only(GatewayId::NE)),
            next_id: 0,
            delivered: 0,
            total,
        }
    }

    pub fn grid(&self) -> &'g Grid {
        self.grid
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn node(&self, c: Coord) -> &NodeState {
        &self.nodes[self.grid.index(c)]
    }

    /// Places `p` directly into a node, bypassing the gateway, and books it
    /// as already injected (and consumed, for an ack) so the conservation
    /// checks still balance. Used to set up hand-built scenarios.
    pub fn place_packet(&mut self, at: Coord, p: Packet) -> Result<()> {
        let v = *self.grid.variant();
        let i = self.grid.index(at);
        self.nodes[i]
            .commit_receive(p, &v)
            .map_err(|e| self.breach(e))?;
        self.next_id = self.next_id.max(p.id + 1);
        self.sw.injected += 1;
        self.total += 1;
        if p.kind == PacketKind::Ack {
            self.delivered += 1;
        }
        Ok(())
    }

    pub fn gateway(&self, id: GatewayId) -> Option<&GatewayState> {
        match id {
            GatewayId::SW => Some(&self.sw),
            GatewayId::NE => self.ne.as_ref(),
        }
    }

    pub fn acks(&self) -> usize {
        self.sw.acks_received + self.ne.as_ref().map_or(0, |g| g.acks_received)
    }

    pub fn injected(&self) -> usize {
        self.sw.injected
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn held_packets(&self) -> usize {
        self.nodes.iter().map(NodeState::held).sum()
    }

    pub fn has_work(&self) -> bool {
        !self.sw.pending.is_empty() || self.held_packets() > 0
    }

    pub fn is_complete(&self) -> bool {
        !self.has_work()
    }

    fn breach(&self, e: NodeFault) -> Error {
        Error::InvariantBreach {
            tick: self.tick + 1,
            detail: e.to_string(),
        }
    }

    fn receiver_index(&self, target: Place) -> Option<usize> {
        match target {
            Place::Node(c) => Some(self.grid.index(c)),
            Place::Gateway(_) => None,
        }
    }

    /// Admits intents receiver by receiver against `free`, returning the
    /// admission flag for each intent.
    fn admit<R: Resolver>(
        &self,
        intents: &[Intent],
        free: &mut [usize],
        resolver: &mut R,
    ) -> Vec<bool> {
        let mut admitted = vec![false; intents.len()];
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, intent) in intents.iter().enumerate() {
            match self.receiver_index(intent.target.owner) {
                Some(r) => groups.entry(r).or_default().push(i),
                // gateway sinks accept everything
                None => admitted[i] = true,
            }
        }
        for (r, contenders) in groups {
            let cap = free[r];
            let k = contenders.len();
            if k <= cap {
                contenders.iter().for_each(|&i| admitted[i] = true);
                free[r] -= k;
            } else if cap > 0 {
                let pick = resolver.choose(binomial(k, cap));
                for j in nth_combination(k, cap, pick) {
                    admitted[contenders[j]] = true;
                }
                free[r] = 0;
            }
        }
        admitted
    }

    /// Advances one tick, appending this tick's events to `events`.
    pub fn step<R: Resolver>(
        &mut self,
        resolver: &mut R,
        events: &mut Vec<TraceEvent>,
    ) -> Result<TickReport> {
        let tick = self.tick + 1;
        let v = *self.grid.variant();
        let first_event = events.len();

        // Phase 1: intents from start-of-tick state.
        let mut free: Vec<usize> = self.nodes.iter().map(|s| s.capacity_free(&v)).collect();
        let route = ack_route(v.acks, self.grid.n());
        let mut delivers = Vec::new();
        let mut primaries = Vec::new();
        let mut secondaries = Vec::new();
        let gw = self.grid.links().gateways()[0];
        for (k, _) in self
            .sw
            .injection_intents(self.cfg.inject_per_tick)
            .enumerate()
        {
            primaries.push(Intent {
                sender: Place::Gateway(GatewayId::SW),
                packet_id: self.next_id + k as u64,
                target: gw.feeds,
                priority: Priority::Primary,
            });
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node.select_intents(&v, self.grid) {
                NodeIntent::Idle => {}
                NodeIntent::Deliver => delivers.push(i),
                NodeIntent::Send { primary, secondary } => {
                    primaries.push(primary);
                    match (secondary, self.cfg.parallel_mode) {
                        (Some(s), ParallelMode::Dual) => primaries.push(s),
                        (Some(s), ParallelMode::Fallback) => secondaries.push(s),
                        (None, _) => {}
                    }
                }
            }
        }

        // Phase 2: deliveries, then admission.
        for &i in &delivers {
            let (consumed, ack) = self.nodes[i]
                .commit_deliver(tick, route)
                .map_err(|e| self.breach(e))?;
            let at = Some(Place::Node(self.nodes[i].coord));
            events.push(TraceEvent {
                tick,
                kind: EventKind::Deliver,
                from: at,
                to: None,
                packet_id: consumed.id,
                packet_kind: PacketKind::Config,
                dest: consumed.dest,
            });
            events.push(TraceEvent {
                tick,
                kind: EventKind::AckCreate,
                from: at,
                to: None,
                packet_id: ack.id,
                packet_kind: PacketKind::Ack,
                dest: ack.dest,
            });
            self.delivered += 1;
        }

        let primary_ok = self.admit(&primaries, &mut free, resolver);
        let refused: Vec<Place> = primaries
            .iter()
            .zip(&primary_ok)
            .filter(|(_, ok)| !**ok)
            .map(|(p, _)| p.sender)
            .collect();
        let fallback: Vec<Intent> = secondaries
            .into_iter()
            .filter(|s| refused.contains(&s.sender))
            .collect();
        let fallback_ok = self.admit(&fallback, &mut free, resolver);

        let admitted = || {
            primaries
                .iter()
                .zip(&primary_ok)
                .chain(fallback.iter().zip(&fallback_ok))
        };
        let sent_from: Vec<Place> = admitted()
            .filter(|(_, ok)| **ok)
            .map(|(i, _)| i.sender)
            .collect();
        let mut stalls = 0;
        for (intent, _) in primaries.iter().zip(&primary_ok).filter(|(_, ok)| !**ok) {
            if sent_from.contains(&intent.sender) {
                continue;
            }
            let (packet_kind, dest) = match intent.sender {
                Place::Gateway(_) => {
                    let k = (intent.packet_id - self.next_id) as usize;
                    (PacketKind::Config, self.sw.pending[k])
                }
                Place::Node(c) => {
                    let node = &self.nodes[self.grid.index(c)];
                    let p = node.packets().find(|p| p.id == intent.packet_id);
                    p.map_or((PacketKind::Config, c), |p| (p.kind, p.dest))
                }
            };
            stalls += 1;
            events.push(TraceEvent {
                tick,
                kind: EventKind::Stall,
                from: Some(intent.sender),
                to: Some(intent.target.owner),
                packet_id: intent.packet_id,
                packet_kind,
                dest,
            });
        }

        // Phase 3: commit sends, then receives.
        let mut moving: Vec<(Intent, Packet)> = Vec::new();
        for (intent, _) in admitted().filter(|(_, ok)| **ok) {
            let packet = match intent.sender {
                Place::Gateway(_) => {
                    let dest =
                        self.sw
                            .commit_injection()
                            .ok_or_else(|| Error::InvariantBreach {
                                tick,
                                detail: "injection admitted with nothing pending".into(),
                            })?;
                    let p = Packet::config(self.next_id, dest, tick);
                    self.next_id += 1;
                    p
                }
                Place::Node(c) => {
                    let i = self.grid.index(c);
                    self.nodes[i]
                        .commit_send(intent.packet_id)
                        .map_err(|e| self.breach(e))?
                }
            };
            moving.push((*intent, packet));
        }

        for (intent, packet) in &moving {
            let kind = match intent.sender {
                Place::Gateway(_) => EventKind::Inject,
                Place::Node(_) => EventKind::Move,
            };
            events.push(TraceEvent {
                tick,
                kind,
                from: Some(intent.sender),
                to: Some(intent.target.owner),
                packet_id: packet.id,
                packet_kind: packet.kind,
                dest: packet.dest,
            });
            match intent.target.owner {
                Place::Node(c) => {
                    let i = self.grid.index(c);
                    self.nodes[i]
                        .commit_receive(*packet, &v)
                        .map_err(|e| self.breach(e))?;
                }
                Place::Gateway(g) => {
                    let sink = match g {
                        GatewayId::SW => Some(&mut self.sw),
                        GatewayId::NE => self.ne.as_mut(),
                    }
                    .ok_or_else(|| Error::RoutingViolation {
                        tick,
                        detail: format!("packet {} sent to absent gateway {g}", packet.id),
                    })?;
                    sink.sink_ack(packet, tick)?;
                    events.push(TraceEvent {
                        tick,
                        kind: EventKind::AckSink,
                        from: Some(intent.sender),
                        to: Some(Place::Gateway(g)),
                        packet_id: packet.id,
                        packet_kind: packet.kind,
                        dest: packet.dest,
                    });
                }
            }
        }

        self.tick = tick;
        let actions = events[first_event..]
            .iter()
            .filter(|e| e.kind.is_action())
            .count();
        Ok(TickReport {
            tick,
            actions,
            stalls,
        })
    }

    /// Checks conservation, capacity and queue-shape invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let v = self.grid.variant();
        let fail = |detail: String| {
            Err(Error::InvariantBreach {
                tick: self.tick,
                detail,
            })
        };
        let mut configs = 0;
        let mut acks = 0;
        let mut ids = std::collections::HashSet::new();
        for node in &self.nodes {
            if node.held() > v.capacity() {
                return fail(format!(
                    "node {} holds {} > {}",
                    node.coord,
                    node.held(),
                    v.capacity()
                ));
            }
            if node.slot.is_none() && !node.queue.is_empty() {
                return fail(format!(
                    "node {} has a queue behind an empty slot",
                    node.coord
                ));
            }
            for p in node.packets() {
                if !ids.insert((p.kind, p.id)) {
                    return fail(format!("duplicate {:?} packet id {}", p.kind, p.id));
                }
                match p.kind {
                    PacketKind::Config => configs += 1,
                    PacketKind::Ack => acks += 1,
                }
            }
        }
        if self.sw.injected + self.sw.pending.len() != self.total {
            return fail("injected + pending != sequence length".into());
        }
        if configs + self.delivered != self.sw.injected {
            return fail(format!(
                "config conservation: {} in flight + {} consumed != {} injected",
                configs, self.delivered, self.sw.injected
            ));
        }
        if acks + self.acks() != self.delivered {
            return fail(format!(
                "ack conservation: {} in flight + {} sunk != {} created",
                acks,
                self.acks(),
                self.delivered
            ));
        }
        Ok(())
    }

    /// Checks that every move in `events` follows a link of the topology.
    pub fn check_moves(&self, events: &[TraceEvent]) -> Result<()> {
        let links = self.grid.links();
        for e in events {
            let (Some(from), Some(to)) = (e.from, e.to) else {
                continue;
            };
            let ok = match (e.kind, from) {
                (EventKind::Move, Place::Node(c)) => {
                    Axis::BOTH.iter().any(|&a| links.target(c, a).owner == to)
                }
                (EventKind::Inject, Place::Gateway(g)) => links
                    .gateways()
                    .iter()
                    .any(|att| att.id == g && att.feeds.owner == to),
                (EventKind::Move | EventKind::Inject, _) => false,
                _ => true,
            };
            if !ok {
                return Err(Error::InvariantBreach {
                    tick: e.tick,
                    detail: format!("{:?} {from} -> {to} uses no link", e.kind),
                });
            }
        }
        Ok(())
    }

    /// Runs until completion, deadlock or the horizon.
    pub fn run<R: Resolver>(
        &mut self,
        resolver: &mut R,
        seed: u64,
        opts: RunOptions,
    ) -> Result<RunResult> {
        let mut trace = opts.record_trace.then(Vec::new);
        let mut scratch = Vec::new();
        let mut deadlock_tick = None;
        let mut completed_at = None;
        if self.is_complete() {
            completed_at = Some(self.tick);
        }
        while completed_at.is_none() && self.tick < self.cfg.horizon {
            scratch.clear();
            self.step(resolver, &mut scratch)?;
            if opts.check_invariants {
                self.check_invariants()?;
                self.check_moves(&scratch)?;
            }
            if let Some(t) = trace.as_mut() {
                t.extend_from_slice(&scratch);
            }
            if self.is_complete() {
                completed_at = Some(self.tick);
            } else if detect_deadlock(&scratch, self.has_work()) {
                deadlock_tick = Some(self.tick);
                if opts.check_invariants {
                    self.check_stall_soundness(resolver)?;
                }
                break;
            }
        }
        Ok(RunResult {
            acks: self.acks(),
            time: completed_at.unwrap_or(self.cfg.horizon),
            deadlocked: deadlock_tick.is_some(),
            deadlock_tick,
            seed,
            events: trace,
        })
    }

    fn check_stall_soundness<R: Resolver>(&self, resolver: &mut R) -> Result<()> {
        let mut probe = self.clone();
        let mut scratch = Vec::new();
        for _ in 0..10 {
            scratch.clear();
            let report = probe.step(resolver, &mut scratch)?;
            if report.actions > 0 {
                return Err(Error::InvariantBreach {
                    tick: report.tick,
                    detail: "activity after a zero-action tick".into(),
                });
            }
        }
        Ok(())
    }
}

/// One seeded run of `cfg` on `grid`.
pub fn run(grid: &Grid, cfg: SimConfig, seed: u64, opts: RunOptions) -> Result<RunResult> {
    let mut world = World::new(grid, cfg)?;
    world.run(&mut SeededResolver::new(seed), seed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::Packet;

    fn c(x: u16, y: u16) -> Coord {
        Coord::new(x, y)
    }

    fn empty_world(grid: &Grid, cfg: SimConfig) -> World<'_> {
        World::with_sequence(grid, cfg, Vec::new())
    }

    fn basic4() -> (Grid, SimConfig) {
        let cfg = SimConfig::new(4, Variant::basic(), Ordering::SWtoNEx);
        (cfg.grid().unwrap(), cfg)
    }

    fn moved(events: &[TraceEvent], id: u64) -> bool {
        events
            .iter()
            .any(|e| e.kind == EventKind::Move && e.packet_id == id)
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        let all: Vec<_> = (0..binomial(4, 2))
            .map(|i| nth_combination(4, 2, i))
            .collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(nth_combination(3, 1, 2), vec![2]);
    }

    #[test]
    fn two_senders_one_slot_is_fair() {
        // (2,0) and (3,1) both feed (2,1)
        let (grid, cfg) = basic4();
        let trials = 10_000;
        let mut first = 0;
        for seed in 0..trials {
            let mut w = empty_world(&grid, cfg);
            w.place_packet(c(2, 0), Packet::config(1, c(2, 3), 0))
                .unwrap();
            w.place_packet(c(3, 1), Packet::config(2, c(1, 1), 0))
                .unwrap();
            let mut ev = Vec::new();
            let r = w.step(&mut SeededResolver::new(seed), &mut ev).unwrap();
            assert_eq!((r.actions, r.stalls), (1, 1));
            assert!(moved(&ev, 1) ^ moved(&ev, 2));
            first += usize::from(moved(&ev, 1));
        }
        let expected = trials as f64 / 2.0;
        let chi2 = 2.0 * (first as f64 - expected).powi(2) / expected;
        assert!(chi2 < 3.841, "chi-square {chi2} for {first}/{trials}");
    }

    #[test]
    fn uncontended_sends_all_commit() {
        let (grid, cfg) = basic4();
        let mut w = empty_world(&grid, cfg);
        w.place_packet(c(1, 0), Packet::config(1, c(3, 0), 0))
            .unwrap();
        w.place_packet(c(0, 2), Packet::config(2, c(0, 3), 0))
            .unwrap();
        let mut ev = Vec::new();
        let r = w.step(&mut ScriptedResolver::default(), &mut ev).unwrap();
        assert_eq!((r.actions, r.stalls), (2, 0));
        assert!(w.node(c(2, 0)).slot.is_some() && w.node(c(0, 3)).slot.is_some());
        assert!(w.node(c(1, 0)).is_idle() && w.node(c(0, 2)).is_idle());
    }

    #[test]
    fn mutual_wait_commits_nothing() {
        // (0,2) routes a config to (1,3) through (0,3); (0,3) routes an ack through (0,2)
        let (grid, cfg) = basic4();
        let mut w = empty_world(&grid, cfg);
        w.place_packet(c(0, 2), Packet::config(1, c(1, 3), 0))
            .unwrap();
        w.place_packet(c(0, 3), Packet::ack(2, ack_route(GatewayId::SW, 4), 0))
            .unwrap();
        let mut ev = Vec::new();
        let r = w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert_eq!((r.actions, r.stalls), (0, 2));
        assert!(ev.iter().all(|e| e.kind == EventKind::Stall));
        assert!(detect_deadlock(&ev, w.has_work()));
    }

    #[test]
    fn freed_slot_is_not_refilled_in_the_same_tick() {
        // (0,0) -> (1,0) -> (2,0): (1,0) sends, but (0,0) may not follow it in
        let (grid, cfg) = basic4();
        let mut w = empty_world(&grid, cfg);
        w.place_packet(c(0, 0), Packet::config(1, c(3, 0), 0))
            .unwrap();
        w.place_packet(c(1, 0), Packet::config(2, c(3, 0), 0))
            .unwrap();
        let mut ev = Vec::new();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert!(moved(&ev, 2) && !moved(&ev, 1));
        ev.clear();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert!(moved(&ev, 1) && moved(&ev, 2));
    }

    #[test]
    fn deliver_then_ack_takes_two_ticks() {
        let (grid, cfg) = basic4();
        let mut w = empty_world(&grid, cfg);
        w.place_packet(c(3, 3), Packet::config(7, c(3, 3), 0))
            .unwrap();
        let mut ev = Vec::new();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        let kinds: Vec<_> = ev.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Deliver, EventKind::AckCreate]);
        let ack = w.node(c(3, 3)).slot.unwrap();
        assert_eq!((ack.kind, ack.id, ack.dest), (PacketKind::Ack, 7, c(0, 1)));
        ev.clear();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert!(moved(&ev, 7));
        w.check_invariants().unwrap();
    }

    #[test]
    fn gateway_stalls_on_a_full_entry_node() {
        let (grid, cfg) = basic4();
        let mut w = World::new(&grid, cfg).unwrap();
        let mut ev = Vec::new();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert_eq!(ev[0].kind, EventKind::Inject);
        assert_eq!(ev[0].to, Some(Place::Node(c(0, 0))));
        ev.clear();
        // (0,0) delivers its own config this tick, so the gateway waits
        let r = w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert_eq!(r.stalls, 1);
        let stall = ev.iter().find(|e| e.kind == EventKind::Stall).unwrap();
        assert_eq!(
            (stall.from, stall.dest),
            (Some(Place::Gateway(GatewayId::SW)), c(1, 0))
        );
    }

    #[test]
    fn deadlock_test_examples() {
        let ev = |kind| TraceEvent {
            tick: 1,
            kind,
            from: None,
            to: None,
            packet_id: 0,
            packet_kind: PacketKind::Config,
            dest: c(0, 0),
        };
        assert!(detect_deadlock(
            &[ev(EventKind::Stall), ev(EventKind::Stall)],
            true
        ));
        assert!(detect_deadlock(&[], true));
        assert!(!detect_deadlock(&[], false));
        assert!(!detect_deadlock(
            &[ev(EventKind::Move), ev(EventKind::Stall)],
            true
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = SimConfig::new(6, Variant::queue(1), Ordering::Alternating);
        let grid = cfg.grid().unwrap();
        let opts = RunOptions {
            record_trace: true,
            check_invariants: true,
        };
        for seed in [0, 1, 99] {
            assert_eq!(
                run(&grid, cfg, seed, opts).unwrap(),
                run(&grid, cfg, seed, opts).unwrap()
            );
        }
    }

    #[test]
    fn small_queue_grid_completes() {
        let cfg = SimConfig::new(2, Variant::queue(1), Ordering::SWtoNEx);
        let grid = cfg.grid().unwrap();
        for seed in 0..50 {
            let r = run(
                &grid,
                cfg,
                seed,
                RunOptions {
                    record_trace: true,
                    check_invariants: true,
                },
            )
            .unwrap();
            assert_eq!(r.acks, 4);
            assert!(!r.deadlocked && r.time < cfg.horizon);
            let sinks = r
                .events
                .unwrap()
                .iter()
                .filter(|e| e.kind == EventKind::AckSink)
                .count();
            assert_eq!(sinks, 4);
        }
    }

    #[test]
    fn parallel_fallback_uses_the_other_output() {
        // (1,1) holds a vertical-bound packet in the slot and a horizontal-bound one
        // in the queue; its vertical receiver (1,0) is full
        let cfg = SimConfig::new(4, Variant::parallel(), Ordering::SWtoNEx);
        let grid = cfg.grid().unwrap();
        let mut w = empty_world(&grid, cfg);
        w.place_packet(c(1, 0), Packet::config(1, c(3, 3), 0))
            .unwrap();
        w.place_packet(c(1, 0), Packet::config(2, c(3, 3), 0))
            .unwrap();
        w.place_packet(c(2, 0), Packet::config(3, c(3, 3), 0))
            .unwrap();
        w.place_packet(c(2, 0), Packet::config(4, c(3, 3), 0))
            .unwrap();
        w.place_packet(c(1, 1), Packet::config(5, c(1, 0), 0))
            .unwrap();
        w.place_packet(c(1, 1), Packet::config(6, c(0, 1), 0))
            .unwrap();
        let node = w.node(c(1, 1));
        assert_eq!(node.slot.unwrap().output_at(c(1, 1)), Some(Axis::Vertical));
        assert_eq!(node.queue[0].output_at(c(1, 1)), Some(Axis::Horizontal));
        let mut ev = Vec::new();
        w.step(&mut SeededResolver::new(0), &mut ev).unwrap();
        assert!(moved(&ev, 6), "{ev:?}");
        assert!(!moved(&ev, 5));
        assert_eq!(w.node(c(1, 1)).slot.unwrap().id, 5);
        w.check_invariants().unwrap();
    }
}
