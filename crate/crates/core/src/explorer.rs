//! Exhaustive breadth-first search over every contention outcome.
//!
//! The engine itself generates successors: a state is decoded into a
//! [`World`], stepped with a resolver that walks the choice tree like an
//! odometer, and every resulting world is re-encoded. States exclude packet
//! ids and the tick counter, so two worlds that differ only in those are the
//! same state.

use indexmap::IndexSet;

use crate::engine::{Resolver, RunOptions, RunResult, ScriptedResolver, SimConfig, World};
use crate::error::{Error, Result};
use crate::gateway::generate_sequence;
use crate::node::{Packet, PacketKind};
use crate::routing::ack_route;
use crate::topology::{Coord, GatewayId, Grid};

/// Largest grid whose states fit the one-byte packet encoding.
pub const MAX_EXPLORE_N: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: u32,
    /// Send only the first `k` packets of the ordering; `None` sends all.
    pub sequence_prefix: Option<usize>,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_states: 50_000_000,
            max_depth: 100_000,
            sequence_prefix: None,
        }
    }
}

/// Node contents, gateway progress and acknowledgement count, packed.
///
/// Per node, `1 + queue` bytes: 0 is empty, `1 + index(dest)` a
/// configuration packet, `1 + n*n` an acknowledgement. Then the pending
/// count, the injected count and the ack count as little-endian `u16`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalState(Box<[u8]>);

impl CanonicalState {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// A replayable path to a deadlock: one choice list per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub choices: Vec<Vec<usize>>,
    pub sequence: Vec<Coord>,
    /// Tick of the first zero-action tick.
    pub deadlock_tick: u32,
    /// State after each tick, starting with the initial state; the last one
    /// is deadlocked.
    pub path: Vec<CanonicalState>,
}

impl Counterexample {
    pub fn flat_choices(&self) -> Vec<usize> {
        self.choices.iter().flatten().copied().collect()
    }

    /// Replays the choices through the simulator from the initial state and
    /// returns the run together with the final (deadlocked) world.
    pub fn replay<'g>(
        &self,
        grid: &'g Grid,
        cfg: SimConfig,
        opts: RunOptions,
    ) -> Result<(RunResult, World<'g>)> {
        let mut cfg = cfg;
        cfg.horizon = cfg.horizon.max(self.deadlock_tick + 1);
        let mut world = World::with_sequence(grid, cfg, self.sequence.clone());
        let mut resolver = ScriptedResolver::new(self.flat_choices());
        let result = world.run(&mut resolver, 0, opts)?;
        Ok((result, world))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    DeadlockFree {
        states: usize,
        depth: u32,
    },
    DeadlockReachable {
        trace: Counterexample,
        states: usize,
    },
    BoundExceeded {
        states: usize,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::DeadlockFree { .. } => "DeadlockFree",
            Verdict::DeadlockReachable { .. } => "DeadlockReachable",
            Verdict::BoundExceeded { .. } => "BoundExceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expansion {
    Complete,
    Deadlock,
    Successors(Vec<(Vec<usize>, CanonicalState)>),
}

/// Walks the contention choice tree one leaf per step.
struct Odometer {
    prefix: Vec<usize>,
    pos: usize,
    record: Vec<(usize, usize)>,
}

impl Odometer {
    fn start(prefix: Vec<usize>) -> Self {
        Self {
            prefix,
            pos: 0,
            record: Vec::new(),
        }
    }

    /// Prefix for the next leaf, or `None` once the tree is exhausted.
    fn next_prefix(&self) -> Option<Vec<usize>> {
        let i = self.record.iter().rposition(|&(c, opts)| c + 1 < opts)?;
        let mut p: Vec<usize> = self.record[..i].iter().map(|&(c, _)| c).collect();
        p.push(self.record[i].0 + 1);
        Some(p)
    }

    fn choices(&self) -> Vec<usize> {
        self.record.iter().map(|&(c, _)| c).collect()
    }
}

impl Resolver for Odometer {
    fn choose(&mut self, options: usize) -> usize {
        let c = self.prefix.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        self.record.push((c, options));
        c
    }
}

pub struct Explorer<'g> {
    grid: &'g Grid,
    cfg: SimConfig,
    sequence: Vec<Coord>,
}

impl<'g> Explorer<'g> {
    pub fn new(grid: &'g Grid, cfg: SimConfig, prefix: Option<usize>) -> Result<Self> {
        if grid.n() > MAX_EXPLORE_N {
            return Err(Error::Unsupported(format!(
                "exhaustive search supports n <= {MAX_EXPLORE_N}, got {}",
                grid.n()
            )));
        }
        if grid.variant().capacity() > u8::MAX as usize || grid.n() * grid.n() > u16::MAX as usize {
            return Err(Error::Unsupported("state encoding overflow".into()));
        }
        let mut sequence = generate_sequence(grid.n(), cfg.ordering)?;
        if let Some(k) = prefix {
            sequence.truncate(k);
        }
        Ok(Self {
            grid,
            cfg,
            sequence,
        })
    }

    pub fn sequence(&self) -> &[Coord] {
        &self.sequence
    }

    pub fn initial(&self) -> World<'g> {
        World::with_sequence(self.grid, self.cfg, self.sequence.clone())
    }

    pub fn encode(&self, world: &World<'_>) -> CanonicalState {
        let n2 = self.grid.n() * self.grid.n();
        let slots = self.grid.variant().capacity();
        let mut bytes = Vec::with_capacity(n2 * slots + 4);
        for node in world.nodes() {
            let mut held = 0;
            for p in node.packets() {
                bytes.push(match p.kind {
                    PacketKind::Config => 1 + self.grid.index(p.dest) as u8,
                    PacketKind::Ack => 1 + n2 as u8,
                });
                held += 1;
            }
            bytes.extend(std::iter::repeat_n(0, slots - held));
        }
        bytes.extend_from_slice(&(world.sw.pending.len() as u16).to_le_bytes());
        bytes.extend_from_slice(&(world.injected() as u16).to_le_bytes());
        bytes.extend_from_slice(&(world.acks() as u16).to_le_bytes());
        CanonicalState(bytes.into_boxed_slice())
    }

    pub fn decode(&self, state: &CanonicalState) -> World<'g> {
        let n2 = self.grid.n() * self.grid.n();
        let slots = self.grid.variant().capacity();
        let b = &state.0;
        let word = |k: usize| {
            u16::from_le_bytes([b[n2 * slots + 2 * k], b[n2 * slots + 2 * k + 1]]) as usize
        };
        let (pending, injected, acks) = (word(0), word(1), word(2));
        let route = ack_route(self.grid.variant().acks, self.grid.n());

        let mut world = self.initial();
        let mut next_id = 0u64;
        let mut configs = 0;
        for (i, node) in world.nodes.iter_mut().enumerate() {
            for &code in &b[i * slots..(i + 1) * slots] {
                if code == 0 {
                    break;
                }
                let p = if code as usize == 1 + n2 {
                    Packet::ack(next_id, route, 0)
                } else {
                    configs += 1;
                    Packet::config(next_id, self.grid.coord(code as usize - 1), 0)
                };
                next_id += 1;
                if node.slot.is_none() {
                    node.slot = Some(p);
                } else {
                    node.queue.push_back(p);
                }
            }
        }
        while world.sw.pending.len() > pending {
            world.sw.pending.pop_front();
        }
        world.sw.injected = injected;
        world.total = injected + pending;
        let sink = match self.grid.variant().acks {
            GatewayId::SW => &mut world.sw,
            GatewayId::NE => world.ne.as_mut().expect("NE gateway present"),
        };
        sink.acks_received = acks;
        world.delivered = injected - configs;
        world.next_id = next_id;
        world
    }

    /// Every outcome of one tick from `state`.
    pub fn expand(&self, state: &CanonicalState) -> Result<Expansion> {
        let start = self.decode(state);
        if start.is_complete() {
            return Ok(Expansion::Complete);
        }
        let mut out: Vec<(Vec<usize>, CanonicalState)> = Vec::new();
        let mut prefix = Vec::new();
        let mut events = Vec::new();
        loop {
            let mut world = start.clone();
            let mut odo = Odometer::start(prefix);
            events.clear();
            let report = world.step(&mut odo, &mut events)?;
            if report.actions == 0 {
                // no admissible move exists, whatever the choices
                return Ok(Expansion::Deadlock);
            }
            let next = self.encode(&world);
            if !out.iter().any(|(_, s)| *s == next) {
                out.push((odo.choices(), next));
            }
            match odo.next_prefix() {
                Some(p) => prefix = p,
                None => break,
            }
        }
        Ok(Expansion::Successors(out))
    }

    pub fn explore(&self, bounds: Bounds) -> Result<Verdict> {
        let root = self.encode(&self.initial());
        let mut seen: IndexSet<CanonicalState> = IndexSet::new();
        let mut parent: Vec<u32> = Vec::new();
        let mut depth_of: Vec<u32> = Vec::new();
        seen.insert(root);
        parent.push(u32::MAX);
        depth_of.push(0);

        let mut truncated = false;
        let mut max_depth = 0;
        let mut i = 0;
        while i < seen.len() {
            let depth = depth_of[i];
            max_depth = max_depth.max(depth);
            match self.expand(&seen[i])? {
                Expansion::Complete => {}
                Expansion::Deadlock => {
                    let trace = self.counterexample(&seen, &parent, i)?;
                    return Ok(Verdict::DeadlockReachable {
                        trace,
                        states: seen.len(),
                    });
                }
                Expansion::Successors(_) if depth >= bounds.max_depth => truncated = true,
                Expansion::Successors(succ) => {
                    for (_, s) in succ {
                        if seen.len() >= bounds.max_states && !seen.contains(&s) {
                            truncated = true;
                            continue;
                        }
                        if seen.insert(s) {
                            parent.push(i as u32);
                            depth_of.push(depth + 1);
                        }
                    }
                }
            }
            i += 1;
        }
        if truncated {
            Ok(Verdict::BoundExceeded { states: seen.len() })
        } else {
            Ok(Verdict::DeadlockFree {
                states: seen.len(),
                depth: max_depth,
            })
        }
    }

    fn counterexample(
        &self,
        seen: &IndexSet<CanonicalState>,
        parent: &[u32],
        end: usize,
    ) -> Result<Counterexample> {
        let mut path = vec![end];
        while parent[*path.last().unwrap()] != u32::MAX {
            path.push(parent[*path.last().unwrap()] as usize);
        }
        path.reverse();
        let mut choices = Vec::with_capacity(path.len());
        for w in path.windows(2) {
            let Expansion::Successors(succ) = self.expand(&seen[w[0]])? else {
                unreachable!("states on a path have successors");
            };
            let target = &seen[w[1]];
            let (c, _) = succ
                .into_iter()
                .find(|(_, s)| s == target)
                .expect("child among successors");
            choices.push(c);
        }
        Ok(Counterexample {
            choices,
            sequence: self.sequence.clone(),
            deadlock_tick: path.len() as u32,
            path: path.iter().map(|&i| seen[i].clone()).collect(),
        })
    }
}

/// Distinct successor states of `state`; empty for deadlocked or completed
/// states.
pub fn successors(explorer: &Explorer<'_>, state: &CanonicalState) -> Result<Vec<CanonicalState>> {
    Ok(match explorer.expand(state)? {
        Expansion::Successors(s) => s.into_iter().map(|(_, st)| st).collect(),
        Expansion::Complete | Expansion::Deadlock => Vec::new(),
    })
}

pub fn explore(cfg: SimConfig, bounds: Bounds) -> Result<Verdict> {
    let grid = cfg.grid()?;
    Explorer::new(&grid, cfg, bounds.sequence_prefix)?.explore(bounds)
}
