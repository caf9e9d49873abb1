//! Configuration-sequence generation, injection and acknowledgement sinks.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::node::{Packet, PacketKind};
use crate::topology::{Coord, GatewayId};

/// Order in which the gateway emits one configuration packet per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering {
    /// Rows south to north, each row west to east.
    SWtoNEx,
    /// Columns west to east, each column south to north.
    SWtoNEy,
    /// Rows north to south, each row east to west.
    NEtoSWx,
    /// Columns east to west, each column north to south.
    NEtoSWy,
    /// One packet at a time from `SWtoNEx` and `NEtoSWx` in turn.
    Alternating,
}

impl Ordering {
    pub const ALL: [Ordering; 5] = [
        Ordering::SWtoNEx,
        Ordering::SWtoNEy,
        Ordering::NEtoSWx,
        Ordering::NEtoSWy,
        Ordering::Alternating,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Ordering::SWtoNEx => "sw-ne-x",
            Ordering::SWtoNEy => "sw-ne-y",
            Ordering::NEtoSWx => "ne-sw-x",
            Ordering::NEtoSWy => "ne-sw-y",
            Ordering::Alternating => "alternating",
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ordering::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown ordering '{s}'")))
    }
}

pub fn generate_sequence(n: usize, ordering: Ordering) -> Result<Vec<Coord>> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddGrid(n));
    }
    let m = n as u16;
    let seq = match ordering {
        Ordering::SWtoNEx => (0..m)
            .flat_map(|y| (0..m).map(move |x| Coord::new(x, y)))
            .collect(),
        Ordering::SWtoNEy => (0..m)
            .flat_map(|x| (0..m).map(move |y| Coord::new(x, y)))
            .collect(),
        Ordering::NEtoSWx => (0..m)
            .rev()
            .flat_map(|y| (0..m).rev().map(move |x| Coord::new(x, y)))
            .collect(),
        Ordering::NEtoSWy => (0..m)
            .rev()
            .flat_map(|x| (0..m).rev().map(move |y| Coord::new(x, y)))
            .collect(),
        Ordering::Alternating => {
            let a = generate_sequence(n, Ordering::SWtoNEx)?;
            let b = generate_sequence(n, Ordering::NEtoSWx)?;
            let mut emitted = HashSet::with_capacity(n * n);
            let mut out = Vec::with_capacity(n * n);
            let (mut ia, mut ib) = (0, 0);
            let mut turn_a = true;
            while out.len() < n * n {
                let (stream, cursor) = if turn_a { (&a, &mut ia) } else { (&b, &mut ib) };
                while emitted.contains(&stream[*cursor]) {
                    *cursor += 1;
                }
                emitted.insert(stream[*cursor]);
                out.push(stream[*cursor]);
                turn_a = !turn_a;
            }
            out
        }
    };
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayState {
    pub id: GatewayId,
    pub pending: VecDeque<Coord>,
    pub injected: usize,
    pub acks_received: usize,
    pub last_ack_tick: Option<u32>,
}

impl GatewayState {
    pub fn new(id: GatewayId, sequence: impl IntoIterator<Item = Coord>) -> Self {
        Self {
            id,
            pending: sequence.into_iter().collect(),
            injected: 0,
            acks_received: 0,
            last_ack_tick: None,
        }
    }

    /// A gateway that only sinks acknowledgements.
    pub fn sink_only(id: GatewayId) -> Self {
        Self::new(id, [])
    }

    /// Destinations offered for injection this tick, head first.
    pub fn injection_intents(&self, per_tick: usize) -> impl Iterator<Item = Coord> + '_ {
        self.pending.iter().take(per_tick).copied()
    }

    pub fn injection_intent(&self) -> Option<Coord> {
        self.pending.front().copied()
    }

    /// Pops the pending head after an admitted injection.
    pub fn commit_injection(&mut self) -> Option<Coord> {
        let head = self.pending.pop_front()?;
        self.injected += 1;
        Some(head)
    }

    pub fn sink_ack(&mut self, p: &Packet, tick: u32) -> Result<()> {
        if p.kind != PacketKind::Ack {
            return Err(Error::RoutingViolation {
                tick,
                detail: format!(
                    "configuration packet {} for {} reached gateway {}",
                    p.id, p.dest, self.id
                ),
            });
        }
        if p.ack_exit.map(|e| e.gateway()) != Some(self.id) {
            return Err(Error::RoutingViolation {
                tick,
                detail: format!(
                    "ack {} addressed {:?} reached gateway {}",
                    p.id, p.ack_exit, self.id
                ),
            });
        }
        self.acks_received += 1;
        self.last_ack_tick = Some(tick);
        Ok(())
    }
}
