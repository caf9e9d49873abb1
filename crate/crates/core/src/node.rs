//! One intra-tile controller: a processing slot, an optional FIFO receive
//! queue, and the choice of what to do with the packet it is processing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::routing::{map_to_output, route_decision, AckRoute, ExitSide};
use crate::topology::{orientation_unchecked, Axis, Coord, Endpoint, Grid, Place};
use crate::variant::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PacketKind {
    Config,
    Ack,
}

/// A configuration or acknowledgement packet.
///
/// An acknowledgement keeps the id of the configuration packet it answers,
/// so ids are unique per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Packet {
    pub id: u64,
    pub kind: PacketKind,
    pub dest: Coord,
    pub ack_exit: Option<ExitSide>,
    pub created_tick: u32,
}

impl Packet {
    pub fn config(id: u64, dest: Coord, tick: u32) -> Self {
        Self {
            id,
            kind: PacketKind::Config,
            dest,
            ack_exit: None,
            created_tick: tick,
        }
    }

    pub fn ack(id: u64, route: AckRoute, tick: u32) -> Self {
        Self {
            id,
            kind: PacketKind::Ack,
            dest: route.dest,
            ack_exit: Some(route.exit),
            created_tick: tick,
        }
    }

    /// Output this packet takes when processed at `at`, or `None` when it is
    /// a configuration packet that has arrived. Acknowledgements at their
    /// exit node leave on the horizontal output, which feeds the gateway.
    pub fn output_at(&self, at: Coord) -> Option<Axis> {
        if self.dest == at {
            return match self.kind {
                PacketKind::Config => None,
                PacketKind::Ack => Some(Axis::Horizontal),
            };
        }
        map_to_output(orientation_unchecked(at), route_decision(at, self.dest))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Priority {
    Primary,
    Secondary,
}

/// A request to move one packet across one link this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Intent {
    pub sender: Place,
    pub packet_id: u64,
    pub target: Endpoint,
    pub priority: Priority,
}

/// What a node wants to do at the start of a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeIntent {
    Idle,
    /// Consume the configuration packet in the slot and emit its ack.
    Deliver,
    Send {
        primary: Intent,
        secondary: Option<Intent>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NodeFault {
    #[error("node {coord} received beyond its capacity of {capacity}")]
    OverCapacity { coord: Coord, capacity: usize },
    #[error("node {coord} does not hold packet {id}")]
    UnknownPacket { coord: Coord, id: u64 },
    #[error("node {coord} asked to deliver a packet not addressed to it")]
    NotDestination { coord: Coord },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub coord: Coord,
    pub slot: Option<Packet>,
    pub queue: VecDeque<Packet>,
}

impl NodeState {
    pub fn new(coord: Coord) -> Self {
        Self {
            coord,
            slot: None,
            queue: VecDeque::new(),
        }
    }

    pub fn held(&self) -> usize {
        usize::from(self.slot.is_some()) + self.queue.len()
    }

    pub fn is_idle(&self) -> bool {
        self.slot.is_none()
    }

    pub fn capacity_free(&self, v: &Variant) -> usize {
        v.capacity().saturating_sub(self.held())
    }

    /// Held packets in departure order: slot first, then the queue.
    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.slot.iter().chain(self.queue.iter())
    }

    pub fn select_intents(&self, v: &Variant, grid: &Grid) -> NodeIntent {
        let Some(head) = self.slot else {
            return NodeIntent::Idle;
        };
        let Some(out) = head.output_at(self.coord) else {
            return NodeIntent::Deliver;
        };
        let intent = |p: &Packet, axis, priority| Intent {
            sender: Place::Node(self.coord),
            packet_id: p.id,
            target: grid.links().target(self.coord, axis),
            priority,
        };
        let primary = intent(&head, out, Priority::Primary);
        let secondary = if v.parallel {
            let other = out.other();
            self.queue
                .iter()
                .find(|p| p.output_at(self.coord) == Some(other))
                .map(|p| intent(p, other, Priority::Secondary))
        } else {
            None
        };
        NodeIntent::Send { primary, secondary }
    }

    pub fn commit_receive(&mut self, p: Packet, v: &Variant) -> Result<(), NodeFault> {
        if self.held() >= v.capacity() {
            return Err(NodeFault::OverCapacity {
                coord: self.coord,
                capacity: v.capacity(),
            });
        }
        if self.slot.is_none() {
            self.slot = Some(p);
        } else {
            self.queue.push_back(p);
        }
        Ok(())
    }

    pub fn commit_send(&mut self, id: u64) -> Result<Packet, NodeFault> {
        if self.slot.is_some_and(|p| p.id == id) {
            let p = self.slot.take();
            self.slot = self.queue.pop_front();
            return Ok(p.unwrap());
        }
        let pos = self
            .queue
            .iter()
            .position(|p| p.id == id)
            .ok_or(NodeFault::UnknownPacket {
                coord: self.coord,
                id,
            })?;
        Ok(self.queue.remove(pos).unwrap())
    }

    /// Consumes the configuration packet in the slot and puts its
    /// acknowledgement in its place. Returns `(consumed, ack)`.
    pub fn commit_deliver(
        &mut self,
        tick: u32,
        route: AckRoute,
    ) -> Result<(Packet, Packet), NodeFault> {
        match self.slot {
            Some(p) if p.kind == PacketKind::Config && p.dest == self.coord => {
                let ack = Packet::ack(p.id, route, tick);
                self.slot = Some(ack);
                Ok((p, ack))
            }
            _ => Err(NodeFault::NotDestination { coord: self.coord }),
        }
    }
}
