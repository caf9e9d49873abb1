//! Reference models shared by the integration and acceptance tests. They
//! are written from the grid rules directly and share no code with the
//! library's topology or routing modules.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use hsf_core::engine::{EventKind, TraceEvent};
use hsf_core::node::PacketKind;
use hsf_core::topology::Place;
use hsf_core::Coord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    Node(u16, u16),
    SwSink,
    NeSink,
}

fn east(y: u16) -> bool {
    y.is_multiple_of(2)
}

fn north(x: u16) -> bool {
    x.is_multiple_of(2)
}

/// Where a packet leaving `(x, y)` on its horizontal or vertical output lands.
pub fn next_hop(n: u16, ne: bool, x: u16, y: u16, horizontal: bool) -> Hop {
    if horizontal {
        if east(y) {
            if x + 1 < n {
                Hop::Node(x + 1, y)
            } else if ne && y == n - 2 {
                Hop::NeSink
            } else {
                Hop::Node(x, y + 1)
            }
        } else if x > 0 {
            Hop::Node(x - 1, y)
        } else if y == 1 {
            Hop::SwSink
        } else {
            Hop::Node(x, y - 1)
        }
    } else if north(x) {
        if y + 1 < n {
            Hop::Node(x, y + 1)
        } else {
            Hop::Node(x + 1, y)
        }
    } else if y > 0 {
        Hop::Node(x, y - 1)
    } else {
        Hop::Node(x - 1, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Here,
    Up,
    Down,
    Left,
    Right,
}

fn decide(x: u16, y: u16, a: u16, b: u16) -> Dir {
    use std::cmp::Ordering::*;
    if x == a {
        return match y.cmp(&b) {
            Equal => Dir::Here,
            Less => Dir::Up,
            Greater => Dir::Down,
        };
    }
    if x + 1 < a {
        return Dir::Right;
    }
    if x + 1 == a {
        return if x.is_multiple_of(2) && y < b {
            Dir::Up
        } else {
            Dir::Right
        };
    }
    match y.cmp(&b) {
        Less => Dir::Up,
        Equal | Greater => Dir::Left,
    }
}

/// `Some(true)` for the horizontal output, `Some(false)` for the vertical
/// one, `None` when the packet is home.
pub fn output_axis(x: u16, y: u16, a: u16, b: u16) -> Option<bool> {
    match decide(x, y, a, b) {
        Dir::Here => None,
        Dir::Right => Some(east(y)),
        Dir::Left => Some(!east(y)),
        Dir::Up => Some(!north(x)),
        Dir::Down => Some(north(x)),
    }
}

/// Node-to-node path of a configuration packet from `(0,0)`, then of its
/// acknowledgement to the sink. Both lists include the start node.
pub fn lone_packet_paths(n: u16, ne: bool, dest: (u16, u16)) -> (Vec<Hop>, Vec<Hop>) {
    let walk = |start: (u16, u16), target: (u16, u16), exit_east: Option<bool>| {
        let mut path = vec![Hop::Node(start.0, start.1)];
        let (mut x, mut y) = start;
        for _ in 0..(8 * n as usize * n as usize) {
            let horizontal = match output_axis(x, y, target.0, target.1) {
                Some(h) => h,
                None => match exit_east {
                    None => return path,
                    Some(_) => true,
                },
            };
            let hop = next_hop(n, ne, x, y, horizontal);
            path.push(hop);
            match hop {
                Hop::Node(nx, ny) => (x, y) = (nx, ny),
                _ => return path,
            }
        }
        panic!("no arrival at {target:?} from {start:?}");
    };
    let config = walk((0, 0), dest, None);
    let ack_dest = if ne { (n - 1, n - 2) } else { (0, 1) };
    let ack = walk(dest, ack_dest, Some(ne));
    (config, ack)
}

pub fn hop_of(p: Place) -> Hop {
    match p {
        Place::Node(c) => Hop::Node(c.x, c.y),
        Place::Gateway(hsf_core::GatewayId::SW) => Hop::SwSink,
        Place::Gateway(hsf_core::GatewayId::NE) => Hop::NeSink,
    }
}

/// Checks that packets leave every node in arrival order. A delivered
/// configuration is replaced in place by its acknowledgement. With
/// `overtake`, a queued packet may leave ahead of the head (parallel
/// outputs) but must still be held by the sender.
pub fn check_fifo(events: &[TraceEvent], overtake: bool) -> Result<(), String> {
    let mut held: HashMap<Coord, VecDeque<(PacketKind, u64)>> = HashMap::new();
    let mut ticks: Vec<u32> = events.iter().map(|e| e.tick).collect();
    ticks.dedup();
    for t in ticks {
        let tick: Vec<&TraceEvent> = events.iter().filter(|e| e.tick == t).collect();
        for e in tick.iter().filter(|e| e.kind == EventKind::Deliver) {
            let Some(Place::Node(c)) = e.from else {
                continue;
            };
            let q = held.entry(c).or_default();
            let slot = q
                .iter_mut()
                .find(|p| **p == (PacketKind::Config, e.packet_id));
            *slot.ok_or(format!("tick {t}: {c} delivers a packet it does not hold"))? =
                (PacketKind::Ack, e.packet_id);
        }
        for e in tick.iter().filter(|e| e.kind == EventKind::Move) {
            let Some(Place::Node(c)) = e.from else {
                continue;
            };
            let q = held.entry(c).or_default();
            let sent = (e.packet_kind, e.packet_id);
            match q.iter().position(|p| *p == sent) {
                Some(0) => {
                    q.pop_front();
                }
                Some(k) if overtake => {
                    q.remove(k);
                }
                _ => {
                    return Err(format!(
                        "tick {t}: {c} sent {sent:?} but its head was {:?}",
                        q.front()
                    ));
                }
            }
        }
        for e in tick
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Move | EventKind::Inject))
        {
            if let Some(Place::Node(c)) = e.to {
                held.entry(c)
                    .or_default()
                    .push_back((e.packet_kind, e.packet_id));
            }
        }
    }
    Ok(())
}
