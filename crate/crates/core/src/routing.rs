//! XY routing variant and the logical-to-physical output mapping.

use serde::{Deserialize, Serialize};

use crate::topology::{Axis, Coord, GatewayId, HDir, Orientation, VDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalAction {
    Deliver,
    Up,
    Down,
    Left,
    Right,
}

/// Side on which an acknowledgement leaves the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExitSide {
    West,
    East,
}

impl ExitSide {
    pub const fn gateway(self) -> GatewayId {
        match self {
            ExitSide::West => GatewayId::SW,
            ExitSide::East => GatewayId::NE,
        }
    }
}

/// Last on-grid hop of an acknowledgement and the side it exits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AckRoute {
    pub dest: Coord,
    pub exit: ExitSide,
}

/// XY decision at `cur` for a packet addressed to `dest`.
///
/// Column first: move right until one column short of the target, where
/// even columns may climb early, then settle the row.
pub fn route_decision(cur: Coord, dest: Coord) -> LogicalAction {
    let (x, y) = (cur.x, cur.y);
    let (a, b) = (dest.x, dest.y);
    if x == a {
        return match y.cmp(&b) {
            std::cmp::Ordering::Equal => LogicalAction::Deliver,
            std::cmp::Ordering::Less => LogicalAction::Up,
            std::cmp::Ordering::Greater => LogicalAction::Down,
        };
    }
    // x < a - 1 and x == a - 1, written without underflow
    if x + 1 < a {
        LogicalAction::Right
    } else if x + 1 == a {
        if x % 2 == 0 && y < b {
            LogicalAction::Up
        } else {
            LogicalAction::Right
        }
    } else if y < b {
        LogicalAction::Up
    } else {
        LogicalAction::Left
    }
}

/// Physical output for a logical move. A move along the flow of one axis
/// uses that axis; a move against it detours through the other axis.
/// Returns `None` for [`LogicalAction::Deliver`], which uses no output.
pub fn map_to_output(o: Orientation, act: LogicalAction) -> Option<Axis> {
    let axis = match act {
        LogicalAction::Deliver => return None,
        LogicalAction::Right if o.h_dir == HDir::East => Axis::Horizontal,
        LogicalAction::Left if o.h_dir == HDir::West => Axis::Horizontal,
        LogicalAction::Right | LogicalAction::Left => Axis::Vertical,
        LogicalAction::Up if o.v_dir == VDir::North => Axis::Vertical,
        LogicalAction::Down if o.v_dir == VDir::South => Axis::Vertical,
        LogicalAction::Up | LogicalAction::Down => Axis::Horizontal,
    };
    Some(axis)
}

/// Where acknowledgements are addressed for the given gateway placement on
/// an `n`-sided grid.
pub fn ack_route(acks: GatewayId, n: usize) -> AckRoute {
    match acks {
        GatewayId::SW => AckRoute {
            dest: Coord::new(0, 1),
            exit: ExitSide::West,
        },
        GatewayId::NE => {
            let last = (n - 1) as u16;
            AckRoute {
                dest: Coord::new(last, last - 1),
                exit: ExitSide::East,
            }
        }
    }
}
