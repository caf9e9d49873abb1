//! System design points: queue depth, parallel outputs and where
//! acknowledgements leave the grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::topology::GatewayId;

/// A controller-network configuration.
///
/// Named presets: `basic`, `parallel`, `acks-NE`, `queue-X`,
/// `acks-NE-queue-X`. Other combinations render as
/// `[acks-NE-][parallel-]queue-X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    /// Receive queue length behind the processing slot.
    pub queue: usize,
    /// Whether a blocked node may fall back to its other output.
    pub parallel: bool,
    /// Gateway that sinks acknowledgements.
    pub acks: GatewayId,
}

impl Variant {
    pub const fn basic() -> Self {
        Self {
            queue: 0,
            parallel: false,
            acks: GatewayId::SW,
        }
    }

    pub const fn parallel() -> Self {
        Self {
            queue: 1,
            parallel: true,
            acks: GatewayId::SW,
        }
    }

    pub const fn acks_ne() -> Self {
        Self {
            queue: 0,
            parallel: false,
            acks: GatewayId::NE,
        }
    }

    pub const fn queue(x: usize) -> Self {
        Self {
            queue: x,
            parallel: false,
            acks: GatewayId::SW,
        }
    }

    pub const fn acks_ne_queue(x: usize) -> Self {
        Self {
            queue: x,
            parallel: false,
            acks: GatewayId::NE,
        }
    }

    /// Packets a node can hold at once: the processing slot plus the queue.
    pub const fn capacity(&self) -> usize {
        1 + self.queue
    }

    pub const fn has_ne_gateway(&self) -> bool {
        matches!(self.acks, GatewayId::NE)
    }
}

impl Default for Variant {
    fn default() -> Self {
        Self::basic()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.acks == GatewayId::NE {
            parts.push("acks-NE".into());
        }
        if self.parallel {
            if self.queue == 1 {
                parts.push("parallel".into());
            } else {
                parts.push(format!("parallel-queue-{}", self.queue));
            }
        } else if self.queue > 0 {
            parts.push(format!("queue-{}", self.queue));
        }
        if parts.is_empty() {
            f.write_str("basic")
        } else {
            f.write_str(&parts.join("-"))
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("unknown variant '{s}'"));
        if s == "basic" {
            return Ok(Self::basic());
        }
        let mut rest = s;
        let mut v = Self::basic();
        if let Some(r) = rest.strip_prefix("acks-NE") {
            v.acks = GatewayId::NE;
            if r.is_empty() {
                return Ok(v);
            }
            rest = r.strip_prefix('-').ok_or_else(bad)?;
            if rest.is_empty() {
                return Err(bad());
            }
        }
        if let Some(r) = rest.strip_prefix("parallel") {
            v.parallel = true;
            v.queue = 1;
            if r.is_empty() {
                return Ok(v);
            }
            rest = r.strip_prefix('-').ok_or_else(bad)?;
        }
        let digits = rest.strip_prefix("queue-").ok_or_else(bad)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        v.queue = digits.parse().map_err(|_| bad())?;
        Ok(v)
    }
}
