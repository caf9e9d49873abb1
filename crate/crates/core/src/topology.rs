//! Manhattan grid with alternating flow directions and periphery
//! wrap-arounds.
//!
//! Row `y` flows east when `y` is even and west otherwise; column `x` flows
//! north when `x` is even and south otherwise. Every controller has one
//! horizontal and one vertical input, and one horizontal and one vertical
//! output. At the boundary, outputs loop back into the neighbouring row or
//! column rather than the far end of the grid:
//!
//! * bottom: `(2k+1, 0)` feeds `(2k, 0)`; top: `(2k, n-1)` feeds `(2k+1, n-1)`
//! * left: `(0, 2k+1)` feeds `(0, 2k)`, except rows 0/1 which attach to the
//!   south-west gateway
//! * right: `(n-1, 2k)` feeds `(n-1, 2k+1)`, except rows `n-2`/`n-1` which
//!   attach to the north-east gateway when the variant has one

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variant::Variant;

/// A controller address: `x` is the column, `y` the row, `(0,0)` is the
/// south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: u16,
    pub y: u16,
}

impl Coord {
    pub const fn new(x: u16, y: u16) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl FromStr for Coord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed coordinate '{s}'"));
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (x, y) = inner.split_once(',').ok_or_else(bad)?;
        Ok(Self {
            x: x.trim().parse().map_err(|_| bad())?,
            y: y.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<(u16, u16)> for Coord {
    fn from((x, y): (u16, u16)) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GatewayId {
    SW,
    NE,
}

impl fmt::Display for GatewayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GatewayId::SW => "SW",
            GatewayId::NE => "NE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HDir {
    East,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VDir {
    North,
    South,
}

/// Flow directions of a controller's two outputs; the four values are the
/// four physical rotations of the single chip design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub h_dir: HDir,
    pub v_dir: VDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Horizontal, Axis::Vertical];

    pub const fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }

    const fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Input,
    Output,
}

/// Something that can own a channel endpoint or appear in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Node(Coord),
    Gateway(GatewayId),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Node(c) => c.fmt(f),
            Place::Gateway(g) => write!(f, "gw:{g}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gw:SW" => Ok(Place::Gateway(GatewayId::SW)),
            "gw:NE" => Ok(Place::Gateway(GatewayId::NE)),
            _ => s.parse().map(Place::Node),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub owner: Place,
    pub axis: Axis,
    pub polarity: Polarity,
}

impl Endpoint {
    const fn node_in(c: Coord, axis: Axis) -> Self {
        Self {
            owner: Place::Node(c),
            axis,
            polarity: Polarity::Input,
        }
    }

    const fn node_out(c: Coord, axis: Axis) -> Self {
        Self {
            owner: Place::Node(c),
            axis,
            polarity: Polarity::Output,
        }
    }

    const fn gateway(g: GatewayId, polarity: Polarity) -> Self {
        Self {
            owner: Place::Gateway(g),
            axis: Axis::Horizontal,
            polarity,
        }
    }
}

/// A gateway's two channel ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GatewayAttachment {
    pub id: GatewayId,
    /// Gateway output; `feeds` is the node input it drives.
    pub source: Endpoint,
    pub feeds: Endpoint,
    /// Gateway input; `fed_by` is the node output that drives it.
    pub sink: Endpoint,
    pub fed_by: Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n: usize,
    pub variant: Variant,
}

impl GridSpec {
    pub fn new(n: usize, variant: Variant) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddGrid(n));
        }
        Ok(Self { n, variant })
    }

    pub const fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, c: Coord) -> bool {
        (c.x as usize) < self.n && (c.y as usize) < self.n
    }

    pub fn check(&self, c: Coord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfGrid {
                coord: c,
                n: self.n,
            })
        }
    }

    pub fn index(&self, c: Coord) -> usize {
        c.y as usize * self.n + c.x as usize
    }

    pub fn coord(&self, idx: usize) -> Coord {
        Coord::new((idx % self.n) as u16, (idx / self.n) as u16)
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.n * self.n).map(|i| self.coord(i))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 10,
            variant: Variant::basic(),
        }
    }
}

pub fn orientation(spec: &GridSpec, c: Coord) -> Result<Orientation> {
    spec.check(c)?;
    Ok(orientation_unchecked(c))
}

pub(crate) const fn orientation_unchecked(c: Coord) -> Orientation {
    Orientation {
        h_dir: if c.y.is_multiple_of(2) {
            HDir::East
        } else {
            HDir::West
        },
        v_dir: if c.x.is_multiple_of(2) {
            VDir::North
        } else {
            VDir::South
        },
    }
}

/// Where every output endpoint leads and where every input endpoint is
/// driven from. Links never change axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkTable {
    spec: GridSpec,
    targets: Vec<[Endpoint; 2]>,
    sources: Vec<[Endpoint; 2]>,
    gateways: Vec<GatewayAttachment>,
}

impl LinkTable {
    /// Input endpoint driven by the given node output.
    pub fn target(&self, c: Coord, axis: Axis) -> Endpoint {
        self.targets[self.spec.index(c)][axis.slot()]
    }

    /// Output endpoint driving the given node input.
    pub fn source(&self, c: Coord, axis: Axis) -> Endpoint {
        self.sources[self.spec.index(c)][axis.slot()]
    }

    pub fn gateways(&self) -> &[GatewayAttachment] {
        &self.gateways
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Every (output, input) pair, node outputs first in index order, then
    /// gateway sources.
    pub fn links(&self) -> impl Iterator<Item = (Endpoint, Endpoint)> + '_ {
        let nodes = self.spec.coords().flat_map(move |c| {
            Axis::BOTH
                .into_iter()
                .map(move |a| (Endpoint::node_out(c, a), self.target(c, a)))
        });
        nodes.chain(self.gateways.iter().map(|g| (g.source, g.feeds)))
    }
}

pub fn build_links(spec: GridSpec) -> LinkTable {
    let n = spec.n;
    let last = (n - 1) as u16;
    let ne = spec.variant.has_ne_gateway();
    let mut targets = Vec::with_capacity(n * n);
    for c in spec.coords() {
        let o = orientation_unchecked(c);
        let (x, y) = (c.x, c.y);
        let h = match o.h_dir {
            HDir::East if x < last => Endpoint::node_in(Coord::new(x + 1, y), Axis::Horizontal),
            HDir::East if ne && y + 2 == n as u16 => {
                Endpoint::gateway(GatewayId::NE, Polarity::Input)
            }
            HDir::East => Endpoint::node_in(Coord::new(x, y + 1), Axis::Horizontal),
            HDir::West if x > 0 => Endpoint::node_in(Coord::new(x - 1, y), Axis::Horizontal),
            HDir::West if y == 1 => Endpoint::gateway(GatewayId::SW, Polarity::Input),
            HDir::West => Endpoint::node_in(Coord::new(x, y - 1), Axis::Horizontal),
        };
        let v = match o.v_dir {
            VDir::North if y < last => Endpoint::node_in(Coord::new(x, y + 1), Axis::Vertical),
            VDir::North => Endpoint::node_in(Coord::new(x + 1, y), Axis::Vertical),
            VDir::South if y > 0 => Endpoint::node_in(Coord::new(x, y - 1), Axis::Vertical),
            VDir::South => Endpoint::node_in(Coord::new(x - 1, y), Axis::Vertical),
        };
        targets.push([h, v]);
    }

    let mut gateways = vec![GatewayAttachment {
        id: GatewayId::SW,
        source: Endpoint::gateway(GatewayId::SW, Polarity::Output),
        feeds: Endpoint::node_in(Coord::new(0, 0), Axis::Horizontal),
        sink: Endpoint::gateway(GatewayId::SW, Polarity::Input),
        fed_by: Endpoint::node_out(Coord::new(0, 1), Axis::Horizontal),
    }];
    if ne {
        gateways.push(GatewayAttachment {
            id: GatewayId::NE,
            source: Endpoint::gateway(GatewayId::NE, Polarity::Output),
            feeds: Endpoint::node_in(Coord::new(last, last), Axis::Horizontal),
            sink: Endpoint::gateway(GatewayId::NE, Polarity::Input),
            fed_by: Endpoint::node_out(Coord::new(last, last - 1), Axis::Horizontal),
        });
    }

    // Invert: each input has exactly one driver.
    let placeholder = Endpoint::gateway(GatewayId::SW, Polarity::Output);
    let mut sources = vec![[placeholder; 2]; n * n];
    let mut seen = vec![[false; 2]; n * n];
    let node_links = spec.coords().flat_map(|c| {
        let t = &targets;
        Axis::BOTH
            .into_iter()
            .map(move |a| (Endpoint::node_out(c, a), t[spec.index(c)][a.slot()]))
    });
    for (out, inp) in node_links.chain(gateways.iter().map(|g| (g.source, g.feeds))) {
        if let Place::Node(c) = inp.owner {
            let i = spec.index(c);
            debug_assert!(
                !seen[i][inp.axis.slot()],
                "input {c} {:?} driven twice",
                inp.axis
            );
            seen[i][inp.axis.slot()] = true;
            sources[i][inp.axis.slot()] = out;
        }
    }
    debug_assert!(seen.iter().all(|s| s[0] && s[1]));

    LinkTable {
        spec,
        targets,
        sources,
        gateways,
    }
}

pub fn gateway_attachments(spec: GridSpec) -> Vec<GatewayAttachment> {
    build_links(spec).gateways
}

/// Immutable topology shared by every run of one configuration.
#[derive(Debug, Clone)]
pub struct Grid {
    links: LinkTable,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            links: build_links(spec),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.links.spec
    }

    pub fn n(&self) -> usize {
        self.links.spec.n
    }

    pub fn variant(&self) -> &Variant {
        &self.links.spec.variant
    }

    pub fn links(&self) -> &LinkTable {
        &self.links
    }

    pub fn index(&self, c: Coord) -> usize {
        self.links.spec.index(c)
    }

    pub fn coord(&self, idx: usize) -> Coord {
        self.links.spec.coord(idx)
    }

    /// Place reached by leaving `c` on `axis`.
    pub fn next_place(&self, c: Coord, axis: Axis) -> Place {
        self.links.target(c, axis).owner
    }
}
