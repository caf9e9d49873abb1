use thiserror::Error;

use crate::topology::Coord;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("grid side must be even, got {0}")]
    OddGrid(usize),

    #[error("grid side must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("coordinate {coord} lies outside the {n}x{n} grid")]
    OutOfGrid { coord: Coord, n: usize },

    #[error("estimation needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("invariant breach at tick {tick}: {detail}")]
    InvariantBreach { tick: u32, detail: String },

    #[error("routing violation at tick {tick}: {detail}")]
    RoutingViolation { tick: u32, detail: String },

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
