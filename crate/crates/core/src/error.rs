use thiserror::Error;

use crate::geometry::{CellIndex, Point};

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({}, {}) is outside the map bounds", .0.x, .0.y)]
    OutOfBounds(Point),

    #[error("cell ({}, {}) is outside a {rows}x{cols} grid", .index.row, .index.col)]
    InvalidCell {
        index: CellIndex,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected} cells, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("normalized density {value} at cell {index} is outside [0, 1]")]
    DensityOutOfRange { index: usize, value: f64 },

    #[error("no path from cell ({}, {}) to cell ({}, {})", .from.row, .from.col, .to.row, .to.col)]
    NoPath { from: CellIndex, to: CellIndex },

    #[error("cannot place {requested} agents in the spawn region (placed {placed})")]
    InfeasiblePacking { requested: usize, placed: usize },

    #[error("malformed trajectory log: {0}")]
    Trajectory(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
