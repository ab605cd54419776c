//! Piecewise-polynomial functions on the line and their exact calculus.

mod interval;
pub mod io;
mod piecewise;
pub mod poisson;
pub mod vr;

pub use interval::{dist_to_complement, DyadicBlock, Interval};
pub use piecewise::{Outside, Piece, PiecewiseFn, CONTINUITY_RTOL};
pub(crate) use piecewise::merge_pieces;
pub use poisson::{atan_diff, poisson_integral, poisson_series, PoissonValue, SeriesSum, DEFAULT_DIVERGENCE_CAP, DEFAULT_TAIL_TOL};
pub use vr::{vr_block_norms, VrBlock, VrReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("pieces #{first} [{}, {}) and #{second} [{}, {}) overlap", first_interval[0], first_interval[1], second_interval[0], second_interval[1])]
    Overlap { first: usize, first_interval: [f64; 2], second: usize, second_interval: [f64; 2] },
    #[error("invalid piece: {0}")]
    InvalidPiece(String),
    #[error("function is not absolutely continuous: jump of {jump:e} at x = {at}")]
    NotAbsolutelyContinuous { at: f64, jump: f64 },
    #[error("plain double accumulation overflowed; use the log-domain variant")]
    Overflow,
    #[error("series diverges: terms non-decreasing over the last three blocks before cap {cap}")]
    Divergent { cap: i64 },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}
