//! Local and global majorant construction over dyadic interval systems.

pub mod global;
pub mod hadamard;
pub mod hat;
pub mod local;
pub mod system;

pub use global::{global_majorant, linear_growth_check, BlockReport, GlobalOptions, GlobalOutput, GlobalReport, GrowthReport, GrowthRow};
pub use hadamard::hadamard_landau_ratio;
pub use hat::{hat_majorant, HatFunction, HatSum};
pub use local::{local_majorant, LocalOptions, LocalOutput, LocalReport};
pub use system::{attach_tails, essential_maximal, system_report, Cell, IntervalSystem, Kind, Member, SeparationReport};

use thiserror::Error;

use crate::funcmodel::FuncError;
use crate::hilbert::HilbertError;

#[derive(Debug, Error)]
pub enum NazarovError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("integral over the interval vanishes although the function does not")]
    ZeroIntegral,
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}
