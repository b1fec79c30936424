//! Simulation workbench for selective quantum state and process tomography.
//!
//! Every sampled estimator in this crate has an exact counterpart computed by
//! dense simulation, so shot-noise results can always be checked against the
//! value they estimate.

pub mod channels;
pub mod error;
pub mod estimation;
pub mod pauli;
pub mod qpt;
pub mod quantum;
pub mod seqst;

pub use channels::{ChannelSpec, ChiMatrix, KrausChannel, ValidityReport};
pub use error::{Error, Result};
pub use estimation::{chernoff_plan, RandomStream, ShotPlan};
pub use pauli::{PauliLabel, PhasedPauli};
pub use qpt::{ChiEstimate, Protocol, SizeLimits};
pub use quantum::{DensityMatrix, Operator, PureState, C64};
pub use seqst::{EstimateReport, PreparationBasis};

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
