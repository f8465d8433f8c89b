//! Cramér-Rao bounds and optimal Gaussian measurements for single-mode
//! Gaussian phase estimation.

pub mod error;
pub mod estimator;
pub mod figures;
pub mod fisher;
pub mod fock;
pub mod measurement;
pub mod optim;
pub mod quadrature;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use estimator::{EstimationReport, ExperimentConfig};
pub use fisher::{BoundReport, OptimalType};
pub use fock::{CutoffPolicy, FockOperator};
pub use measurement::{MeasurementKind, MeasurementSpec, OutcomeDistribution};
pub use state::{ChannelParams, GaussianMoments, StateParams};
