//! Batch experiments: the attention benchmark, the ambiguity matrix and the
//! scaling curve, with bootstrap intervals and plain-text reports.

pub mod attention;
pub mod policy;
pub mod pool;
pub mod stats;
pub mod svg;

pub use attention::{run_attention_benchmark, run_episode, BenchConfig, BenchReport, EpisodeRow, FailureCounts, FailureKind, DEFAULT_CHAMFER_THRESHOLD};
pub use policy::{
    demo_episodes, episode, evaluate_policy, run_ambiguity_matrix, run_scaling_curve, train_on, AmbiguityMatrix, Cell, CellResult, CurvePoint, EpisodeSource,
    MatrixConfig, RolloutRow, ScalingConfig, ScalingCurve, CURVE_CSV_HEADER, MATRIX_CSV_HEADER, MATRIX_PICKS, MATRIX_PLACES, SCALING_COUNTS,
};
pub use pool::{default_workers, par_map};
pub use stats::{bootstrap_ci, bootstrap_diff_ci, rate};

use crate::policy::PolicyError;
use crate::scene::SceneError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

impl BenchError {
    /// Whether the error comes from the request rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(self, BenchError::InvalidConfig(_) | BenchError::Policy(PolicyError::InvalidConfig(_)))
    }
}
