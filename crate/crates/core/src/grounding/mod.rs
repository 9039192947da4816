//! Grounding of instructions into 3D attention.
//!
//! Instances are found by thresholding feature similarity to a category
//! reference and clustering the survivors. A compiled selection program then
//! picks one pick instance and one place instance, by spatial relation over
//! centroids or by asking an attribute oracle, and the attention map marks
//! their points.

mod attention;
mod detect;
mod program;
mod select;

pub use attention::{build_attention, camera_rig, project_attention_2d, read_attention, write_attention, AttentionMap, ATT_MAGIC, DEFAULT_DILATION};
pub use detect::{detect, similarity, AttributeOracle, InstanceRecord, DEFAULT_SIM_THRESHOLD, MIN_CLUSTER_POINTS};
pub use program::{compile_program, run_program, sel_name, sel_pos, Expr, FailureStage, GroundingConfig, GroundingError, ProgramError, SelectionProgram};
pub use select::{select_index, Relation};
