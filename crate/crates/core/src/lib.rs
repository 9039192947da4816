//! Tabletop language-to-attention workbench: synthetic scenes and feature
//! clouds, templated instructions, selection programs that ground them into
//! 3D attention maps, and a small attention-conditioned diffusion policy.

pub mod bench;
pub mod cli;
pub mod geom;
pub mod grounding;
pub mod instructions;
pub mod policy;
pub mod rng;
pub mod scene;
