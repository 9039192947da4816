//! Attention-conditioned diffusion policy over action chunks.
//!
//! A noise-prediction network is trained on scripted demonstrations with the
//! DDPM objective and sampled by running the reverse chain. The policy
//! executes chunks receding-horizon in the kinematic world.

pub mod checkpoint;
pub mod data;
pub mod net;
pub mod observe;
pub mod rollout;
pub mod schedule;
pub mod train;

pub use checkpoint::{read_checkpoint, write_checkpoint, NNET_MAGIC};
pub use data::{build_dataset, chunk_at, DemoDataset, DemoRecord, Normalizer};
pub use net::{batch_loss_and_grad, step_embedding, Linear, NetConfig, NoiseNet, Observation};
pub use observe::{observe, proprio, ObservationConfig, Variant, POSITION_SCALE};
pub use rollout::{rollout, DiffusionPolicy, Policy, RolloutConfig, RolloutFailure, RolloutResult, ScriptedPolicy, ZeroPolicy};
pub use schedule::{add_noise, make_schedule, reverse_chain, NoiseSchedule, ReverseStep, ScheduleKind};
pub use train::{log_csv, train, EpochLog, TrainConfig, TrainOutput};

use crate::scene::{Demo, SceneError, World};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid policy config: {0}")]
    InvalidConfig(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub observation: ObservationConfig,
    pub net: NetConfig,
    pub train: TrainConfig,
    pub replan_every: usize,
    /// Frames between recorded observations when building the dataset.
    pub obs_stride: usize,
    /// Scale on the reverse-chain noise during rollouts; 0 runs the
    /// posterior mean only.
    pub sample_sigma: f64,
}

impl PolicyConfig {
    pub fn for_variant(variant: Variant) -> Self {
        let observation = ObservationConfig::for_variant(variant);
        let net = NetConfig { image_dim: observation.image_dim(), ..NetConfig::default() };
        Self { observation, net, train: TrainConfig::default(), replan_every: 8, obs_stride: 2, sample_sigma: 0.0 }
    }

    pub fn variant(&self) -> Variant {
        self.observation.variant
    }
}

/// A trained network with everything needed to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPolicy {
    pub config: PolicyConfig,
    pub net: NoiseNet,
    pub normalizer: Normalizer,
}

impl TrainedPolicy {
    pub fn schedule(&self) -> NoiseSchedule {
        make_schedule(self.config.net.denoise_steps, ScheduleKind::Linear)
    }
}

/// Builds the dataset from `(world, demo)` pairs and trains on it.
pub fn train_policy(episodes: &[(World, Demo)], config: &PolicyConfig) -> Result<(TrainedPolicy, Vec<EpochLog>), PolicyError> {
    let dataset = build_dataset(episodes, config.net.horizon, config.obs_stride, &config.observation)?;
    let out = train(&dataset, &config.net, &config.train)?;
    Ok((TrainedPolicy { config: config.clone(), net: out.net, normalizer: out.normalizer }, out.log))
}

/// Draws one normalized action chunk: starts from `a_K ~ N(0, I)`, runs the
/// reverse chain and clamps to `[-1, 1]`. `sigma_scale` multiplies the
/// posterior noise (0 gives a deterministic chain for a fixed start).
pub fn sample_actions(net: &NoiseNet, obs: &Observation, schedule: &NoiseSchedule, sigma_scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    let (z, _) = net.encode(obs);
    let start = schedule::gaussian(rng, net.config.chunk_len());
    let a = reverse_chain(schedule, start, sigma_scale, rng, |a, k| net.head(a, &z, k, &obs.proprio).0);
    a.into_iter().map(|v| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 }).collect()
}
