//! Noise-prediction training: Adam (or SGD with momentum), cosine
//! learning-rate decay and global-norm gradient clipping.

use super::data::{DemoDataset, Normalizer};
use super::net::{batch_loss_and_grad, NetConfig, NoiseNet};
use super::schedule::{add_noise, gaussian, make_schedule, ScheduleKind};
use super::PolicyError;
use crate::rng::stream;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    SgdMomentum,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub momentum: f64,
    /// Epoch count at which the cosine schedule reaches zero.
    pub cosine_horizon: usize,
    pub clip_norm: f64,
    /// Noise draws per observation in a batch; draws share one encoding.
    pub noise_draws: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { optimizer: Optimizer::Adam, epochs: 120, batch: 64, lr: 0.001, momentum: 0.9, cosine_horizon: 600, clip_norm: 1.0, noise_draws: 2, seed: 0 }
    }
}

impl TrainConfig {
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let t = (epoch as f64 / self.cosine_horizon.max(1) as f64).min(1.0);
        self.lr * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

pub fn log_csv(log: &[EpochLog]) -> String {
    let mut s = String::from("epoch,loss,lr\n");
    for e in log {
        s.push_str(&format!("{},{},{}\n", e.epoch, e.loss, e.lr));
    }
    s
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub net: NoiseNet,
    pub normalizer: Normalizer,
    pub log: Vec<EpochLog>,
}

/// Trains a fresh network on `dataset`. Deterministic in `config.seed`.
pub fn train(dataset: &DemoDataset, net_config: &NetConfig, config: &TrainConfig) -> Result<TrainOutput, PolicyError> {
    if dataset.is_empty() {
        return Err(PolicyError::EmptyDataset);
    }
    if config.epochs == 0 || config.batch == 0 || config.noise_draws == 0 || net_config.denoise_steps == 0 {
        return Err(PolicyError::InvalidConfig("epochs, batch, noise_draws and denoise_steps must be positive".into()));
    }
    let chunk_len = net_config.chunk_len();
    if dataset.records[0].chunk.len() != chunk_len {
        return Err(PolicyError::InvalidConfig(format!("dataset chunks have {} values but the network expects {chunk_len}", dataset.records[0].chunk.len())));
    }
    let normalizer = dataset.fit_normalizer();
    let targets: Vec<Vec<f64>> = dataset.records.iter().map(|r| normalizer.normalize(&r.chunk)).collect();
    let schedule = make_schedule(net_config.denoise_steps, ScheduleKind::Linear);
    let mut net = NoiseNet::new(net_config.clone(), &mut stream(config.seed, &["policy", "init"]));
    let mut rng = stream(config.seed, &["policy", "train"]);
    let mut velocity = net.zeros_like();
    let mut second = net.zeros_like();
    let mut step = 0i32;
    let mut grads = net.zeros_like();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        order.shuffle(&mut rng);
        let (mut total, mut batches) = (0.0, 0usize);
        for idx in order.chunks(config.batch) {
            let batch: Vec<_> = idx
                .iter()
                .map(|&i| {
                    let draws = (0..config.noise_draws)
                        .map(|_| {
                            let k = rng.random_range(1..=schedule.steps());
                            let eps = gaussian(&mut rng, chunk_len);
                            (k, add_noise(&targets[i], k, &eps, &schedule), eps)
                        })
                        .collect();
                    (&dataset.records[i].observation, draws)
                })
                .collect();
            grads.params_mut().for_each(|g| *g = 0.0);
            total += batch_loss_and_grad(&net, &batch, &mut grads);
            batches += 1;
            let norm = grads.params().map(|g| g * g).sum::<f64>().sqrt();
            let scale = if norm > config.clip_norm { config.clip_norm / norm } else { 1.0 };
            step += 1;
            match config.optimizer {
                Optimizer::SgdMomentum => {
                    for ((p, v), g) in net.params_mut().zip(velocity.params_mut()).zip(grads.params()) {
                        *v = config.momentum * *v + scale * g;
                        *p -= lr * *v;
                    }
                }
                Optimizer::Adam => {
                    let (b1, b2) = (0.9, 0.999);
                    let (c1, c2) = (1.0 - f64::powi(b1, step), 1.0 - f64::powi(b2, step));
                    for (((p, m), v), g) in net.params_mut().zip(velocity.params_mut()).zip(second.params_mut()).zip(grads.params()) {
                        let g = scale * g;
                        *m = b1 * *m + (1.0 - b1) * g;
                        *v = b2 * *v + (1.0 - b2) * g * g;
                        *p -= lr * (*m / c1) / ((*v / c2).sqrt() + 1e-8);
                    }
                }
            }
        }
        log.push(EpochLog { epoch, loss: total / batches as f64, lr });
    }
    Ok(TrainOutput { net, normalizer, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::data::DemoRecord;
    use crate::policy::net::{Observation, POINT_DIM};
    use crate::policy::sample_actions;

    fn toy_net() -> NetConfig {
        NetConfig {
            horizon: 1,
            action_dim: 1,
            enc_width: 8,
            latent_dim: 8,
            head_width: 32,
            head_layers: 3,
            kemb_dim: 16,
            residual: true,
            image_dim: 0,
            film: false,
            denoise_steps: 1000,
            precondition: true,
            data_var: 1.0,
        }
    }

    fn constant_obs() -> Observation {
        Observation { points: vec![[0.0; POINT_DIM]], image: Vec::new(), proprio: [0.0; 4] }
    }

    fn dataset(values: &[f64]) -> DemoDataset {
        let records = values.iter().map(|&v| DemoRecord { observation: constant_obs(), chunk: vec![v] }).collect();
        DemoDataset { horizon: 1, action_dim: 1, records }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let err = train(&dataset(&[]), &toy_net(), &TrainConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty dataset");
    }

    #[test]
    fn cosine_schedule() {
        let c = TrainConfig::default();
        assert_eq!(c.lr_at(0), c.lr);
        assert!((c.lr_at(300) - c.lr / 2.0).abs() < 1e-15);
        assert!(c.lr_at(600).abs() < 1e-15);
        assert!(c.lr_at(900).abs() < 1e-15);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig { epochs: 3, batch: 8, ..TrainConfig::default() };
        let d = dataset(&[-0.5, 0.5, 0.5, -0.5, 0.5]);
        let a = train(&d, &toy_net(), &cfg).unwrap();
        let b = train(&d, &toy_net(), &cfg).unwrap();
        assert_eq!(a.net, b.net);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn single_record_overfits() {
        let cfg = TrainConfig { epochs: 200, batch: 8, noise_draws: 8, ..TrainConfig::default() };
        let out = train(&dataset(&[0.3]), &toy_net(), &cfg).unwrap();
        let first = out.log[0].loss;
        let best = out.log.iter().map(|l| l.loss).fold(f64::INFINITY, f64::min);
        assert!(best < 0.1 * first, "first {first} best {best}");
    }

    #[test]
    fn toy_bimodal_marginal() {
        let values: Vec<f64> = (0..512).map(|i| if i % 2 == 0 { -0.5 } else { 0.5 }).collect();
        let cfg = TrainConfig { epochs: 200, batch: 64, lr: 0.01, noise_draws: 4, ..TrainConfig::default() };
        let out = train(&dataset(&values), &toy_net(), &cfg).unwrap();
        let schedule = crate::policy::make_schedule(toy_net().denoise_steps, ScheduleKind::Linear);
        let mut rng = stream(9, &["toy-sample"]);
        let obs = constant_obs();
        let mut samples: Vec<f64> = (0..10_000).map(|_| out.normalizer.denormalize(&sample_actions(&out.net, &obs, &schedule, 1.0, &mut rng))[0]).collect();
        samples.sort_by(f64::total_cmp);
        // W1 against the two-atom target via sorted quantiles.
        let n = samples.len();
        let w1 = samples.iter().enumerate().map(|(i, s)| (s - if i < n / 2 { -0.5 } else { 0.5 }).abs()).sum::<f64>() / n as f64;
        let low = samples.iter().filter(|&&s| s < 0.0).count() as f64 / n as f64;
        assert!(w1 <= 0.1, "w1 {w1}");
        assert!((0.3..0.7).contains(&low), "mass below zero {low}");
    }
}
