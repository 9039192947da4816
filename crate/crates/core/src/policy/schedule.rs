//! Forward noising and the reverse (denoising) chain.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
}

pub const BETA_START: f64 = 1e-4;
pub const BETA_END: f64 = 0.02;

/// Step `k` (1-based) uses `betas[k - 1]`; `alpha_bars[k]` is the product of
/// the first `k` alphas with `alpha_bars[0] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub kind: ScheduleKind,
    pub betas: Vec<f64>,
    pub alpha_bars: Vec<f64>,
}

pub fn make_schedule(k: usize, kind: ScheduleKind) -> NoiseSchedule {
    assert!(k >= 1, "a schedule needs at least one step");
    let betas: Vec<f64> = match kind {
        ScheduleKind::Linear if k == 1 => vec![BETA_START],
        ScheduleKind::Linear => (0..k).map(|i| BETA_START + (BETA_END - BETA_START) * i as f64 / (k - 1) as f64).collect(),
    };
    let mut alpha_bars = Vec::with_capacity(k + 1);
    alpha_bars.push(1.0);
    for b in &betas {
        let last = *alpha_bars.last().expect("non-empty");
        alpha_bars.push(last * (1.0 - b));
    }
    NoiseSchedule { kind, betas, alpha_bars }
}

/// Coefficients of one reverse step written as
/// `a[k-1] = alpha * (a[k] - gamma * eps_hat + N(0, sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseStep {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k - 1]
    }

    pub fn alpha_bar(&self, k: usize) -> f64 {
        self.alpha_bars[k]
    }

    /// Reverse-step coefficients from the Gaussian posterior
    /// `q(a[k-1] | a[k], a[0])`, whose variance is
    /// `beta_k (1 - abar_{k-1}) / (1 - abar_k)`.
    pub fn reverse_step(&self, k: usize) -> ReverseStep {
        let beta = self.beta(k);
        let alpha_k = 1.0 - beta;
        let abar = self.alpha_bar(k);
        let abar_prev = self.alpha_bar(k - 1);
        let var = beta * (1.0 - abar_prev) / (1.0 - abar);
        ReverseStep { alpha: 1.0 / alpha_k.sqrt(), gamma: beta / (1.0 - abar).sqrt(), sigma: (var * alpha_k).sqrt() }
    }
}

/// `a[k] = sqrt(abar_k) a0 + sqrt(1 - abar_k) eps`.
pub fn add_noise(a0: &[f64], k: usize, eps: &[f64], schedule: &NoiseSchedule) -> Vec<f64> {
    assert_eq!(a0.len(), eps.len());
    let abar = schedule.alpha_bar(k);
    let (s, n) = (abar.sqrt(), (1.0 - abar).sqrt());
    a0.iter().zip(eps).map(|(a, e)| s * a + n * e).collect()
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Runs the reverse chain from `a_k` (usually standard normal) down to step
/// zero. `predict(a, k)` returns the noise estimate. `sigma_scale` scales the
/// injected noise: 1 is ancestral sampling, 0 is deterministic.
pub fn reverse_chain(
    schedule: &NoiseSchedule,
    mut a: Vec<f64>,
    sigma_scale: f64,
    rng: &mut impl Rng,
    mut predict: impl FnMut(&[f64], usize) -> Vec<f64>,
) -> Vec<f64> {
    for k in (1..=schedule.steps()).rev() {
        let eps = predict(&a, k);
        let step = schedule.reverse_step(k);
        let sigma = if k > 1 { step.sigma * sigma_scale } else { 0.0 };
        for (i, x) in a.iter_mut().enumerate() {
            let z: f64 = if sigma > 0.0 { StandardNormal.sample(rng) } else { 0.0 };
            *x = step.alpha * (*x - step.gamma * eps[i] + sigma * z);
        }
    }
    a
}
