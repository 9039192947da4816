//! Demonstration datasets and per-dimension action normalization.

use super::net::Observation;
use super::observe::{observe, ObservationConfig};
use super::PolicyError;
use crate::scene::{step_env, Action, Demo, World};
use serde::{Deserialize, Serialize};

/// Affine map of each action dimension from `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit<'a>(actions: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Self {
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for a in actions {
            for d in 0..dim {
                min[d] = min[d].min(a[d]);
                max[d] = max[d].max(a[d]);
            }
        }
        for d in 0..dim {
            if !min[d].is_finite() {
                (min[d], max[d]) = (-1.0, 1.0);
            }
        }
        Self { min, max }
    }

    fn scale(&self, d: usize) -> (f64, f64) {
        let half = (self.max[d] - self.min[d]) / 2.0;
        // a constant dimension maps to 0
        let half = if half > 1e-12 { half } else { 1.0 };
        ((self.max[d] + self.min[d]) / 2.0, half)
    }

    /// Normalizes a flat chunk whose length is a multiple of the action dimension.
    pub fn normalize(&self, chunk: &[f64]) -> Vec<f64> {
        let dim = self.min.len();
        chunk
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (c, h) = self.scale(i % dim);
                (v - c) / h
            })
            .collect()
    }

    pub fn denormalize(&self, chunk: &[f64]) -> Vec<f64> {
        let dim = self.min.len();
        chunk
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (c, h) = self.scale(i % dim);
                v * h + c
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRecord {
    pub observation: Observation,
    /// Raw (unnormalized) flat action chunk, `horizon × action_dim`.
    pub chunk: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoDataset {
    pub horizon: usize,
    pub action_dim: usize,
    pub records: Vec<DemoRecord>,
}

impl DemoDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn fit_normalizer(&self) -> Normalizer {
        Normalizer::fit(self.records.iter().flat_map(|r| r.chunk.chunks(self.action_dim)), self.action_dim)
    }
}

/// Flattens `actions[t..t + horizon]`, repeating the last action past the end.
pub fn chunk_at(actions: &[Action], t: usize, horizon: usize) -> Vec<f64> {
    let last = *actions.last().expect("demo has actions");
    (t..t + horizon).flat_map(|i| actions.get(i).copied().unwrap_or(last).to_array()).collect()
}

/// Replays each demo and records an observation every `stride` frames,
/// paired with the upcoming action chunk. Attention marks the demo's own
/// pick and place.
pub fn build_dataset(episodes: &[(World, Demo)], horizon: usize, stride: usize, obs: &ObservationConfig) -> Result<DemoDataset, PolicyError> {
    if episodes.is_empty() {
        return Err(PolicyError::EmptyDataset);
    }
    let stride = stride.max(1);
    let mut records = Vec::new();
    for (world, demo) in episodes {
        let attended = [demo.pick_id, demo.place_id];
        let mut state = world.initial_state();
        for (t, a) in demo.actions.iter().enumerate() {
            if t % stride == 0 {
                records.push(DemoRecord { observation: observe(world, &state, &attended, obs), chunk: chunk_at(&demo.actions, t, horizon) });
            }
            state = step_env(world, &state, a);
        }
    }
    Ok(DemoDataset { horizon, action_dim: 4, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;

    #[test]
    fn normalization_round_trip() {
        let data = [vec![0.1, -0.2, 0.3, 0.0], vec![-0.3, 0.25, 0.05, 1.0], vec![0.0, 0.0, 0.2, 1.0]];
        let n = Normalizer::fit(data.iter().map(|v| v.as_slice()), 4);
        for v in &data {
            let z = n.normalize(v);
            assert!(z.iter().all(|x| (-1.0..=1.0).contains(x)));
            let back = n.denormalize(&z);
            for (a, b) in back.iter().zip(v) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert_eq!(n.normalize(&[0.1, -0.2, 0.3, 0.0])[3], -1.0);
    }

    #[test]
    fn constant_dimension_is_safe() {
        let data = [vec![1.0, 2.0], vec![1.0, 3.0]];
        let n = Normalizer::fit(data.iter().map(|v| v.as_slice()), 2);
        assert_eq!(n.normalize(&[1.0, 2.5]), vec![0.0, 0.0]);
        assert_eq!(n.denormalize(&[0.0, 0.0]), vec![1.0, 2.5]);
    }

    #[test]
    fn chunk_pads_with_last_action() {
        let acts: Vec<Action> = (0..3).map(|i| Action::new(Point3::new(i as f64, 0.0, 0.0), false)).collect();
        let c = chunk_at(&acts, 1, 4);
        assert_eq!(c.len(), 16);
        assert_eq!(c[0], 1.0);
        assert_eq!(c[4], 2.0);
        assert_eq!(c[12], 2.0);
    }

    #[test]
    fn empty_dataset_errors() {
        assert!(matches!(build_dataset(&[], 16, 2, &ObservationConfig::default()), Err(PolicyError::EmptyDataset)));
    }
}
