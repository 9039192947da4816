//! Percentile bootstrap over binary rollout outcomes.

use rand::Rng;

pub const DEFAULT_RESAMPLES: usize = 2000;

pub fn rate(outcomes: &[bool]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|&&o| o).count() as f64 / outcomes.len() as f64
}

fn resampled_rate(outcomes: &[bool], rng: &mut impl Rng) -> f64 {
    let n = outcomes.len();
    (0..n).filter(|_| outcomes[rng.random_range(0..n)]).count() as f64 / n as f64
}

/// Lower and upper percentiles of `stats` for a two-sided `level` interval.
fn percentile_interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(f64::total_cmp);
    let b = stats.len();
    let tail = (1.0 - level) / 2.0;
    let lo = ((tail * b as f64).floor() as usize).min(b - 1);
    let hi = (((1.0 - tail) * b as f64).ceil() as usize).clamp(1, b) - 1;
    (stats[lo], stats[hi])
}

/// Percentile interval for a success rate. Empty input gives `(0, 0)`.
pub fn bootstrap_ci(outcomes: &[bool], resamples: usize, level: f64, rng: &mut impl Rng) -> (f64, f64) {
    if outcomes.is_empty() || resamples == 0 {
        return (0.0, 0.0);
    }
    percentile_interval((0..resamples).map(|_| resampled_rate(outcomes, rng)).collect(), level)
}

/// Percentile interval for `rate(a) - rate(b)`, resampling both independently.
pub fn bootstrap_diff_ci(a: &[bool], b: &[bool], resamples: usize, level: f64, rng: &mut impl Rng) -> (f64, f64) {
    if a.is_empty() || b.is_empty() || resamples == 0 {
        return (0.0, 0.0);
    }
    let stats = (0..resamples).map(|_| resampled_rate(a, rng) - resampled_rate(b, rng)).collect();
    percentile_interval(stats, level)
}
