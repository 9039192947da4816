//! Policy experiments on the packing task: per-cell training and rollouts,
//! the ambiguity matrix and the demonstration scaling curve.

use super::pool::par_map;
use super::stats::{bootstrap_ci, rate, DEFAULT_RESAMPLES};
use super::BenchError;
use crate::policy::{rollout, train_policy, DiffusionPolicy, EpochLog, PolicyConfig, RolloutConfig, RolloutFailure, TrainedPolicy, Variant};
use crate::rng::{indexed_seed, stream};
use crate::scene::{gen_scene, scripted_demo, Demo, SceneConfig, Task, World};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const MATRIX_PICKS: [usize; 4] = [1, 2, 3, 4];
pub const MATRIX_PLACES: [usize; 5] = [1, 2, 3, 4, 12];
pub const SCALING_COUNTS: [usize; 5] = [30, 60, 120, 240, 540];
pub const CI_LEVEL: f64 = 0.95;

/// Number of picking and placing options in a packing scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub picks: usize,
    pub places: usize,
}

impl Cell {
    pub fn new(picks: usize, places: usize) -> Self {
        Self { picks, places }
    }

    fn label(self) -> String {
        format!("{}x{}", self.picks, self.places)
    }
}

/// Where episodes come from: one fixed cell, or a per-episode uniform draw of
/// the pick count from `1..=max_picks` with a fixed place count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeSource {
    Cell(Cell),
    Mixed { max_picks: usize, places: usize },
}

impl EpisodeSource {
    fn label(self) -> String {
        match self {
            EpisodeSource::Cell(c) => c.label(),
            EpisodeSource::Mixed { max_picks, places } => format!("mixed{max_picks}x{places}"),
        }
    }

    fn cell_for(self, seed: u64) -> Cell {
        match self {
            EpisodeSource::Cell(c) => c,
            EpisodeSource::Mixed { max_picks, places } => Cell::new(stream(seed, &["mixed-picks"]).random_range(1..=max_picks), places),
        }
    }

    fn validate(self) -> Result<(), BenchError> {
        let (picks, places) = match self {
            EpisodeSource::Cell(c) => (c.picks, c.places),
            EpisodeSource::Mixed { max_picks, places } => (max_picks, places),
        };
        if !(1..=4).contains(&picks) || !(1..=12).contains(&places) {
            return Err(BenchError::InvalidConfig(format!("cell {picks}x{places} outside 1..=4 by 1..=12")));
        }
        Ok(())
    }
}

/// One packing scene with a uniformly chosen (battery, slot) pair. `purpose`
/// keeps demonstration and evaluation scenes apart.
pub fn episode(source: EpisodeSource, seed: u64, purpose: &str, index: u64) -> Result<(World, u32, u32), BenchError> {
    let scene_seed = indexed_seed(seed, &[purpose, &source.label()], index);
    let cell = source.cell_for(scene_seed);
    let scene = gen_scene(Task::PackBattery, scene_seed, &SceneConfig::ambiguity_cell(cell.picks, cell.places))?;
    let mut rng = stream(scene_seed, &["pair"]);
    let pick = scene.pick_candidates().choose(&mut rng).expect("cell has a battery").id;
    let place = scene.vacant_targets().choose(&mut rng).expect("cell has a vacant slot").id;
    Ok((World::new(scene), pick, place))
}

/// `count` scripted demonstrations from `source`.
pub fn demo_episodes(source: EpisodeSource, count: usize, seed: u64) -> Result<Vec<(World, Demo)>, BenchError> {
    source.validate()?;
    (0..count as u64)
        .map(|i| {
            let (world, pick, place) = episode(source, seed, "demos", i)?;
            let demo = scripted_demo(&world.scene, pick, place)?;
            Ok((world, demo))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRow {
    pub seed: u64,
    pub picks: usize,
    pub places: usize,
    pub pick: u32,
    pub place: u32,
    pub success: bool,
    pub frames: u32,
    pub failure: Option<RolloutFailure>,
}

/// Rolls the policy out on `rollouts` fresh scenes. Attention variants are
/// scored on the attended pair; the unconditioned one on any pair.
pub fn evaluate_policy(policy: &TrainedPolicy, source: EpisodeSource, rollouts: usize, seed: u64, workers: usize) -> Result<Vec<RolloutRow>, BenchError> {
    source.validate()?;
    let rows = par_map(rollouts, workers, |i| -> Result<RolloutRow, BenchError> {
        let (world, pick, place) = episode(source, seed, "rollouts", i as u64)?;
        let allowed: Vec<(u32, u32)> = if policy.config.variant().conditioned() {
            vec![(pick, place)]
        } else {
            let places: Vec<u32> = world.scene.vacant_targets().iter().map(|o| o.id).collect();
            world.scene.pick_candidates().iter().flat_map(|p| places.iter().map(move |&q| (p.id, q))).collect()
        };
        let mut driver = DiffusionPolicy::new(policy, world.scene.seed);
        let cfg = RolloutConfig { replan_every: policy.config.replan_every, ..RolloutConfig::default() };
        let r = rollout(&mut driver, &world, &[pick, place], &allowed, &cfg);
        let picks = world.scene.pick_candidates().len();
        let places = world.scene.vacant_targets().len();
        Ok(RolloutRow { seed: world.scene.seed, picks, places, pick, place, success: r.success, frames: r.frames, failure: r.failure })
    });
    rows.into_iter().collect()
}

/// Training seed for a policy cell, independent of the demonstration seeds.
fn train_seed(seed: u64, variant: Variant, label: &str) -> u64 {
    indexed_seed(seed, &["train", variant.name(), label], 0)
}

/// Trains on `count` demonstrations from `source`.
pub fn train_on(source: EpisodeSource, count: usize, seed: u64, config: &PolicyConfig) -> Result<(TrainedPolicy, Vec<EpochLog>), BenchError> {
    let demos = demo_episodes(source, count, seed)?;
    let mut config = config.clone();
    config.train.seed = train_seed(seed, config.variant(), &source.label());
    Ok(train_policy(&demos, &config)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub policy: PolicyConfig,
    pub demos_per_cell: usize,
    pub rollouts: usize,
    pub picks: Vec<usize>,
    pub places: Vec<usize>,
    pub seed: u64,
}

impl MatrixConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        Self {
            policy: PolicyConfig::for_variant(variant),
            demos_per_cell: 120,
            rollouts: 50,
            picks: MATRIX_PICKS.to_vec(),
            places: MATRIX_PLACES.to_vec(),
            seed,
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.picks.iter().flat_map(|&p| self.places.iter().map(move |&q| Cell::new(p, q))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub picks: usize,
    pub places: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub outcomes: Vec<bool>,
}

impl CellResult {
    fn new(picks: usize, places: usize, outcomes: Vec<bool>, ci_seed: u64, label: &str) -> Self {
        let (ci_lo, ci_hi) = bootstrap_ci(&outcomes, DEFAULT_RESAMPLES, CI_LEVEL, &mut stream(ci_seed, &["bootstrap", label]));
        Self { picks, places, rate: rate(&outcomes), ci_lo, ci_hi, outcomes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityMatrix {
    pub variant: Variant,
    pub cells: Vec<CellResult>,
}

pub const MATRIX_CSV_HEADER: &str = "picks,places,rate,ci_lo,ci_hi";

impl AmbiguityMatrix {
    pub fn cell(&self, picks: usize, places: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.picks == picks && c.places == places)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{MATRIX_CSV_HEADER}\n");
        for c in &self.cells {
            s += &format!("{},{},{:.4},{:.4},{:.4}\n", c.picks, c.places, c.rate, c.ci_lo, c.ci_hi);
        }
        s
    }
}

/// Trains one policy per cell on `demos_per_cell` demonstrations and rolls
/// each out `rollouts` times. Cells run on `workers` threads.
pub fn run_ambiguity_matrix(config: &MatrixConfig, workers: usize) -> Result<AmbiguityMatrix, BenchError> {
    if config.rollouts == 0 {
        return Err(BenchError::InvalidConfig("rollout count must be at least 1".into()));
    }
    let cells = config.cells();
    for c in &cells {
        EpisodeSource::Cell(*c).validate()?;
    }
    let results = par_map(cells.len(), workers, |i| -> Result<CellResult, BenchError> {
        let cell = cells[i];
        let source = EpisodeSource::Cell(cell);
        let (policy, _) = train_on(source, config.demos_per_cell, config.seed, &config.policy)?;
        let rows = evaluate_policy(&policy, source, config.rollouts, config.seed, 1)?;
        Ok(CellResult::new(cell.picks, cell.places, rows.iter().map(|r| r.success).collect(), config.seed, &cell.label()))
    });
    Ok(AmbiguityMatrix { variant: config.policy.variant(), cells: results.into_iter().collect::<Result<_, _>>()? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub policy: PolicyConfig,
    pub counts: Vec<usize>,
    pub rollouts: usize,
    pub source: EpisodeSource,
    pub seed: u64,
}

impl ScalingConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        Self {
            policy: PolicyConfig::for_variant(variant),
            counts: SCALING_COUNTS.to_vec(),
            rollouts: 50,
            source: EpisodeSource::Mixed { max_picks: 4, places: 1 },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub demos: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub outcomes: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub variant: Variant,
    pub points: Vec<CurvePoint>,
}

pub const CURVE_CSV_HEADER: &str = "demos,rate,ci_lo,ci_hi";

impl ScalingCurve {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CURVE_CSV_HEADER}\n");
        for p in &self.points {
            s += &format!("{},{:.4},{:.4},{:.4}\n", p.demos, p.rate, p.ci_lo, p.ci_hi);
        }
        s
    }
}

/// Trains on growing prefixes of one shared demonstration pool and rolls
/// each policy out on the same evaluation scenes.
pub fn run_scaling_curve(config: &ScalingConfig, workers: usize) -> Result<ScalingCurve, BenchError> {
    config.source.validate()?;
    if config.rollouts == 0 {
        return Err(BenchError::InvalidConfig("rollout count must be at least 1".into()));
    }
    let pool = demo_episodes(config.source, config.counts.iter().copied().max().unwrap_or(0), config.seed)?;
    let results = par_map(config.counts.len(), workers, |i| -> Result<CurvePoint, BenchError> {
        let n = config.counts[i];
        let mut policy_config = config.policy.clone();
        policy_config.train.seed = train_seed(config.seed, policy_config.variant(), &format!("{}-{n}", config.source.label()));
        let (policy, _) = train_policy(&pool[..n], &policy_config)?;
        let rows = evaluate_policy(&policy, config.source, config.rollouts, config.seed, 1)?;
        let cell = CellResult::new(0, 0, rows.iter().map(|r| r.success).collect(), config.seed, &format!("curve-{n}"));
        Ok(CurvePoint { demos: n, rate: cell.rate, ci_lo: cell.ci_lo, ci_hi: cell.ci_hi, outcomes: cell.outcomes })
    });
    Ok(ScalingCurve { variant: config.policy.variant(), points: results.into_iter().collect::<Result<_, _>>()? })
}
