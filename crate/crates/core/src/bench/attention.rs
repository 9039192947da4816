//! Language-to-attention benchmark: scene, instruction, feature cloud,
//! selection program, attention map, Chamfer score against ground truth.

use super::pool::par_map;
use super::BenchError;
use crate::geom::{chamfer_distance, Point3};
use crate::grounding::{build_attention, compile_program, run_program, AttributeOracle, FailureStage, GroundingConfig};
use crate::instructions::{extract_targets, sample_instruction, InstructionConfig, Targets};
use crate::rng::{indexed_seed, stream};
use crate::scene::{gen_scene, render_feature_cloud, FeatureCloud, ReferenceBank, RenderConfig, SceneConfig, Task};
use serde::{Deserialize, Serialize};

pub const DEFAULT_CHAMFER_THRESHOLD: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub task: Task,
    pub episodes: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub chamfer_threshold: f64,
    pub sim_threshold: f64,
    /// Clustering radius; the task default when absent.
    pub eps: Option<f64>,
}

impl BenchConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        Self {
            task,
            episodes: 100,
            seed,
            noise_sigma: 0.0,
            chamfer_threshold: DEFAULT_CHAMFER_THRESHOLD,
            sim_threshold: crate::grounding::DEFAULT_SIM_THRESHOLD,
            eps: None,
        }
    }

    /// A zero threshold is accepted so the degenerate case can be run.
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.episodes == 0 {
            return Err(BenchError::InvalidConfig("episode count must be at least 1".into()));
        }
        if !(self.chamfer_threshold >= 0.0 && self.chamfer_threshold.is_finite()) {
            return Err(BenchError::InvalidConfig(format!("chamfer threshold {} must be non-negative", self.chamfer_threshold)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(BenchError::InvalidConfig(format!("noise sigma {} must be non-negative", self.noise_sigma)));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(BenchError::InvalidConfig(format!("eps {eps} must be positive")));
            }
        }
        Ok(())
    }

    fn grounding(&self) -> GroundingConfig {
        GroundingConfig { sim_threshold: self.sim_threshold, eps: self.eps.unwrap_or_else(|| self.task.cluster_eps()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Codegen,
    Perception,
    Execution,
}

impl From<FailureStage> for FailureKind {
    fn from(s: FailureStage) -> Self {
        match s {
            FailureStage::Codegen => FailureKind::Codegen,
            FailureStage::Perception => FailureKind::Perception,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub codegen: usize,
    pub perception: usize,
    pub execution: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.codegen + self.perception + self.execution
    }

    fn add(&mut self, kind: FailureKind) {
        match kind {
            FailureKind::Codegen => self.codegen += 1,
            FailureKind::Perception => self.perception += 1,
            FailureKind::Execution => self.execution += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    /// Scene seed.
    pub seed: u64,
    pub text: String,
    /// Absent when the episode failed before an attention map existed.
    pub chamfer: Option<f64>,
    pub pass: bool,
    #[serde(skip)]
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub task: Task,
    pub successes: usize,
    pub total: usize,
    pub failures: FailureCounts,
    pub episodes: Vec<EpisodeRow>,
}

impl BenchReport {
    fn from_rows(task: Task, episodes: Vec<EpisodeRow>) -> Self {
        let mut failures = FailureCounts::default();
        for f in episodes.iter().filter_map(|e| e.failure) {
            failures.add(f);
        }
        let successes = episodes.iter().filter(|e| e.pass).count();
        Self { task, successes, total: episodes.len(), failures, episodes }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn support_points(cloud: &FeatureCloud, ids: &[u32]) -> Vec<Point3> {
    cloud.indices_of(ids).into_iter().map(|i| cloud.points[i]).collect()
}

/// Chamfer against the pair the program chose when that pair is allowed,
/// otherwise against the closest allowed pair.
fn score(cloud: &FeatureCloud, generated: &[Point3], chosen: (i32, i32), targets: &Targets) -> Option<f64> {
    let pairs = targets.allowed_pairs();
    let (p, q) = chosen;
    if p >= 0 && q >= 0 && targets.allows(p as u32, q as u32) {
        return chamfer_distance(generated, &support_points(cloud, &[p as u32, q as u32])).ok();
    }
    pairs.iter().filter_map(|&(p, q)| chamfer_distance(generated, &support_points(cloud, &[p, q])).ok()).min_by(f64::total_cmp)
}

/// One episode; `index` fixes the scene seed through the master seed.
pub fn run_episode(config: &BenchConfig, index: u64) -> EpisodeRow {
    let seed = indexed_seed(config.seed, &["attn-bench", config.task.name()], index);
    let fail = |text: String, chamfer: Option<f64>, kind: FailureKind| EpisodeRow { seed, text, chamfer, pass: false, failure: Some(kind) };
    let scene = match gen_scene(config.task, seed, &SceneConfig::default()) {
        Ok(s) => s,
        Err(_) => return fail(String::new(), None, FailureKind::Execution),
    };
    let instruction = match sample_instruction(config.task, &scene, &mut stream(seed, &["instruction"]), &InstructionConfig::default()) {
        Ok(i) => i,
        Err(_) => return fail(String::new(), None, FailureKind::Codegen),
    };
    let text = instruction.text.clone();
    let render = RenderConfig::default();
    let cloud = render_feature_cloud(&scene, config.noise_sigma, seed, &render);
    let refs = ReferenceBank::new(render.feature_dim, render.reference_seed);
    let program = match compile_program(&instruction) {
        Ok(p) => p,
        Err(_) => return fail(text, None, FailureKind::Codegen),
    };
    let oracle = AttributeOracle::from_scene(&scene);
    let (pick, place) = match run_program(&program, &cloud, &refs, &oracle, &config.grounding(), seed) {
        Ok(pair) => pair,
        Err(e) => return fail(text, None, e.stage.into()),
    };
    let map = build_attention(&cloud, &pick, &place);
    let targets = extract_targets(&scene, &instruction);
    let chamfer = score(&cloud, &map.points(&cloud), (pick.majority_gt, place.majority_gt), &targets);
    match chamfer {
        Some(c) if c <= config.chamfer_threshold => EpisodeRow { seed, text, chamfer: Some(c), pass: true, failure: None },
        Some(c) => fail(text, Some(c), FailureKind::Perception),
        None => fail(text, None, FailureKind::Perception),
    }
}

/// Runs every episode on `workers` threads; rows come back in episode order.
pub fn run_attention_benchmark(config: &BenchConfig, workers: usize) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let rows = par_map(config.episodes, workers, |i| run_episode(config, i as u64));
    Ok(BenchReport::from_rows(config.task, rows))
}
