//! Command-line front end. Every command writes into an output directory
//! together with a `manifest.json` recording the command, its configuration,
//! the seed and the source revision.
//!
//! Exit codes: 0 on success, 1 on a usage or configuration error, 2 on a
//! runtime error.

use crate::bench::{
    self, default_workers, evaluate_policy, run_ambiguity_matrix, run_attention_benchmark, run_scaling_curve, train_on, AmbiguityMatrix, BenchConfig,
    BenchError, BenchReport, Cell, EpisodeSource, MatrixConfig, ScalingConfig, ScalingCurve,
};
use crate::instructions::{extract_targets, sample_instruction, to_jsonl, InstructionConfig, InstructionRecord};
use crate::policy::{log_csv, read_checkpoint, write_checkpoint, PolicyConfig, PolicyError, Variant};
use crate::rng::{indexed_seed, stream};
use crate::scene::{gen_scene, read_scene_json, scene_to_json, Scene, SceneConfig, SceneError, Task};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        BenchError::from(e).into()
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::InvalidConfig(m) => CliError::Config(m),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).ok_or_else(|| format!("unknown task '{s}' (expected pack_battery or hang_mug)"))
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant '{s}' (expected attn3d, attn2d or none)"))
}

#[derive(Debug, Parser)]
#[command(name = "deskbench", version, about = "Language-grounded 3D attention and attention-conditioned policy experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Common {
    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(default_workers).max(1)
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Policy input: attn3d, attn2d or none.
    #[arg(long, value_parser = parse_variant, default_value = "attn3d")]
    pub variant: Variant,
    /// Training epochs (360 for the long schedule).
    #[arg(long, default_value_t = 120)]
    pub epochs: usize,
}

impl PolicyArgs {
    fn config(&self) -> Result<PolicyConfig, CliError> {
        if self.epochs == 0 {
            return Err(CliError::Config("epochs must be at least 1".into()));
        }
        let mut c = PolicyConfig::for_variant(self.variant);
        c.train.epochs = self.epochs;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Number of batteries to pick from.
    #[arg(long, default_value_t = 1)]
    pub picks: usize,
    /// Number of vacant slots.
    #[arg(long, default_value_t = 1)]
    pub places: usize,
    /// Draw the battery count per episode from 1..=N instead of --picks.
    #[arg(long)]
    pub mixed_picks: Option<usize>,
}

impl SourceArgs {
    fn source(&self) -> EpisodeSource {
        match self.mixed_picks {
            Some(max_picks) => EpisodeSource::Mixed { max_picks, places: self.places },
            None => EpisodeSource::Cell(Cell::new(self.picks, self.places)),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write randomized scenes as JSON files.
    GenScenes {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sample one instruction per scene into instructions.jsonl.
    GenInstructions {
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Read scenes from this directory instead of generating them.
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write scripted packing demonstrations into demos.jsonl.
    GenDemos {
        #[arg(long, default_value_t = 120)]
        count: usize,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Score language-to-attention grounding against ground truth.
    RunAttnBench {
        /// One task; both when absent.
        #[arg(long, value_parser = parse_task)]
        task: Option<Task>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Feature noise sigma.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = bench::DEFAULT_CHAMFER_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = crate::grounding::DEFAULT_SIM_THRESHOLD)]
        sim_threshold: f64,
        /// Clustering radius; the task default when absent.
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Train a policy on scripted demonstrations.
    TrainPolicy {
        #[arg(long, default_value_t = 120)]
        demos: usize,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Roll a trained policy out on fresh scenes.
    EvalPolicy {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 50)]
        rollouts: usize,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Success rate per (picks, places) cell, one policy per cell.
    AmbiguityMatrix {
        #[arg(long, default_value_t = 120)]
        demos: usize,
        #[arg(long, default_value_t = 50)]
        rollouts: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        picks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,12")]
        places: Vec<usize>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Success rate against the number of demonstrations.
    ScalingCurve {
        #[arg(long, value_delimiter = ',', default_value = "30,60,120,240,540")]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        rollouts: usize,
        #[arg(long, default_value_t = 4)]
        max_picks: usize,
        #[arg(long, default_value_t = 1)]
        places: usize,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize the results in a run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// Also write SVG plots next to the results.
        #[arg(long)]
        plot: bool,
    },
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    seed: u64,
    git_describe: String,
    config: C,
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

struct RunDir {
    path: PathBuf,
}

impl RunDir {
    fn create<C: Serialize>(common: &Common, command: &str, config: C) -> Result<Self, CliError> {
        fs::create_dir_all(&common.out).map_err(|e| io_error(&common.out, e))?;
        let dir = Self { path: common.out.clone() };
        let manifest = Manifest { command, seed: common.seed, git_describe: git_describe(), config };
        dir.write("manifest.json", &json(&manifest))?;
        Ok(dir)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let p = self.path.join(name);
        fs::write(&p, contents).map_err(|e| io_error(&p, e))
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn check_count(name: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn scene_seed(seed: u64, task: Task, i: usize) -> u64 {
    indexed_seed(seed, &["scenes", task.name()], i as u64)
}

fn generated_scenes(task: Task, count: usize, seed: u64) -> Result<Vec<Scene>, CliError> {
    (0..count).map(|i| gen_scene(task, scene_seed(seed, task, i), &SceneConfig::default()).map_err(CliError::from)).collect()
}

fn read_scenes(dir: &Path) -> Result<Vec<Scene>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            read_scene_json(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
        })
        .collect()
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    variant: Variant,
    rate: f64,
    ci_lo: f64,
    ci_hi: f64,
    rollouts: &'a [bench::RolloutRow],
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenScenes { task, count, common } => {
            check_count("count", count)?;
            let dir = RunDir::create(&common, "gen-scenes", serde_json::json!({ "task": task, "count": count }))?;
            for (i, scene) in generated_scenes(task, count, common.seed)?.iter().enumerate() {
                dir.write(&format!("scene_{i:04}.json"), &(scene_to_json(scene) + "\n"))?;
            }
            println!("wrote {count} {task} scenes to {}", dir.path.display());
        }
        Command::GenInstructions { task, count, scenes, common } => {
            let dir = RunDir::create(&common, "gen-instructions", serde_json::json!({ "task": task, "count": count, "scenes": scenes }))?;
            let scenes = match &scenes {
                Some(d) => read_scenes(d)?,
                None => {
                    check_count("count", count)?;
                    generated_scenes(task, count, common.seed)?
                }
            };
            let mut records = Vec::with_capacity(scenes.len());
            for scene in &scenes {
                let mut rng = stream(common.seed, &["instructions", &scene.seed.to_string()]);
                let instruction = sample_instruction(scene.task, scene, &mut rng, &InstructionConfig::default())
                    .map_err(|e| CliError::Runtime(format!("scene {}: {e}", scene.seed)))?;
                records.push(InstructionRecord::new(&instruction, &extract_targets(scene, &instruction)));
            }
            dir.write("instructions.jsonl", &to_jsonl(&records))?;
            println!("wrote {} instructions to {}", records.len(), dir.path.display());
        }
        Command::GenDemos { count, source, common } => {
            check_count("count", count)?;
            let dir = RunDir::create(&common, "gen-demos", serde_json::json!({ "count": count, "source": source.source() }))?;
            let demos = bench::demo_episodes(source.source(), count, common.seed)?;
            let lines: String = demos
                .iter()
                .map(|(w, d)| serde_json::to_string(&serde_json::json!({ "scene": w.scene, "demo": d })).expect("demo serializes") + "\n")
                .collect();
            dir.write("demos.jsonl", &lines)?;
            println!("wrote {count} demonstrations to {}", dir.path.display());
        }
        Command::RunAttnBench { task, episodes, noise, threshold, sim_threshold, eps, common } => {
            let tasks = task.map(|t| vec![t]).unwrap_or_else(|| Task::ALL.to_vec());
            let configs: Vec<BenchConfig> = tasks
                .iter()
                .map(|&t| BenchConfig { episodes, noise_sigma: noise, chamfer_threshold: threshold, sim_threshold, eps, ..BenchConfig::new(t, common.seed) })
                .collect();
            for c in &configs {
                c.validate()?;
            }
            let dir = RunDir::create(&common, "run-attn-bench", &configs)?;
            for c in &configs {
                let report = run_attention_benchmark(c, common.workers())?;
                dir.write(&format!("report_{}.json", c.task), &report.to_json())?;
                let f = report.failures;
                println!(
                    "{}: {}/{} passed; failures codegen {} perception {} execution {}",
                    c.task, report.successes, report.total, f.codegen, f.perception, f.execution
                );
            }
        }
        Command::TrainPolicy { demos, policy, source, common } => {
            check_count("demos", demos)?;
            let config = policy.config()?;
            let dir = RunDir::create(&common, "train-policy", serde_json::json!({ "demos": demos, "source": source.source(), "policy": &config }))?;
            let (trained, log) = train_on(source.source(), demos, common.seed, &config)?;
            let path = dir.path.join("policy.nnet");
            let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
            write_checkpoint(&trained, std::io::BufWriter::new(file))?;
            dir.write("train_log.csv", &log_csv(&log))?;
            println!("trained {} for {} epochs, final loss {:.5}", config.variant(), log.len(), log.last().map_or(f64::NAN, |l| l.loss));
        }
        Command::EvalPolicy { checkpoint, rollouts, source, common } => {
            check_count("rollouts", rollouts)?;
            let file = fs::File::open(&checkpoint).map_err(|e| io_error(&checkpoint, e))?;
            let trained = read_checkpoint(std::io::BufReader::new(file))?;
            let dir = RunDir::create(&common, "eval-policy", serde_json::json!({ "checkpoint": checkpoint, "rollouts": rollouts, "source": source.source() }))?;
            let rows = evaluate_policy(&trained, source.source(), rollouts, common.seed, common.workers())?;
            let outcomes: Vec<bool> = rows.iter().map(|r| r.success).collect();
            let (ci_lo, ci_hi) =
                bench::bootstrap_ci(&outcomes, bench::stats::DEFAULT_RESAMPLES, bench::policy::CI_LEVEL, &mut stream(common.seed, &["bootstrap", "eval"]));
            let summary = EvalSummary { variant: trained.config.variant(), rate: bench::rate(&outcomes), ci_lo, ci_hi, rollouts: &rows };
            dir.write("eval.json", &json(&summary))?;
            println!("{}: success {:.3} [{ci_lo:.3}, {ci_hi:.3}] over {rollouts} rollouts", summary.variant, summary.rate);
        }
        Command::AmbiguityMatrix { demos, rollouts, picks, places, policy, common } => {
            check_count("demos", demos)?;
            check_count("rollouts", rollouts)?;
            let config = MatrixConfig { policy: policy.config()?, demos_per_cell: demos, rollouts, picks, places, seed: common.seed };
            let dir = RunDir::create(&common, "ambiguity-matrix", &config)?;
            let matrix = run_ambiguity_matrix(&config, common.workers())?;
            dir.write("matrix.csv", &matrix.to_csv())?;
            dir.write("matrix.json", &json(&matrix))?;
            print!("{}", matrix.to_csv());
        }
        Command::ScalingCurve { counts, rollouts, max_picks, places, policy, common } => {
            check_count("rollouts", rollouts)?;
            let config = ScalingConfig { policy: policy.config()?, counts, rollouts, source: EpisodeSource::Mixed { max_picks, places }, seed: common.seed };
            let dir = RunDir::create(&common, "scaling-curve", &config)?;
            let curve = run_scaling_curve(&config, common.workers())?;
            dir.write("curve.csv", &curve.to_csv())?;
            dir.write("curve.json", &json(&curve))?;
            print!("{}", curve.to_csv());
        }
        Command::Report { dir, plot } => report(&dir, plot)?,
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map(Some).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Prints a summary of every result file in `dir` and writes it to
/// `summary.txt`; with `plot`, also writes `matrix.svg` and `curve.svg`.
fn report(dir: &Path, plot: bool) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!("{} is not a directory", dir.display())));
    }
    let mut out = String::new();
    for task in Task::ALL {
        if let Some(r) = read_json::<BenchReport>(&dir.join(format!("report_{task}.json")))? {
            let f = r.failures;
            out += &format!(
                "attention {task}: {}/{} passed; failures codegen {} perception {} execution {}\n",
                r.successes, r.total, f.codegen, f.perception, f.execution
            );
        }
    }
    let matrix = read_json::<AmbiguityMatrix>(&dir.join("matrix.json"))?;
    if let Some(m) = &matrix {
        out += &format!("ambiguity matrix ({}):\n", m.variant);
        for c in &m.cells {
            out += &format!("  {}x{}: {:.3} [{:.3}, {:.3}]\n", c.picks, c.places, c.rate, c.ci_lo, c.ci_hi);
        }
    }
    let curve = read_json::<ScalingCurve>(&dir.join("curve.json"))?;
    if let Some(c) = &curve {
        out += &format!("scaling curve ({}):\n", c.variant);
        for p in &c.points {
            out += &format!("  {} demos: {:.3} [{:.3}, {:.3}]\n", p.demos, p.rate, p.ci_lo, p.ci_hi);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("no results found in {}", dir.display())));
    }
    let write = |name: &str, s: &str| {
        let p = dir.join(name);
        fs::write(&p, s).map_err(|e| io_error(&p, e))
    };
    write("summary.txt", &out)?;
    if plot {
        if let Some(m) = &matrix {
            write("matrix.svg", &bench::svg::matrix_svg(m))?;
        }
        if let Some(c) = &curve {
            write("curve.svg", &bench::svg::curve_svg(c))?;
        }
    }
    print!("{out}");
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Usage errors print the usage text.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
