//! Selection programs: the compiled form of an instruction and its
//! interpreter.

use super::detect::{detect, first_with_color, AttributeOracle, InstanceRecord};
use super::select::{select_index, Relation};
use crate::instructions::{component_library, Component, Descriptor, Instruction, Role, TargetSpec};
use crate::rng::indexed_stream;
use crate::scene::{Category, Color, FeatureCloud, ReferenceBank, Task};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    /// Instance list of a category.
    Detect(Category),
    /// List to instance by spatial relation.
    SelPos(Relation, Box<Expr>),
    /// List to instance by attribute.
    SelName(Color, Box<Expr>),
    /// List minus one instance.
    Difference(Box<Expr>, Box<Expr>),
    /// First instance of a list.
    First(Box<Expr>),
}

impl Expr {
    pub fn detect(c: Category) -> Expr {
        Expr::Detect(c)
    }

    pub fn sel_pos(r: Relation, e: Expr) -> Expr {
        Expr::SelPos(r, Box::new(e))
    }

    pub fn sel_name(c: Color, e: Expr) -> Expr {
        Expr::SelName(c, Box::new(e))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Detect(c) => write!(f, "(detect {c})"),
            Expr::SelPos(r, e) => write!(f, "(sel-pos {r} {e})"),
            Expr::SelName(c, e) => write!(f, "(sel-name {} {e})", c.name()),
            Expr::Difference(a, b) => write!(f, "(difference {a} {b})"),
            Expr::First(e) => write!(f, "(first {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionProgram {
    pub pick: Expr,
    pub place: Expr,
}

impl fmt::Display for SelectionProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(pair {} {})", self.pick, self.place)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    Codegen,
    Perception,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GroundingError {
    #[error("unsupported descriptor: {0}")]
    UnsupportedDescriptor(String),
    #[error("ill-typed program: {0} does not yield {1}")]
    IllTyped(String, &'static str),
    #[error("empty instance list")]
    EmptyInstanceList,
    #[error("attribute not found: {}", .0.name())]
    AttributeNotFound(Color),
}

impl GroundingError {
    pub fn stage(&self) -> FailureStage {
        match self {
            GroundingError::UnsupportedDescriptor(_) | GroundingError::IllTyped(..) => FailureStage::Codegen,
            GroundingError::EmptyInstanceList | GroundingError::AttributeNotFound(_) => FailureStage::Perception,
        }
    }
}

/// A failed program step.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("{stage:?} failure at {step}: {error}")]
pub struct ProgramError {
    pub stage: FailureStage,
    pub step: String,
    pub error: GroundingError,
}

impl ProgramError {
    fn at(step: &Expr, error: GroundingError) -> Self {
        Self { stage: error.stage(), step: step.to_string(), error }
    }
}

fn descriptor_expr(task: Task, c: &Component) -> Result<Expr, GroundingError> {
    let (picks, places) = component_library(task, true);
    if !picks.contains(c) && !places.contains(c) {
        return Err(GroundingError::UnsupportedDescriptor(format!("{c} in {task}")));
    }
    let list = Expr::detect(c.category);
    Ok(match c.descriptor {
        Descriptor::Color(col) => Expr::sel_name(col, list),
        d => Expr::sel_pos(d.relation().expect("spatial descriptor"), list),
    })
}

fn role_expr(task: Task, spec: TargetSpec, category: Category) -> Result<Expr, GroundingError> {
    match spec {
        TargetSpec::Named(c) => descriptor_expr(task, &c),
        TargetSpec::Complement(d) => Ok(Expr::First(Box::new(Expr::Difference(Box::new(Expr::detect(category)), Box::new(descriptor_expr(task, &d)?))))),
        TargetSpec::Any => Ok(Expr::sel_pos(Relation::Any, Expr::detect(category))),
    }
}

/// Maps each role of the instruction to a selection expression: colors to
/// attribute selection, spatial words to relations, open roles to a seeded
/// choice and "the other one" to the first instance left after removing the
/// distractor.
pub fn compile_program(instruction: &Instruction) -> Result<SelectionProgram, GroundingError> {
    let task = instruction.task;
    Ok(SelectionProgram {
        pick: role_expr(task, instruction.target_spec(Role::Pick), task.pick_category())?,
        place: role_expr(task, instruction.target_spec(Role::Place), task.place_category())?,
    })
}

/// Selects one instance by relation; `Any` draws uniformly from `rng`.
pub fn sel_pos(instances: &[InstanceRecord], relation: Relation, rng: &mut impl Rng) -> Result<usize, GroundingError> {
    if instances.is_empty() {
        return Err(GroundingError::EmptyInstanceList);
    }
    if relation == Relation::Any {
        return Ok(rng.random_range(0..instances.len()));
    }
    let centroids: Vec<_> = instances.iter().map(|r| r.centroid).collect();
    Ok(select_index(relation, &centroids).expect("non-empty"))
}

/// First instance (in list order) whose attribute matches.
pub fn sel_name(instances: &[InstanceRecord], color: Color, oracle: &AttributeOracle) -> Result<usize, GroundingError> {
    if instances.is_empty() {
        return Err(GroundingError::EmptyInstanceList);
    }
    first_with_color(instances, color, oracle).ok_or(GroundingError::AttributeNotFound(color))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundingConfig {
    pub sim_threshold: f64,
    /// Clustering radius; defaults to the task's.
    pub eps: f64,
}

impl GroundingConfig {
    pub fn for_task(task: Task) -> Self {
        Self { sim_threshold: super::DEFAULT_SIM_THRESHOLD, eps: task.cluster_eps() }
    }
}

enum Value {
    List(Vec<InstanceRecord>),
    One(InstanceRecord),
}

struct Interp<'a> {
    cloud: &'a FeatureCloud,
    refs: &'a ReferenceBank,
    oracle: &'a AttributeOracle,
    config: &'a GroundingConfig,
    seed: u64,
    any_draws: u64,
    detected: HashMap<Category, Vec<InstanceRecord>>,
}

impl Interp<'_> {
    fn list(&mut self, e: &Expr) -> Result<Vec<InstanceRecord>, ProgramError> {
        match self.eval(e)? {
            Value::List(l) => Ok(l),
            Value::One(_) => Err(ProgramError::at(e, GroundingError::IllTyped(e.to_string(), "a list"))),
        }
    }

    fn one(&mut self, e: &Expr) -> Result<InstanceRecord, ProgramError> {
        match self.eval(e)? {
            Value::One(r) => Ok(r),
            Value::List(_) => Err(ProgramError::at(e, GroundingError::IllTyped(e.to_string(), "an instance"))),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, ProgramError> {
        match e {
            Expr::Detect(c) => {
                let (cloud, refs, cfg) = (self.cloud, self.refs, self.config);
                let list = self.detected.entry(*c).or_insert_with(|| detect(cloud, refs.get(*c), cfg.sim_threshold, cfg.eps)).clone();
                if list.is_empty() {
                    return Err(ProgramError::at(e, GroundingError::EmptyInstanceList));
                }
                Ok(Value::List(list))
            }
            Expr::SelPos(r, inner) => {
                let list = self.list(inner)?;
                let mut rng = indexed_stream(self.seed, &["sel-any"], self.any_draws);
                if *r == Relation::Any {
                    self.any_draws += 1;
                }
                let i = sel_pos(&list, *r, &mut rng).map_err(|err| ProgramError::at(e, err))?;
                Ok(Value::One(list[i].clone()))
            }
            Expr::SelName(c, inner) => {
                let list = self.list(inner)?;
                let i = sel_name(&list, *c, self.oracle).map_err(|err| ProgramError::at(e, err))?;
                Ok(Value::One(list[i].clone()))
            }
            Expr::Difference(a, b) => {
                let list = self.list(a)?;
                let drop = self.one(b)?;
                Ok(Value::List(list.into_iter().filter(|r| r.indices != drop.indices).collect()))
            }
            Expr::First(inner) => {
                let list = self.list(inner)?;
                list.into_iter().next().map(Value::One).ok_or_else(|| ProgramError::at(e, GroundingError::EmptyInstanceList))
            }
        }
    }
}

/// Runs a program on a feature cloud. The seed only feeds `Any` choices.
pub fn run_program(
    program: &SelectionProgram,
    cloud: &FeatureCloud,
    refs: &ReferenceBank,
    oracle: &AttributeOracle,
    config: &GroundingConfig,
    seed: u64,
) -> Result<(InstanceRecord, InstanceRecord), ProgramError> {
    let mut it = Interp { cloud, refs, oracle, config, seed, any_draws: 0, detected: HashMap::new() };
    let pick = it.one(&program.pick)?;
    let place = it.one(&program.place)?;
    Ok((pick, place))
}
