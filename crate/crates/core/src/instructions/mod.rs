//! Templated pick-and-place instructions.
//!
//! An instruction is a template from one of four slackness classes with its
//! holes filled by descriptive components. Holes name the pick object
//! (`{mug}`, `{battery}`), the place target (`{branch}`, `{slot}`) or a
//! distractor (`{other_*}`). A role whose own hole is present is pinned to
//! that component; a role with only a distractor hole means "the remaining
//! ones"; a role with neither is left open.

mod library;

pub use library::{component_library, templates, Template, HANG_MUG_TEMPLATES, PACK_BATTERY_TEMPLATES};

use crate::grounding::{select_index, Relation};
use crate::scene::{Category, Color, Scene, Task};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum InstructionError {
    #[error("no consistent instruction after {0} attempts")]
    NoConsistentInstruction(usize),
    #[error("unknown hole {{{0}}} in template")]
    UnknownHole(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slackness {
    None,
    PickSlack,
    PlaceSlack,
    BothSlack,
}

impl Slackness {
    pub const ALL: [Slackness; 4] = [Slackness::None, Slackness::PickSlack, Slackness::PlaceSlack, Slackness::BothSlack];

    pub fn name(self) -> &'static str {
        match self {
            Slackness::None => "none",
            Slackness::PickSlack => "pick_slack",
            Slackness::PlaceSlack => "place_slack",
            Slackness::BothSlack => "both_slack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Row {
    Front,
    Middle,
    Back,
}

impl Row {
    pub fn name(self) -> &'static str {
        match self {
            Row::Front => "front",
            Row::Middle => "middle",
            Row::Back => "back",
        }
    }

    /// Grid rows this descriptor covers (row 0 is the front).
    pub fn grid_rows(self) -> &'static [usize] {
        match self {
            Row::Front => &[0],
            Row::Middle => &[1],
            Row::Back => &[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Left,
    Middle,
    Right,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Left => "left",
            Column::Middle => "middle",
            Column::Right => "right",
        }
    }

    /// Grid columns this descriptor covers in a 4-column crate. "Middle" is
    /// plural: both inner columns.
    pub fn grid_cols(self) -> &'static [usize] {
        match self {
            Column::Left => &[0],
            Column::Middle => &[1, 2],
            Column::Right => &[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    LeftMost,
    RightMost,
    FrontMost,
    BackMost,
    Furthest,
    Nearest,
    Color(Color),
    RightTopmost,
    LeftTopmost,
    RightMiddle,
    Row(Row),
    Column(Column),
}

impl Descriptor {
    /// The spatial relation this descriptor selects by, if it is spatial.
    pub fn relation(self) -> Option<Relation> {
        Some(match self {
            Descriptor::LeftMost => Relation::LeftMost,
            Descriptor::RightMost => Relation::RightMost,
            Descriptor::FrontMost => Relation::FrontMost,
            Descriptor::BackMost => Relation::BackMost,
            Descriptor::Furthest => Relation::Furthest,
            Descriptor::Nearest => Relation::Nearest,
            Descriptor::RightTopmost => Relation::TopmostRight,
            Descriptor::LeftTopmost => Relation::TopmostLeft,
            Descriptor::RightMiddle => Relation::MiddleRight,
            Descriptor::Row(r) => Relation::Row(r),
            Descriptor::Column(c) => Relation::Column(c),
            Descriptor::Color(_) => return None,
        })
    }
}

/// A structured object reference such as "blue mug".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub category: Category,
    pub descriptor: Descriptor,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cat = self.category.name();
        match (self.category, self.descriptor) {
            (Category::Slot, Descriptor::Row(Row::Middle)) => f.write_str("slot on the middle row"),
            (Category::Slot, Descriptor::Row(r)) => write!(f, "slot on the {}-most row", r.name()),
            (Category::Slot, Descriptor::Column(Column::Left)) => f.write_str("slot on left column"),
            (Category::Slot, Descriptor::Column(Column::Middle)) => f.write_str("slot on the middle columns"),
            (Category::Slot, Descriptor::Column(Column::Right)) => f.write_str("slot on the right column"),
            (_, Descriptor::LeftMost) => write!(f, "left-most {cat}"),
            (_, Descriptor::RightMost) => write!(f, "right-most {cat}"),
            (_, Descriptor::FrontMost) => write!(f, "front-most {cat}"),
            (_, Descriptor::BackMost) => write!(f, "back-most {cat}"),
            (_, Descriptor::Furthest) => write!(f, "furthest {cat}"),
            (_, Descriptor::Nearest) => write!(f, "nearest {cat}"),
            (_, Descriptor::Color(c)) => write!(f, "{} {cat}", c.name()),
            (_, Descriptor::RightTopmost) => write!(f, "right-topmost {cat}"),
            (_, Descriptor::LeftTopmost) => write!(f, "left-topmost {cat}"),
            (_, Descriptor::RightMiddle) => write!(f, "right-middle {cat}"),
            (_, Descriptor::Row(r)) => write!(f, "{cat} on the {} row", r.name()),
            (_, Descriptor::Column(c)) => write!(f, "{cat} on the {} column", c.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pick,
    Place,
}

/// A template hole: which role it refers to and whether it is a distractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hole {
    pub role: Role,
    pub other: bool,
}

impl Hole {
    pub fn parse(task: Task, name: &str) -> Option<Hole> {
        let (other, base) = match name.strip_prefix("other_") {
            Some(b) => (true, b),
            None => (false, name),
        };
        let role = if base == task.pick_category().name() {
            Role::Pick
        } else if base == task.place_category().name() {
            Role::Place
        } else {
            return None;
        };
        Some(Hole { role, other })
    }

    pub fn name(self, task: Task) -> String {
        let base = match self.role {
            Role::Pick => task.pick_category().name(),
            Role::Place => task.place_category().name(),
        };
        if self.other {
            format!("other_{base}")
        } else {
            base.to_string()
        }
    }
}

/// Holes of a template in order of first appearance.
pub fn template_holes(task: Task, text: &str) -> Result<Vec<Hole>, InstructionError> {
    let mut holes = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').map(|c| open + c).ok_or_else(|| InstructionError::UnknownHole(rest[open..].to_string()))?;
        let name = &rest[open + 1..close];
        let hole = Hole::parse(task, name).ok_or_else(|| InstructionError::UnknownHole(name.to_string()))?;
        if !holes.contains(&hole) {
            holes.push(hole);
        }
        rest = &rest[close + 1..];
    }
    Ok(holes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fill {
    pub hole: Hole,
    pub component: Component,
}

/// How a role's target set is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Named(Component),
    /// Every candidate except those the distractor denotes.
    Complement(Component),
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub scene_id: u64,
    pub task: Task,
    /// Index into the task's template library.
    pub template: usize,
    pub slackness: Slackness,
    pub text: String,
    pub fills: Vec<Fill>,
}

impl Instruction {
    /// Fills `template` of `task`'s library. Panics if a hole is left unfilled.
    pub fn build(scene_id: u64, task: Task, template: usize, fills: Vec<Fill>) -> Instruction {
        let tpl = templates(task)[template];
        let mut text = tpl.text.to_string();
        for f in &fills {
            text = text.replace(&format!("{{{}}}", f.hole.name(task)), &f.component.to_string());
        }
        assert!(!text.contains('{'), "unfilled hole in {text:?}");
        Instruction { scene_id, task, template, slackness: tpl.slackness, text, fills }
    }

    pub fn fill(&self, hole: Hole) -> Option<Component> {
        self.fills.iter().find(|f| f.hole == hole).map(|f| f.component)
    }

    pub fn components(&self) -> Vec<Component> {
        self.fills.iter().filter(|f| !f.hole.other).map(|f| f.component).collect()
    }

    pub fn distractors(&self) -> Vec<Component> {
        self.fills.iter().filter(|f| f.hole.other).map(|f| f.component).collect()
    }

    pub fn target_spec(&self, role: Role) -> TargetSpec {
        spec_for(&self.fills, role)
    }
}

fn spec_for(fills: &[Fill], role: Role) -> TargetSpec {
    let find = |other| fills.iter().find(|f| f.hole == Hole { role, other }).map(|f| f.component);
    match (find(false), find(true)) {
        (Some(c), _) => TargetSpec::Named(c),
        (None, Some(d)) => TargetSpec::Complement(d),
        (None, None) => TargetSpec::Any,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionConfig {
    /// Offer "white mug" components; only useful with white mugs in scenes.
    pub white_mugs: bool,
}

impl Default for InstructionConfig {
    fn default() -> Self {
        Self { white_mugs: false }
    }
}

/// Candidates for a role before any descriptor applies: every object of the
/// pick category, or every fixture of the place category that starts free.
pub fn role_universe(scene: &Scene, role: Role) -> Vec<u32> {
    match role {
        Role::Pick => scene.pick_candidates().iter().map(|o| o.id).collect(),
        Role::Place => scene.vacant_targets().iter().map(|o| o.id).collect(),
    }
}

/// Ids of every candidate the component describes, ascending.
pub fn denote(scene: &Scene, component: &Component) -> Vec<u32> {
    let role = if component.category == scene.task.pick_category() {
        Role::Pick
    } else if component.category == scene.task.place_category() {
        Role::Place
    } else {
        return Vec::new();
    };
    let universe = role_universe(scene, role);
    let objs: Vec<_> = universe.iter().filter_map(|&id| scene.object(id)).collect();
    let mut ids: Vec<u32> = match component.descriptor {
        Descriptor::Color(c) => objs.iter().filter(|o| o.color == c).map(|o| o.id).collect(),
        Descriptor::Row(r) if component.category == Category::Slot => slot_cells_matching(scene, &universe, r.grid_rows(), None),
        Descriptor::Column(c) if component.category == Category::Slot => slot_cells_matching(scene, &universe, &[], Some(c.grid_cols())),
        d => {
            let rel = d.relation().expect("spatial descriptor");
            let pts: Vec<_> = objs.iter().map(|o| o.position).collect();
            select_index(rel, &pts).map(|i| objs[i].id).into_iter().collect()
        }
    };
    ids.sort_unstable();
    ids
}

fn slot_cells_matching(scene: &Scene, universe: &[u32], rows: &[usize], cols: Option<&[usize]>) -> Vec<u32> {
    scene
        .slot_cells()
        .into_iter()
        .filter(|(o, r, c)| universe.contains(&o.id) && (cols.is_some() || rows.contains(r)) && cols.is_none_or(|cs| cs.contains(c)))
        .map(|(o, _, _)| o.id)
        .collect()
}

/// Resolves one role to its target ids, ascending.
pub fn resolve(scene: &Scene, spec: TargetSpec, role: Role) -> Vec<u32> {
    match spec {
        TargetSpec::Named(c) => denote(scene, &c),
        TargetSpec::Complement(d) => {
            let ex = denote(scene, &d);
            role_universe(scene, role).into_iter().filter(|id| !ex.contains(id)).collect()
        }
        TargetSpec::Any => role_universe(scene, role),
    }
}

/// True iff every component describes at least one object, each role has a
/// candidate, a distractor never overlaps the component it sits beside, and
/// a "the other one" role has something left after removing the distractor.
pub fn check_scene_matches(scene: &Scene, fills: &[Fill]) -> bool {
    if fills.iter().any(|f| denote(scene, &f.component).is_empty()) {
        return false;
    }
    for role in [Role::Pick, Role::Place] {
        if resolve(scene, spec_for(fills, role), role).is_empty() {
            return false;
        }
        let named = fills.iter().find(|f| f.hole == Hole { role, other: false });
        let other = fills.iter().find(|f| f.hole == Hole { role, other: true });
        if let (Some(a), Some(b)) = (named, other) {
            let da = denote(scene, &a.component);
            if denote(scene, &b.component).iter().any(|id| da.contains(id)) {
                return false;
            }
        }
    }
    true
}

/// Pick ids and place ids the instruction allows. Their cross product is the
/// set of successful (object, fixture) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Targets {
    pub pick: Vec<u32>,
    pub place: Vec<u32>,
}

impl Targets {
    pub fn allowed_pairs(&self) -> Vec<(u32, u32)> {
        self.pick.iter().flat_map(|&p| self.place.iter().map(move |&q| (p, q))).collect()
    }

    pub fn allows(&self, pick: u32, place: u32) -> bool {
        self.pick.contains(&pick) && self.place.contains(&place)
    }
}

pub fn extract_targets(scene: &Scene, instruction: &Instruction) -> Targets {
    Targets { pick: resolve(scene, instruction.target_spec(Role::Pick), Role::Pick), place: resolve(scene, instruction.target_spec(Role::Place), Role::Place) }
}

/// Draws a slackness class, a template within it and a component per hole,
/// all uniformly, until the draw is consistent with the scene.
pub fn sample_instruction(task: Task, scene: &Scene, rng: &mut impl Rng, config: &InstructionConfig) -> Result<Instruction, InstructionError> {
    let (picks, places) = component_library(task, config.white_mugs);
    let lib = templates(task);
    for _ in 0..MAX_ATTEMPTS {
        let class = *Slackness::ALL.choose(rng).expect("four classes");
        let members: Vec<usize> = (0..lib.len()).filter(|&i| lib[i].slackness == class).collect();
        let template = *members.choose(rng).expect("every class has templates");
        let mut fills = Vec::new();
        for hole in template_holes(task, lib[template].text)? {
            let pool = match hole.role {
                Role::Pick => &picks,
                Role::Place => &places,
            };
            fills.push(Fill { hole, component: *pool.choose(rng).expect("non-empty library") });
        }
        if check_scene_matches(scene, &fills) {
            return Ok(Instruction::build(scene.seed, task, template, fills));
        }
    }
    Err(InstructionError::NoConsistentInstruction(MAX_ATTEMPTS))
}

/// One line of an instruction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub scene_id: u64,
    pub text: String,
    pub slackness: Slackness,
    pub pick_ids: Vec<u32>,
    pub place_ids: Vec<u32>,
}

impl InstructionRecord {
    pub fn new(instruction: &Instruction, targets: &Targets) -> Self {
        Self {
            scene_id: instruction.scene_id,
            text: instruction.text.clone(),
            slackness: instruction.slackness,
            pick_ids: targets.pick.clone(),
            place_ids: targets.place.clone(),
        }
    }
}

pub fn to_jsonl(records: &[InstructionRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
}

#[cfg(test)]
mod tests;
