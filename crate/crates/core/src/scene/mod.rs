//! Ground-truth tabletop scenes for the two tasks, the synthetic feature
//! renderer that turns them into labelled feature clouds, a kinematic
//! snap-grasp environment, scripted demonstrations and the task rewards.

mod demo;
mod env;
mod gen;
mod io;
pub mod layout;
mod render;
mod reward;

pub use demo::{scripted_demo, Demo};
pub use env::{step_env, Action, EnvConfig, EnvState, Grip, ObjectPose, World};
pub use gen::{gen_scene, OccupancySpec, SceneConfig};
pub use io::{read_feature_cloud, read_scene_json, scene_to_json, write_feature_cloud, FCD_MAGIC};
pub use render::{render_feature_cloud, render_items, render_state, FeatureCloud, ReferenceBank, ReferenceFeature, RenderConfig, RenderItem};
pub use reward::{reward, reward_hang_mug, reward_pack_battery, HangThresholds, PackThresholds};

use crate::geom::Point3;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SceneError {
    #[error("placement failure after {0} rejection attempts")]
    PlacementFailure(usize),
    #[error("invalid scene config: {0}")]
    InvalidConfig(String),
    #[error("object {0} is not graspable")]
    NotGraspable(u32),
    #[error("object {0} is not a valid place target")]
    InvalidPlaceTarget(u32),
    #[error("unreachable target: object {0} lies outside the workspace")]
    UnreachableTarget(u32),
    #[error("unknown object id {0}")]
    UnknownObject(u32),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    PackBattery,
    HangMug,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::PackBattery, Task::HangMug];

    pub fn name(self) -> &'static str {
        match self {
            Task::PackBattery => "pack_battery",
            Task::HangMug => "hang_mug",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "pack_battery" => Some(Task::PackBattery),
            "hang_mug" => Some(Task::HangMug),
            _ => None,
        }
    }

    /// Object category picked up in this task.
    pub fn pick_category(self) -> Category {
        match self {
            Task::PackBattery => Category::Battery,
            Task::HangMug => Category::Mug,
        }
    }

    /// Fixture category objects are placed on.
    pub fn place_category(self) -> Category {
        match self {
            Task::PackBattery => Category::Slot,
            Task::HangMug => Category::Branch,
        }
    }

    /// DBSCAN radius used when detecting instances for this task.
    pub fn cluster_eps(self) -> f64 {
        match self {
            Task::PackBattery => 0.1,
            Task::HangMug => 0.15,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Battery,
    Slot,
    Mug,
    Branch,
    Crate,
    Tree,
    Pad,
}

impl Category {
    pub const ALL: [Category; 7] = [Category::Battery, Category::Slot, Category::Mug, Category::Branch, Category::Crate, Category::Tree, Category::Pad];

    pub fn index(self) -> usize {
        Category::ALL.iter().position(|&c| c == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Category::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Battery => "battery",
            Category::Slot => "slot",
            Category::Mug => "mug",
            Category::Branch => "branch",
            Category::Crate => "crate",
            Category::Tree => "tree",
            Category::Pad => "pad",
        }
    }

    pub fn graspable(self) -> bool {
        matches!(self, Category::Battery | Category::Mug)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    White,
    None,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::White => "white",
            Color::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Color> {
        match s {
            "red" => Some(Color::Red),
            "green" => Some(Color::Green),
            "blue" => Some(Color::Blue),
            "white" => Some(Color::White),
            "none" => Some(Color::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    pub category: Category,
    pub color: Color,
    #[serde(with = "io::point_array")]
    pub position: Point3,
    pub yaw: f64,
}

impl SceneObject {
    /// Loose objects can be grasped; slots, branches and the rest are fixtures.
    pub fn graspable(&self) -> bool {
        self.category.graspable()
    }
}

/// Crate occupancy, row-major with row 0 the front (smallest y) row and
/// column 0 the left (smallest x) column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotGrid {
    pub rows: usize,
    pub cols: usize,
    pub occupied: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub task: Task,
    pub seed: u64,
    pub objects: Vec<SceneObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_grid: Option<SlotGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_count: Option<usize>,
}

impl Scene {
    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn of_category(&self, c: Category) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(move |o| o.category == c)
    }

    /// Slot objects with their (row, col) cell; slots are stored row-major.
    pub fn slot_cells(&self) -> Vec<(&SceneObject, usize, usize)> {
        let cols = self.slot_grid.as_ref().map_or(1, |g| g.cols);
        self.of_category(Category::Slot).enumerate().map(|(i, o)| (o, i / cols, i % cols)).collect()
    }

    pub fn slot_occupied(&self, slot_id: u32) -> bool {
        let Some(grid) = &self.slot_grid else { return false };
        self.of_category(Category::Slot).position(|o| o.id == slot_id).is_some_and(|i| grid.occupied.get(i).copied().unwrap_or(false))
    }

    /// Objects of the pick category.
    pub fn pick_candidates(&self) -> Vec<&SceneObject> {
        self.of_category(self.task.pick_category()).collect()
    }

    /// Place fixtures that are free at the start of the episode.
    pub fn vacant_targets(&self) -> Vec<&SceneObject> {
        self.of_category(self.task.place_category()).filter(|o| !self.slot_occupied(o.id)).collect()
    }
}
