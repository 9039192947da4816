//! Binary task rewards over (object, fixture) pairs.

use super::env::{EnvState, World};
use super::{Scene, Task};
use serde::{Deserialize, Serialize};

/// Strict bounds: a battery counts only when strictly inside all three.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackThresholds {
    pub horizontal: f64,
    pub up_dot: f64,
    pub height: f64,
}

impl Default for PackThresholds {
    fn default() -> Self {
        Self { horizontal: 0.03, up_dot: 0.99, height: 0.009 }
    }
}

/// Closed bounds on the mug position relative to its branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HangThresholds {
    pub x: f64,
    pub below: f64,
    pub above: f64,
}

impl Default for HangThresholds {
    fn default() -> Self {
        Self { x: 0.05, below: 0.1, above: 0.0 }
    }
}

pub fn reward(world: &World, state: &EnvState, allowed: &[(u32, u32)]) -> f64 {
    match world.scene.task {
        Task::PackBattery => reward_pack_battery(&world.scene, state, allowed, &PackThresholds::default()),
        Task::HangMug => reward_hang_mug(&world.scene, state, allowed, &HangThresholds::default()),
    }
}

fn success(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// 1.0 iff some allowed (battery, slot) pair has the resting battery within
/// all thresholds. A battery still in the gripper never counts.
pub fn reward_pack_battery(scene: &Scene, state: &EnvState, allowed: &[(u32, u32)], th: &PackThresholds) -> f64 {
    success(allowed.iter().any(|&(obj, slot)| {
        let (Some(p), Some(s)) = (state.pose(obj), scene.object(slot)) else { return false };
        if state.held == Some(obj) {
            return false;
        }
        p.position.dist_xy(s.position) < th.horizontal && p.up[2] > th.up_dot && p.position.z - s.position.z < th.height
    }))
}

/// 1.0 iff some allowed (mug, branch) pair has the mug within `x` of the
/// branch along X and between `below` under and `above` over its height.
pub fn reward_hang_mug(scene: &Scene, state: &EnvState, allowed: &[(u32, u32)], th: &HangThresholds) -> f64 {
    success(allowed.iter().any(|&(obj, branch)| {
        let (Some(p), Some(b)) = (state.pose(obj), scene.object(branch)) else { return false };
        if state.held == Some(obj) {
            return false;
        }
        let z = p.position.z;
        (p.position.x - b.position.x).abs() <= th.x && z >= b.position.z - th.below && z <= b.position.z + th.above
    }))
}
