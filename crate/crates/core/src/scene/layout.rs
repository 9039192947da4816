//! Fixed tabletop geometry.
//!
//! World frame: +x right, +y away from the robot, +z up; the robot base sits
//! at the origin. Object positions are the centers of their rendered bodies
//! (slot and pad positions are the centers of their floor patches).
//!
//! Distances between instances of one category are kept above that task's
//! clustering radius so noise-free detection separates them exactly.

use super::Category;
use crate::geom::Point3;

/// Loose objects stay inside `[-WORKSPACE, WORKSPACE]²`.
pub const WORKSPACE: f64 = 0.4;
pub const MIN_EE_Z: f64 = 0.0;
pub const MAX_EE_Z: f64 = 0.45;

pub const SLOT_ROWS: usize = 3;
pub const SLOT_COLS: usize = 4;
pub const SLOT_PITCH_X: f64 = 0.15;
pub const SLOT_PITCH_Y: f64 = 0.14;
pub const SLOT_FRONT_Y: f64 = 0.06;
pub const SLOT_HALF: f64 = 0.015;
pub const CRATE_HALF_X: f64 = 0.3;
/// The crate sits off-center so no two slots are equidistant from the origin.
pub const CRATE_CENTER_X: f64 = 0.05;
pub const CRATE_MIN_Y: f64 = 0.0;
pub const CRATE_MAX_Y: f64 = 0.40;
pub const CRATE_WALL_H: f64 = 0.05;

pub const BATTERY_HALF: [f64; 3] = [0.01, 0.01, 0.025];
/// Loose battery centers are drawn from this box.
pub const BATTERY_X: (f64, f64) = (-0.3, 0.3);
pub const BATTERY_Y: (f64, f64) = (-0.32, -0.1);
pub const BATTERY_SPACING: f64 = 0.15;
/// Loose objects also differ by at least this much in x, in y and in distance
/// from the origin, so extremal descriptors never hinge on a near tie.
pub const DESCRIPTOR_MARGIN: f64 = 0.02;

pub const PAD_X: (f64, f64) = (-0.36, 0.36);
pub const PAD_Y: (f64, f64) = (-0.38, -0.05);

pub const TREE_BASE: Point3 = Point3::new(0.0, 0.22, 0.0);
pub const TREE_HEIGHT: f64 = 0.36;
pub const TREE_RADIUS: f64 = 0.01;
pub const BRANCH_INNER: f64 = 0.11;
pub const BRANCH_OUTER: f64 = 0.19;
pub const BRANCH_RADIUS: f64 = 0.006;
/// Branch directions (unit xy) and heights: left-top, right-top, right-middle, back.
pub const BRANCHES: [([f64; 2], f64); 4] = [([-1.0, 0.0], 0.32), ([1.0, 0.0], 0.32), ([1.0, 0.0], 0.14), ([0.0, 1.0], 0.23)];
/// A hung mug rests this far below its branch.
pub const HANG_DROP: f64 = 0.05;

pub const MUG_RADIUS: f64 = 0.04;
pub const MUG_HEIGHT: f64 = 0.09;
pub const MUG_HANDLE_REACH: f64 = 0.025;
pub const MUG_X: (f64, f64) = (-0.3, 0.3);
pub const MUG_Y: (f64, f64) = (-0.3, -0.12);
pub const MUG_SPACING: f64 = 0.30;
/// Handle yaw range (radians).
pub const MUG_YAW: f64 = std::f64::consts::PI / 6.0;

/// Resting center heights on the table.
pub fn rest_z(category: Category) -> f64 {
    match category {
        Category::Battery => BATTERY_HALF[2],
        Category::Mug => MUG_HEIGHT / 2.0,
        _ => 0.0,
    }
}

pub fn slot_center(row: usize, col: usize) -> Point3 {
    let x0 = CRATE_CENTER_X - SLOT_PITCH_X * (SLOT_COLS as f64 - 1.0) / 2.0;
    Point3::new(x0 + SLOT_PITCH_X * col as f64, SLOT_FRONT_Y + SLOT_PITCH_Y * row as f64, 0.0)
}

pub fn branch_center(i: usize) -> Point3 {
    let (dir, z) = BRANCHES[i];
    let r = (BRANCH_INNER + BRANCH_OUTER) / 2.0;
    Point3::new(TREE_BASE.x + dir[0] * r, TREE_BASE.y + dir[1] * r, z)
}

/// Where a mug hung on the branch at `branch` comes to rest.
pub fn hang_point(branch: Point3) -> Point3 {
    Point3::new(branch.x, branch.y, branch.z - HANG_DROP)
}

pub fn in_workspace(p: Point3) -> bool {
    p.x.abs() <= WORKSPACE && p.y.abs() <= WORKSPACE && p.z >= MIN_EE_Z && p.z <= MAX_EE_Z
}
