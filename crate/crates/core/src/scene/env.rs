//! Kinematic snap-grasp world. The end effector teleports to each commanded
//! position; closing the gripper attaches the nearest loose object within the
//! grasp radius, opening it either seats the object on a nearby free fixture
//! or drops it onto the table.

use super::layout::*;
use super::{Category, Scene, Task};
use crate::geom::Point3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grip {
    Open,
    Closed,
}

/// One commanded end-effector waypoint. `grip >= 0.5` means closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub grip: f64,
}

impl Action {
    pub fn new(p: Point3, closed: bool) -> Self {
        Self { x: p.x, y: p.y, z: p.z, grip: if closed { 1.0 } else { 0.0 } }
    }

    pub fn position(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn closed(&self) -> bool {
        self.grip >= 0.5
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.grip]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { x: a[0], y: a[1], z: a[2], grip: a[3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub max_frames: u32,
    pub grasp_radius: f64,
    /// Release within this XY distance of a free slot seats the battery.
    pub slot_snap_xy: f64,
    /// ...provided the battery is at most this high above the slot.
    pub slot_snap_height: f64,
    pub hang_snap_xy: f64,
    pub home: Point3,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { max_frames: 240, grasp_radius: 0.05, slot_snap_xy: 0.06, slot_snap_height: 0.05, hang_snap_xy: 0.06, home: Point3::new(0.0, -0.05, 0.25) }
    }
}

/// Static part of an episode: the scene's fixtures and the rules.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub scene: Scene,
    pub config: EnvConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectPose {
    pub id: u32,
    pub category: Category,
    pub position: Point3,
    pub yaw: f64,
    /// Object up axis in the world frame.
    pub up: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    /// Poses of the loose objects.
    pub objects: Vec<ObjectPose>,
    pub ee: Point3,
    pub grip: Grip,
    pub held: Option<u32>,
    pub frame: u32,
    /// (object id, fixture id) of objects seated during the episode.
    pub placements: Vec<(u32, u32)>,
}

impl EnvState {
    pub fn pose(&self, id: u32) -> Option<&ObjectPose> {
        self.objects.iter().find(|o| o.id == id)
    }

    fn pose_mut(&mut self, id: u32) -> Option<&mut ObjectPose> {
        self.objects.iter_mut().find(|o| o.id == id)
    }
}

impl World {
    pub fn new(scene: Scene) -> Self {
        Self { scene, config: EnvConfig::default() }
    }

    pub fn with_config(scene: Scene, config: EnvConfig) -> Self {
        Self { scene, config }
    }

    pub fn initial_state(&self) -> EnvState {
        let objects = self
            .scene
            .objects
            .iter()
            .filter(|o| o.graspable())
            .map(|o| ObjectPose { id: o.id, category: o.category, position: o.position, yaw: o.yaw, up: [0.0, 0.0, 1.0] })
            .collect();
        EnvState { objects, ee: self.config.home, grip: Grip::Open, held: None, frame: 0, placements: Vec::new() }
    }

    fn fixture_free(&self, state: &EnvState, fixture: u32) -> bool {
        !self.scene.slot_occupied(fixture) && !state.placements.iter().any(|&(_, f)| f == fixture)
    }

    /// Where a released object ends up: seated on a fixture or on the table.
    fn settle(&self, state: &mut EnvState, id: u32) {
        let Some(pose) = state.pose(id).cloned() else { return };
        let cfg = &self.config;
        let seat = match self.scene.task {
            Task::PackBattery => self
                .scene
                .of_category(Category::Slot)
                .filter(|s| self.fixture_free(state, s.id))
                .filter(|s| {
                    let h = pose.position.z - s.position.z;
                    pose.position.dist_xy(s.position) < cfg.slot_snap_xy && h < cfg.slot_snap_height && h > -cfg.slot_snap_height
                })
                .min_by(|a, b| pose.position.dist_xy(a.position).total_cmp(&pose.position.dist_xy(b.position)))
                .map(|s| (s.id, s.position)),
            Task::HangMug => self
                .scene
                .of_category(Category::Branch)
                .filter(|b| self.fixture_free(state, b.id))
                .filter(|b| {
                    let z = pose.position.z;
                    pose.position.dist_xy(b.position) < cfg.hang_snap_xy && z >= b.position.z - 0.1 && z <= b.position.z + 0.02
                })
                .min_by(|a, b| pose.position.dist_xy(a.position).total_cmp(&pose.position.dist_xy(b.position)))
                .map(|b| (b.id, hang_point(b.position))),
        };
        let p = state.pose_mut(id).expect("pose exists");
        match seat {
            Some((fixture, at)) => {
                p.position = at;
                p.up = [0.0, 0.0, 1.0];
                p.yaw = 0.0;
                state.placements.push((id, fixture));
            }
            None => {
                p.position.z = rest_z(p.category);
            }
        }
    }
}

/// Advances the world by one frame. A state already at the frame limit is
/// returned unchanged.
pub fn step_env(world: &World, state: &EnvState, action: &Action) -> EnvState {
    let mut next = state.clone();
    if state.frame >= world.config.max_frames {
        return next;
    }
    next.ee = Point3::new(action.x.clamp(-WORKSPACE, WORKSPACE), action.y.clamp(-WORKSPACE, WORKSPACE), action.z.clamp(MIN_EE_Z, MAX_EE_Z));
    if !action.x.is_finite() || !action.y.is_finite() || !action.z.is_finite() {
        next.ee = state.ee;
    }
    if let Some(id) = next.held {
        let ee = next.ee;
        if let Some(p) = next.pose_mut(id) {
            p.position = ee;
        }
    }
    match (action.closed(), state.grip) {
        (true, Grip::Open) => {
            next.grip = Grip::Closed;
            let ee = next.ee;
            let r = world.config.grasp_radius;
            let target =
                next.objects.iter().filter(|o| o.position.dist(ee) <= r).min_by(|a, b| a.position.dist(ee).total_cmp(&b.position.dist(ee))).map(|o| o.id);
            if let Some(id) = target {
                next.held = Some(id);
                next.placements.retain(|&(o, _)| o != id);
                let p = next.pose_mut(id).expect("pose exists");
                p.position = ee;
                p.up = [0.0, 0.0, 1.0];
            }
        }
        (false, Grip::Closed) => {
            next.grip = Grip::Open;
            if let Some(id) = next.held.take() {
                world.settle(&mut next, id);
            }
        }
        _ => {}
    }
    next.frame += 1;
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{gen_scene, SceneConfig};

    fn world() -> World {
        World::new(gen_scene(Task::PackBattery, 5, &SceneConfig::ambiguity_cell(1, 12)).unwrap())
    }

    #[test]
    fn grasp_outside_radius_fails() {
        let w = world();
        let s = w.initial_state();
        let b = s.objects[0].position;
        let next = step_env(&w, &s, &Action::new(b + Point3::new(0.06, 0.0, 0.0), true));
        assert_eq!(next.held, None);
        assert_eq!(next.grip, Grip::Closed);
    }

    #[test]
    fn grasp_at_position_succeeds_and_object_follows() {
        let w = world();
        let s = w.initial_state();
        let b = s.objects[0].clone();
        let held = step_env(&w, &s, &Action::new(b.position, true));
        assert_eq!(held.held, Some(b.id));
        let moved = step_env(&w, &held, &Action::new(Point3::new(0.1, 0.1, 0.3), true));
        assert_eq!(moved.pose(b.id).unwrap().position, Point3::new(0.1, 0.1, 0.3));
    }

    #[test]
    fn release_over_slot_seats_battery() {
        let w = world();
        let s = w.initial_state();
        let b = s.objects[0].id;
        let slot = w.scene.of_category(Category::Slot).next().unwrap().clone();
        let s = step_env(&w, &s, &Action::new(s.objects[0].position, true));
        let s = step_env(&w, &s, &Action::new(slot.position + Point3::new(0.01, 0.0, 0.02), true));
        let s = step_env(&w, &s, &Action::new(slot.position + Point3::new(0.01, 0.0, 0.02), false));
        let pose = s.pose(b).unwrap();
        assert_eq!(pose.position, slot.position);
        assert_eq!(pose.up, [0.0, 0.0, 1.0]);
        assert_eq!(s.placements, vec![(b, slot.id)]);
    }

    #[test]
    fn release_elsewhere_drops_to_table() {
        let w = world();
        let s = w.initial_state();
        let b = s.objects[0].id;
        let s = step_env(&w, &s, &Action::new(s.objects[0].position, true));
        let s = step_env(&w, &s, &Action::new(Point3::new(-0.35, -0.35, 0.3), true));
        let s = step_env(&w, &s, &Action::new(Point3::new(-0.35, -0.35, 0.3), false));
        assert_eq!(s.pose(b).unwrap().position, Point3::new(-0.35, -0.35, BATTERY_HALF[2]));
        assert!(s.placements.is_empty());
    }

    #[test]
    fn ee_is_clamped_and_frame_limit_respected() {
        let w = world();
        let mut s = w.initial_state();
        s = step_env(&w, &s, &Action { x: 3.0, y: -3.0, z: 9.0, grip: 0.0 });
        assert_eq!(s.ee, Point3::new(WORKSPACE, -WORKSPACE, MAX_EE_Z));
        s.frame = w.config.max_frames;
        let t = step_env(&w, &s, &Action::new(Point3::ORIGIN, false));
        assert_eq!(t, s);
    }
}
