//! Scripted pick-and-place demonstrations.

use super::env::{Action, EnvConfig};
use super::layout::*;
use super::{Scene, SceneError, Task};
use crate::geom::Point3;
use serde::{Deserialize, Serialize};

/// Largest end-effector displacement per frame in a scripted demo.
pub const DEMO_STEP: f64 = 0.04;
/// Frames the gripper holds still while closing or opening.
const GRIP_DWELL: usize = 2;
const HOVER: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demo {
    pub pick_id: u32,
    pub place_id: u32,
    /// One action per frame, starting from the home pose.
    pub actions: Vec<Action>,
}

impl Demo {
    /// Splits the action stream into fixed-horizon chunks; the tail chunk is
    /// padded by repeating the last action.
    pub fn chunks(&self, horizon: usize) -> Vec<Vec<Action>> {
        assert!(horizon > 0);
        self.actions
            .chunks(horizon)
            .map(|c| {
                let mut v = c.to_vec();
                let last = *v.last().expect("non-empty chunk");
                v.resize(horizon, last);
                v
            })
            .collect()
    }
}

/// Point where the gripper releases the picked object over `place`.
pub fn release_point(task: Task, place: Point3) -> Point3 {
    match task {
        Task::PackBattery => Point3::new(place.x, place.y, place.z + rest_z(super::Category::Battery) + 0.005),
        Task::HangMug => hang_point(place),
    }
}

pub fn scripted_demo(scene: &Scene, pick_id: u32, place_id: u32) -> Result<Demo, SceneError> {
    scripted_demo_from(scene, pick_id, place_id, EnvConfig::default().home)
}

/// Waypoint script approach, grasp, lift, transfer, place, release, retreat,
/// linearly interpolated so no frame moves further than [`DEMO_STEP`].
pub fn scripted_demo_from(scene: &Scene, pick_id: u32, place_id: u32, start: Point3) -> Result<Demo, SceneError> {
    let pick = scene.object(pick_id).ok_or(SceneError::UnknownObject(pick_id))?;
    let place = scene.object(place_id).ok_or(SceneError::UnknownObject(place_id))?;
    if !pick.graspable() {
        return Err(SceneError::NotGraspable(pick_id));
    }
    if place.category != scene.task.place_category() || scene.slot_occupied(place_id) {
        return Err(SceneError::InvalidPlaceTarget(place_id));
    }
    for o in [pick, place] {
        if !in_workspace(o.position) {
            return Err(SceneError::UnreachableTarget(o.id));
        }
    }
    let hover = |p: Point3| Point3::new(p.x, p.y, (p.z + HOVER).min(MAX_EE_Z));
    let grasp = pick.position;
    let release = release_point(scene.task, place.position);
    let above_place = Point3::new(release.x, release.y, (place.position.z + HOVER).min(MAX_EE_Z));

    let mut actions = Vec::new();
    let mut at = start;
    let mut go = |actions: &mut Vec<Action>, to: Point3, closed: bool| {
        let n = ((to - at).norm() / DEMO_STEP).ceil().max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            actions.push(Action::new(at + (to - at) * t, closed));
        }
        at = to;
    };
    go(&mut actions, hover(grasp), false);
    go(&mut actions, grasp, false);
    for _ in 0..GRIP_DWELL {
        go(&mut actions, grasp, true);
    }
    go(&mut actions, hover(grasp), true);
    go(&mut actions, above_place, true);
    go(&mut actions, release, true);
    for _ in 0..GRIP_DWELL {
        go(&mut actions, release, false);
    }
    go(&mut actions, above_place, false);
    Ok(Demo { pick_id, place_id, actions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{gen_scene, reward, step_env, Category, SceneConfig, World};

    fn replay(world: &World, demo: &Demo) -> f64 {
        let mut s = world.initial_state();
        for a in &demo.actions {
            s = step_env(world, &s, a);
        }
        assert!(s.frame <= world.config.max_frames);
        reward(world, &s, &[(demo.pick_id, demo.place_id)])
    }

    #[test]
    fn battery_example_succeeds() {
        let mut scene = gen_scene(Task::PackBattery, 0, &SceneConfig::ambiguity_cell(1, 12)).unwrap();
        let b = scene.pick_candidates()[0].id;
        scene.objects.iter_mut().find(|o| o.id == b).unwrap().position = Point3::new(0.1, -0.2, rest_z(Category::Battery));
        let slot = scene
            .of_category(Category::Slot)
            .min_by(|a, c| a.position.dist_xy(Point3::new(0.05, 0.1, 0.0)).total_cmp(&c.position.dist_xy(Point3::new(0.05, 0.1, 0.0))))
            .unwrap()
            .id;
        let demo = scripted_demo(&scene, b, slot).unwrap();
        assert_eq!(replay(&World::new(scene), &demo), 1.0);
    }

    #[test]
    fn picking_a_fixture_fails() {
        let scene = gen_scene(Task::PackBattery, 0, &SceneConfig::default()).unwrap();
        let slot = scene.of_category(Category::Slot).next().unwrap().id;
        assert_eq!(scripted_demo(&scene, slot, slot), Err(SceneError::NotGraspable(slot)));
    }

    #[test]
    fn out_of_workspace_is_unreachable() {
        let mut scene = gen_scene(Task::HangMug, 0, &SceneConfig::default()).unwrap();
        let m = scene.pick_candidates()[0].id;
        let br = scene.vacant_targets()[0].id;
        scene.objects.iter_mut().find(|o| o.id == m).unwrap().position.x = 0.6;
        assert_eq!(scripted_demo(&scene, m, br), Err(SceneError::UnreachableTarget(m)));
    }

    #[test]
    fn demos_replay_successfully_on_random_scenes() {
        for seed in 0..20 {
            for task in Task::ALL {
                let scene = gen_scene(task, seed, &SceneConfig::default()).unwrap();
                let picks = scene.pick_candidates();
                let places = scene.vacant_targets();
                let p = picks[seed as usize % picks.len()].id;
                let q = places[seed as usize % places.len()].id;
                let demo = scripted_demo(&scene, p, q).unwrap();
                assert!(demo.actions.len() <= 240);
                assert_eq!(replay(&World::new(scene), &demo), 1.0, "{task} seed {seed}");
            }
        }
    }

    #[test]
    fn chunks_pad_with_last_action() {
        let scene = gen_scene(Task::HangMug, 3, &SceneConfig::default()).unwrap();
        let d = scripted_demo(&scene, scene.pick_candidates()[0].id, scene.vacant_targets()[0].id).unwrap();
        let chunks = d.chunks(16);
        assert_eq!(chunks.len(), d.actions.len().div_ceil(16));
        assert!(chunks.iter().all(|c| c.len() == 16));
        assert_eq!(*chunks.last().unwrap().last().unwrap(), *d.actions.last().unwrap());
    }
}
