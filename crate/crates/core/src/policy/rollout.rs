//! Receding-horizon execution and failure staging.

use super::observe::observe;
use super::{sample_actions, NoiseSchedule, TrainedPolicy};
use crate::rng::{stream, Rng as StreamRng};
use crate::scene::{reward, step_env, Action, Demo, EnvState, World};
use serde::{Deserialize, Serialize};

/// Anything that proposes the next few actions from the current state.
pub trait Policy {
    fn plan(&mut self, world: &World, state: &EnvState, attended: &[u32]) -> Vec<Action>;
}

/// Replays a scripted demonstration frame by frame.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    pub demo: Demo,
}

impl Policy for ScriptedPolicy {
    fn plan(&mut self, _: &World, state: &EnvState, _: &[u32]) -> Vec<Action> {
        let t = state.frame as usize;
        match self.demo.actions.get(t..) {
            Some(rest) if !rest.is_empty() => rest.to_vec(),
            _ => self.demo.actions.last().copied().into_iter().collect(),
        }
    }
}

/// Always commands the origin with the gripper open.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn plan(&mut self, _: &World, _: &EnvState, _: &[u32]) -> Vec<Action> {
        vec![Action { x: 0.0, y: 0.0, z: 0.0, grip: 0.0 }]
    }
}

pub struct DiffusionPolicy<'a> {
    pub policy: &'a TrainedPolicy,
    schedule: NoiseSchedule,
    rng: StreamRng,
    pub sigma_scale: f64,
}

impl<'a> DiffusionPolicy<'a> {
    pub fn new(policy: &'a TrainedPolicy, seed: u64) -> Self {
        Self { policy, schedule: policy.schedule(), rng: stream(seed, &["policy", "sample"]), sigma_scale: policy.config.sample_sigma }
    }
}

impl Policy for DiffusionPolicy<'_> {
    fn plan(&mut self, world: &World, state: &EnvState, attended: &[u32]) -> Vec<Action> {
        let p = self.policy;
        let obs = observe(world, state, attended, &p.config.observation);
        let a = sample_actions(&p.net, &obs, &self.schedule, self.sigma_scale, &mut self.rng);
        let raw = p.normalizer.denormalize(&a);
        raw.chunks(p.config.net.action_dim).map(|c| Action { x: c[0], y: c[1], z: c[2], grip: c[3] }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutFailure {
    /// A grasp was attempted but no allowed object was ever held.
    Pick,
    /// An allowed object was held but never placed.
    Place,
    /// The gripper never closed.
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    pub max_frames: u32,
    pub replan_every: usize,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self { max_frames: 240, replan_every: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutResult {
    pub success: bool,
    pub frames: u32,
    pub failure: Option<RolloutFailure>,
}

/// Runs `policy` until the task reward over `allowed` fires or the frame
/// limit is hit. `attended` is what the policy conditions on.
pub fn rollout(policy: &mut dyn Policy, world: &World, attended: &[u32], allowed: &[(u32, u32)], config: &RolloutConfig) -> RolloutResult {
    let limit = config.max_frames.min(world.config.max_frames);
    let mut state = world.initial_state();
    let (mut tried_grasp, mut held_allowed) = (false, false);
    while state.frame < limit {
        let chunk = policy.plan(world, &state, attended);
        if chunk.is_empty() {
            break;
        }
        for a in chunk.iter().take(config.replan_every.max(1)) {
            tried_grasp |= a.closed();
            state = step_env(world, &state, a);
            held_allowed |= state.held.is_some_and(|h| allowed.iter().any(|&(p, _)| p == h));
            if reward(world, &state, allowed) == 1.0 {
                return RolloutResult { success: true, frames: state.frame, failure: None };
            }
            if state.frame >= limit {
                break;
            }
        }
    }
    let failure = if !tried_grasp {
        RolloutFailure::Timeout
    } else if !held_allowed {
        RolloutFailure::Pick
    } else {
        RolloutFailure::Place
    };
    RolloutResult { success: false, frames: state.frame, failure: Some(failure) }
}
