//! Policy observations rendered from environment states.
//!
//! The cloud is a sparse noise-free render of the current poses, sampled with
//! a fixed per-episode seed so surface points move rigidly with their objects.
//! Each point carries its position, the attention channel and the semantic
//! feature of its object. Attention follows the attended object ids from
//! frame to frame.

use super::net::{Observation, FEATURE_DIM, POINT_DIM};
use crate::grounding::{camera_rig, project_attention_2d, AttentionMap};
use crate::scene::{render_state, EnvState, FeatureCloud, Grip, RenderConfig, World};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coordinates are divided by this before entering the network.
pub const POSITION_SCALE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Attention as a fourth per-point channel.
    Attn3d,
    /// Attention masks multiplied into low-resolution camera images.
    Attn2d,
    /// No conditioning.
    None,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Attn3d, Variant::Attn2d, Variant::None];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Attn3d => "attn3d",
            Variant::Attn2d => "attn2d",
            Variant::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Attention-conditioned variants are scored on the attended pair only.
    pub fn conditioned(self) -> bool {
        self != Variant::None
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationConfig {
    pub variant: Variant,
    pub points_per_object: usize,
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
    pub dilation: usize,
    /// Channel value of attended points (others get 0).
    pub attention_value: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self { variant: Variant::Attn3d, points_per_object: 6, image_width: 16, image_height: 12, focal: 14.0, dilation: 1, attention_value: 1.0 }
    }
}

impl ObservationConfig {
    pub fn for_variant(variant: Variant) -> Self {
        Self { variant, ..Self::default() }
    }

    /// Flattened image length fed to the network (0 unless 2D attention).
    pub fn image_dim(&self) -> usize {
        match self.variant {
            Variant::Attn2d => 5 * self.image_width * self.image_height,
            _ => 0,
        }
    }
}

pub fn proprio(state: &EnvState) -> [f64; 4] {
    let e = state.ee;
    let g = if state.grip == Grip::Closed { 1.0 } else { -1.0 };
    [e.x / POSITION_SCALE, e.y / POSITION_SCALE, e.z / POSITION_SCALE, g]
}

pub fn observe(world: &World, state: &EnvState, attended: &[u32], config: &ObservationConfig) -> Observation {
    let render = RenderConfig { points_per_object: config.points_per_object, max_points: usize::MAX, feature_dim: FEATURE_DIM, ..RenderConfig::default() };
    let cloud = render_state(world, state, 0.0, world.scene.seed, &render);
    let map = AttentionMap::from_indices(cloud.len(), cloud.indices_of(attended));
    let channel = config.variant == Variant::Attn3d;
    let points: Vec<[f64; POINT_DIM]> = cloud
        .points
        .iter()
        .zip(&map.values)
        .enumerate()
        .map(|(i, (p, &a))| {
            let s = *p * (1.0 / POSITION_SCALE);
            let mut row = [0.0; POINT_DIM];
            row[..4].copy_from_slice(&[s.x, s.y, s.z, if channel && a { config.attention_value } else { 0.0 }]);
            row[4..].copy_from_slice(cloud.feature(i));
            row
        })
        .collect();
    let image = if config.variant == Variant::Attn2d { masked_images(&cloud, &map, config) } else { Vec::new() };
    Observation { points, image, proprio: proprio(state) }
}

/// Height images of the cloud (1 + scaled height of the nearest point, 0 where
/// nothing projects) multiplied by the dilated attention masks.
fn masked_images(cloud: &FeatureCloud, map: &AttentionMap, config: &ObservationConfig) -> Vec<f64> {
    let cams = camera_rig(config.image_width, config.image_height, config.focal).expect("valid camera rig");
    let masks = project_attention_2d(map, cloud, &cams, config.dilation);
    let mut out = Vec::with_capacity(config.image_dim());
    for (cam, mask) in cams.iter().zip(&masks) {
        let n = cam.width * cam.height;
        let mut depth = vec![f64::INFINITY; n];
        let mut value = vec![0.0; n];
        for p in &cloud.points {
            let pr = cam.project_point(*p);
            if pr.visible {
                let i = pr.v.floor() as usize * cam.width + pr.u.floor() as usize;
                if pr.depth < depth[i] {
                    depth[i] = pr.depth;
                    value[i] = 1.0 + p.z / POSITION_SCALE;
                }
            }
        }
        out.extend(value.iter().zip(&mask.values).map(|(&v, &m)| if m { v } else { 0.0 }));
    }
    out
}
