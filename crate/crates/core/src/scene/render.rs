//! Synthetic semantic-feature oracle.
//!
//! Each object surface is sampled uniformly, the union is downsampled with
//! farthest point sampling, and every point gets the reference vector of its
//! rendered category perturbed by isotropic Gaussian noise and renormalized.

use super::env::{EnvState, World};
use super::layout::*;
use super::{Category, Scene};
use crate::geom::{fps_downsample, Point3};
use crate::rng::stream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub points_per_object: usize,
    pub max_points: usize,
    pub feature_dim: usize,
    /// Seeds the random rotation that produces the category references.
    pub reference_seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { points_per_object: 300, max_points: 8000, feature_dim: 16, reference_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFeature {
    pub category: Category,
    pub vector: Vec<f64>,
}

/// Mutually orthogonal unit references, one per category: the standard
/// basis rotated by a seeded random orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBank {
    pub dim: usize,
    pub refs: Vec<ReferenceFeature>,
}

impl ReferenceBank {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= Category::ALL.len(), "feature dimension too small for the category set");
        let mut rng = stream(seed, &["references"]);
        // Gram-Schmidt on Gaussian columns yields a Haar-random orthogonal basis.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
        while basis.len() < Category::ALL.len() {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            for b in &basis {
                let d = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let n = dot(&v, &v).sqrt();
            if n < 1e-6 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
        let refs = Category::ALL.iter().zip(basis).map(|(&category, vector)| ReferenceFeature { category, vector }).collect();
        Self { dim, refs }
    }

    pub fn get(&self, c: Category) -> &ReferenceFeature {
        &self.refs[c.index()]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Points, per-point unit features and ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCloud {
    pub points: Vec<Point3>,
    pub feature_dim: usize,
    /// Row-major `len × feature_dim`.
    pub features: Vec<f64>,
    pub gt_instance: Vec<i32>,
    pub gt_category: Vec<Category>,
}

impl FeatureCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Indices of points owned by any of `ids`.
    pub fn indices_of(&self, ids: &[u32]) -> Vec<usize> {
        (0..self.len()).filter(|&i| ids.iter().any(|&id| self.gt_instance[i] == id as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box { half: [f64; 3] },
    Patch { half_x: f64, half_y: f64 },
    Rim { half_x: f64, half_y: f64, height: f64 },
    Mug,
    Branch { dir: [f64; 2] },
    Trunk,
}

/// One renderable body: an object id, the category its points are labelled
/// with and its pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderItem {
    pub id: u32,
    pub category: Category,
    pub shape: Shape,
    pub position: Point3,
    pub yaw: f64,
}

fn shape_of(category: Category, position: Point3) -> Shape {
    match category {
        Category::Battery => Shape::Box { half: BATTERY_HALF },
        Category::Slot => Shape::Patch { half_x: SLOT_HALF, half_y: SLOT_HALF },
        Category::Pad => Shape::Patch { half_x: (PAD_X.1 - PAD_X.0) / 2.0, half_y: (PAD_Y.1 - PAD_Y.0) / 2.0 },
        Category::Crate => Shape::Rim { half_x: CRATE_HALF_X, half_y: (CRATE_MAX_Y - CRATE_MIN_Y) / 2.0, height: CRATE_WALL_H },
        Category::Mug => Shape::Mug,
        Category::Tree => Shape::Trunk,
        Category::Branch => {
            let d = Point3::new(position.x - TREE_BASE.x, position.y - TREE_BASE.y, 0.0);
            let n = d.norm().max(1e-12);
            Shape::Branch { dir: [d.x / n, d.y / n] }
        }
    }
}

fn scene_items(scene: &Scene) -> Vec<RenderItem> {
    scene
        .objects
        .iter()
        .map(|o| {
            if o.category == Category::Slot && scene.slot_occupied(o.id) {
                // A filled slot shows the top of the packed battery at crate-wall height.
                let top = Point3::new(o.position.x, o.position.y, o.position.z + 2.0 * BATTERY_HALF[2]);
                return RenderItem { id: o.id, category: Category::Crate, shape: shape_of(o.category, top), position: top, yaw: 0.0 };
            }
            RenderItem { id: o.id, category: o.category, shape: shape_of(o.category, o.position), position: o.position, yaw: o.yaw }
        })
        .collect()
}

pub fn render_feature_cloud(scene: &Scene, noise_sigma: f64, seed: u64, config: &RenderConfig) -> FeatureCloud {
    let bank = ReferenceBank::new(config.feature_dim, config.reference_seed);
    render_items(&scene_items(scene), noise_sigma, seed, config, &bank)
}

/// Renders the current poses of an environment state.
pub fn render_state(world: &World, state: &EnvState, noise_sigma: f64, seed: u64, config: &RenderConfig) -> FeatureCloud {
    let mut items = scene_items(&world.scene);
    for it in &mut items {
        if let Some(p) = state.pose(it.id) {
            it.position = p.position;
            it.yaw = p.yaw;
        }
    }
    let bank = ReferenceBank::new(config.feature_dim, config.reference_seed);
    render_items(&items, noise_sigma, seed, config, &bank)
}

pub fn render_items(items: &[RenderItem], noise_sigma: f64, seed: u64, config: &RenderConfig, bank: &ReferenceBank) -> FeatureCloud {
    assert!(noise_sigma >= 0.0, "noise_sigma must be non-negative");
    let mut surf_rng = stream(seed, &["render", "surface"]);
    let mut points = Vec::with_capacity(items.len() * config.points_per_object);
    let mut owner = Vec::with_capacity(points.capacity());
    for (k, item) in items.iter().enumerate() {
        for _ in 0..config.points_per_object {
            points.push(sample_surface(item, &mut surf_rng));
            owner.push(k);
        }
    }
    let keep: Vec<usize> = if points.len() <= config.max_points {
        (0..points.len()).collect()
    } else {
        let mut k = fps_downsample(&points, config.max_points, 0);
        k.sort_unstable();
        k
    };

    let dim = config.feature_dim;
    let mut feat_rng = stream(seed, &["render", "features"]);
    let mut cloud = FeatureCloud {
        points: Vec::with_capacity(keep.len()),
        feature_dim: dim,
        features: Vec::with_capacity(keep.len() * dim),
        gt_instance: Vec::with_capacity(keep.len()),
        gt_category: Vec::with_capacity(keep.len()),
    };
    let mut buf = vec![0.0; dim];
    for i in keep {
        let item = &items[owner[i]];
        let r = &bank.get(item.category).vector;
        if noise_sigma == 0.0 {
            cloud.features.extend_from_slice(r);
        } else {
            for (b, &x) in buf.iter_mut().zip(r) {
                let n: f64 = StandardNormal.sample(&mut feat_rng);
                *b = x + noise_sigma * n;
            }
            let norm = dot(&buf, &buf).sqrt();
            cloud.features.extend(buf.iter().map(|x| x / norm));
        }
        cloud.points.push(points[i]);
        cloud.gt_instance.push(item.id as i32);
        cloud.gt_category.push(item.category);
    }
    cloud
}

fn rotate_yaw(x: f64, y: f64, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    (c * x - s * y, s * x + c * y)
}

fn sample_surface(item: &RenderItem, rng: &mut impl Rng) -> Point3 {
    let p = item.position;
    let local = match item.shape {
        Shape::Box { half: [hx, hy, hz] } => {
            // The underside faces the table and is never observed.
            let areas = [hy * hz, hy * hz, hx * hz, hx * hz, hx * hy];
            let face = pick_weighted(rng, &areas);
            let (a, b) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            match face {
                0 => [hx, a * hy, b * hz],
                1 => [-hx, a * hy, b * hz],
                2 => [a * hx, hy, b * hz],
                3 => [a * hx, -hy, b * hz],
                _ => [a * hx, b * hy, hz],
            }
        }
        Shape::Patch { half_x, half_y } => [rng.random_range(-half_x..=half_x), rng.random_range(-half_y..=half_y), 0.0],
        Shape::Rim { half_x, half_y, height } => {
            let wall = pick_weighted(rng, &[half_x, half_x, half_y, half_y]);
            let t = rng.random_range(-1.0..=1.0);
            let z = rng.random_range(0.0..=height);
            match wall {
                0 => [t * half_x, -half_y, z],
                1 => [t * half_x, half_y, z],
                2 => [-half_x, t * half_y, z],
                _ => [half_x, t * half_y, z],
            }
        }
        Shape::Mug => {
            let part = pick_weighted(rng, &[0.7, 0.15, 0.15]);
            let half_h = MUG_HEIGHT / 2.0;
            match part {
                0 => {
                    let th = rng.random_range(0.0..2.0 * PI);
                    [MUG_RADIUS * th.cos(), MUG_RADIUS * th.sin(), rng.random_range(-half_h..=half_h)]
                }
                1 => {
                    let th = rng.random_range(0.0..2.0 * PI);
                    let r = MUG_RADIUS * rng.random::<f64>().sqrt();
                    [r * th.cos(), r * th.sin(), -half_h]
                }
                _ => {
                    // handle: half loop leaving the body along +x
                    let th = rng.random_range(-PI / 2.0..=PI / 2.0);
                    let reach = MUG_HANDLE_REACH * th.cos();
                    [MUG_RADIUS + reach, rng.random_range(-0.004..=0.004), 0.6 * half_h * th.sin()]
                }
            }
        }
        Shape::Branch { dir } => {
            let half_len = (BRANCH_OUTER - BRANCH_INNER) / 2.0;
            let t = rng.random_range(-half_len..=half_len);
            let th = rng.random_range(0.0..2.0 * PI);
            // ring around the axis: horizontal normal (-dir.y, dir.x) and +z
            let (nx, ny) = (-dir[1], dir[0]);
            let (c, s) = (BRANCH_RADIUS * th.cos(), BRANCH_RADIUS * th.sin());
            return Point3::new(p.x + dir[0] * t + nx * c, p.y + dir[1] * t + ny * c, p.z + s);
        }
        Shape::Trunk => {
            let th = rng.random_range(0.0..2.0 * PI);
            let h = TREE_HEIGHT / 2.0;
            [TREE_RADIUS * th.cos(), TREE_RADIUS * th.sin(), rng.random_range(-h..=h)]
        }
    };
    let (x, y) = rotate_yaw(local[0], local[1], item.yaw);
    Point3::new(p.x + x, p.y + y, p.z + local[2])
}

fn pick_weighted(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            return i;
        }
        r -= w;
    }
    weights.len() - 1
}
