use super::layout::*;
use super::{Category, Color, Scene, SceneError, SceneObject, SlotGrid, Task};
use crate::geom::Point3;
use crate::rng::stream;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How many crate slots start out filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupancySpec {
    /// Uniform count in `min..=max`, uniformly chosen slots.
    Random { min: usize, max: usize },
    /// Exactly this many vacant slots.
    Vacant(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    /// Inclusive range for the number of loose batteries.
    pub battery_count: (usize, usize),
    pub occupancy: OccupancySpec,
    /// Adds white to the mug color pool.
    pub white_mugs: bool,
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            battery_count: (1, 3),
            // At most two filled slots, so no row or column of the crate is ever full.
            occupancy: OccupancySpec::Random { min: 0, max: 2 },
            white_mugs: false,
            max_attempts: 1000,
        }
    }
}

impl SceneConfig {
    /// Exactly `picks` loose batteries and `places` vacant slots.
    pub fn ambiguity_cell(picks: usize, places: usize) -> Self {
        Self { battery_count: (picks, picks), occupancy: OccupancySpec::Vacant(places), ..Self::default() }
    }

    fn validate(&self) -> Result<(), SceneError> {
        let (lo, hi) = self.battery_count;
        if lo < 1 || lo > hi || hi > 4 {
            return Err(SceneError::InvalidConfig(format!("battery_count {lo}..={hi} must lie within 1..=4")));
        }
        let n = SLOT_ROWS * SLOT_COLS;
        match self.occupancy {
            OccupancySpec::Random { min, max } if min > max || max >= n => {
                Err(SceneError::InvalidConfig(format!("occupied range {min}..={max} must leave a vacant slot")))
            }
            OccupancySpec::Vacant(v) if v == 0 || v > n => Err(SceneError::InvalidConfig(format!("vacant slot count {v} must lie within 1..={n}"))),
            _ => Ok(()),
        }
    }
}

/// Samples a scene for `task`. Pure in `(task, seed, config)`.
pub fn gen_scene(task: Task, seed: u64, config: &SceneConfig) -> Result<Scene, SceneError> {
    config.validate()?;
    let mut rng = stream(seed, &["scene", task.name()]);
    let mut objects = Vec::new();
    let mut next_id = 0u32;
    let mut push = |objects: &mut Vec<SceneObject>, category, color, position, yaw| {
        objects.push(SceneObject { id: next_id, category, color, position, yaw });
        next_id += 1;
    };
    let mut attempts = 0usize;
    match task {
        Task::PackBattery => {
            push(&mut objects, Category::Crate, Color::None, Point3::new(CRATE_CENTER_X, (CRATE_MIN_Y + CRATE_MAX_Y) / 2.0, 0.0), 0.0);
            push(&mut objects, Category::Pad, Color::None, pad_center(), 0.0);
            for r in 0..SLOT_ROWS {
                for c in 0..SLOT_COLS {
                    push(&mut objects, Category::Slot, Color::None, slot_center(r, c), 0.0);
                }
            }
            let count = rng.random_range(config.battery_count.0..=config.battery_count.1);
            let centers = place_spread(&mut rng, count, BATTERY_X, BATTERY_Y, BATTERY_SPACING, config.max_attempts, &mut attempts)?;
            for p in centers {
                let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                push(&mut objects, Category::Battery, Color::None, Point3::new(p.0, p.1, rest_z(Category::Battery)), yaw);
            }
            let n = SLOT_ROWS * SLOT_COLS;
            let filled = match config.occupancy {
                OccupancySpec::Random { min, max } => rng.random_range(min..=max),
                OccupancySpec::Vacant(v) => n - v,
            };
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut occupied = vec![false; n];
            for &i in &order[..filled] {
                occupied[i] = true;
            }
            Ok(Scene { task, seed, objects, slot_grid: Some(SlotGrid { rows: SLOT_ROWS, cols: SLOT_COLS, occupied }), branch_count: None })
        }
        Task::HangMug => {
            push(&mut objects, Category::Tree, Color::None, Point3::new(TREE_BASE.x, TREE_BASE.y, TREE_HEIGHT / 2.0), 0.0);
            push(&mut objects, Category::Pad, Color::None, pad_center(), 0.0);
            for i in 0..BRANCHES.len() {
                push(&mut objects, Category::Branch, Color::None, branch_center(i), 0.0);
            }
            let mut palette = vec![Color::Red, Color::Blue, Color::Green];
            if config.white_mugs {
                palette.push(Color::White);
            }
            palette.shuffle(&mut rng);
            let centers = place_spread(&mut rng, 2, MUG_X, MUG_Y, MUG_SPACING, config.max_attempts, &mut attempts)?;
            for (p, &color) in centers.iter().zip(&palette) {
                let yaw = rng.random_range(-MUG_YAW..=MUG_YAW);
                push(&mut objects, Category::Mug, color, Point3::new(p.0, p.1, rest_z(Category::Mug)), yaw);
            }
            Ok(Scene { task, seed, objects, slot_grid: None, branch_count: Some(BRANCHES.len()) })
        }
    }
}

fn pad_center() -> Point3 {
    Point3::new((PAD_X.0 + PAD_X.1) / 2.0, (PAD_Y.0 + PAD_Y.1) / 2.0, 0.0)
}

/// Rejection sampling of `count` xy centers at least `spacing` apart and
/// [`DESCRIPTOR_MARGIN`]-separated along each descriptor axis.
fn place_spread(
    rng: &mut impl Rng,
    count: usize,
    xr: (f64, f64),
    yr: (f64, f64),
    spacing: f64,
    max_attempts: usize,
    attempts: &mut usize,
) -> Result<Vec<(f64, f64)>, SceneError> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(count);
    while out.len() < count {
        if *attempts >= max_attempts {
            return Err(SceneError::PlacementFailure(*attempts));
        }
        *attempts += 1;
        let c = (rng.random_range(xr.0..=xr.1), rng.random_range(yr.0..=yr.1));
        let r = (c.0 * c.0 + c.1 * c.1).sqrt();
        let clear = out.iter().all(|o| {
            ((o.0 - c.0).powi(2) + (o.1 - c.1).powi(2)).sqrt() >= spacing
                && (o.0 - c.0).abs() >= DESCRIPTOR_MARGIN
                && (o.1 - c.1).abs() >= DESCRIPTOR_MARGIN
                && ((o.0 * o.0 + o.1 * o.1).sqrt() - r).abs() >= DESCRIPTOR_MARGIN
        });
        if clear {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_battery_seed_7() {
        let s = gen_scene(Task::PackBattery, 7, &SceneConfig::default()).unwrap();
        let g = s.slot_grid.as_ref().unwrap();
        assert_eq!((g.rows, g.cols, g.occupied.len()), (3, 4, 12));
        let n = s.pick_candidates().len();
        assert!((1..=3).contains(&n), "{n} batteries");
        for b in s.pick_candidates() {
            assert!(b.position.y >= PAD_Y.0 && b.position.y <= PAD_Y.1);
        }
    }

    #[test]
    fn hang_mug_seed_1_has_two_distinct_colors() {
        let s = gen_scene(Task::HangMug, 1, &SceneConfig::default()).unwrap();
        let mugs = s.pick_candidates();
        assert_eq!(mugs.len(), 2);
        assert_ne!(mugs[0].color, mugs[1].color);
        for m in mugs {
            assert!(matches!(m.color, Color::Red | Color::Blue | Color::Green));
        }
        assert_eq!(s.of_category(Category::Branch).count(), 4);
    }

    #[test]
    fn deterministic() {
        for task in Task::ALL {
            let a = gen_scene(task, 99, &SceneConfig::default()).unwrap();
            let b = gen_scene(task, 99, &SceneConfig::default()).unwrap();
            assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        }
    }

    #[test]
    fn invariants_over_many_seeds() {
        for seed in 0..200 {
            for task in Task::ALL {
                let s = gen_scene(task, seed, &SceneConfig::default()).unwrap();
                let mut ids: Vec<u32> = s.objects.iter().map(|o| o.id).collect();
                ids.dedup();
                assert_eq!(ids.len(), s.objects.len());
                let loose: Vec<_> = s.objects.iter().filter(|o| o.graspable()).collect();
                for (i, a) in loose.iter().enumerate() {
                    assert!(a.position.x.abs() <= WORKSPACE && a.position.y.abs() <= WORKSPACE);
                    for b in &loose[i + 1..] {
                        assert!(a.position.dist_xy(b.position) >= 0.06);
                    }
                }
                if task == Task::PackBattery {
                    assert!(!s.vacant_targets().is_empty());
                }
            }
        }
    }

    #[test]
    fn ambiguity_cell_counts() {
        let s = gen_scene(Task::PackBattery, 3, &SceneConfig::ambiguity_cell(4, 2)).unwrap();
        assert_eq!(s.pick_candidates().len(), 4);
        assert_eq!(s.vacant_targets().len(), 2);
    }

    #[test]
    fn impossible_spacing_reports_placement_failure() {
        let mut rng = stream(0, &["t"]);
        let mut attempts = 0;
        let err = place_spread(&mut rng, 5, (0.0, 0.01), (0.0, 0.01), 1.0, 1000, &mut attempts).unwrap_err();
        assert_eq!(err, SceneError::PlacementFailure(1000));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SceneConfig { battery_count: (0, 2), ..SceneConfig::default() };
        assert!(matches!(gen_scene(Task::PackBattery, 0, &cfg), Err(SceneError::InvalidConfig(_))));
    }
}
