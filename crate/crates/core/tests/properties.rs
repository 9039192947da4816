//! Property tests for the invariants of each module.

mod common;

use common::*;
use deskbench::bench::{run_episode, BenchConfig};
use deskbench::geom::{back_project_pixel, chamfer_distance, dbscan, dilate_mask, fps_downsample, Camera, Mask2D, Point3};
use deskbench::grounding::{build_attention, compile_program, run_program, select_index, AttributeOracle, GroundingConfig, Relation};
use deskbench::instructions::{check_scene_matches, extract_targets, role_universe, sample_instruction, Descriptor, InstructionConfig, Role, Slackness};
use deskbench::policy::net::POINT_DIM;
use deskbench::policy::{NetConfig, NoiseNet, Normalizer, Observation};
use deskbench::rng::stream;
use deskbench::scene::{
    gen_scene, render_feature_cloud, reward_hang_mug, reward_pack_battery, Category, Color, EnvConfig, EnvState, Grip, HangThresholds, ObjectPose,
    PackThresholds, ReferenceBank, RenderConfig, Scene, SceneConfig, SceneObject, Task,
};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn min_dist2(p: Point3, set: &[Point3]) -> f64 {
    set.iter().map(|q| p.dist2(*q)).fold(f64::INFINITY, f64::min)
}

fn task_strategy() -> impl Strategy<Value = Task> {
    prop_oneof![Just(Task::PackBattery), Just(Task::HangMug)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fps_matches_max_min_oracle(points in cloud(64), k in 1usize..=64, start in 0usize..64) {
        let got = fps_downsample(&points, k, start);
        prop_assert_eq!(&got, &fps_oracle(&points, k, start));
        let distinct: BTreeSet<usize> = got.iter().copied().collect();
        prop_assert_eq!(distinct.len(), got.len());
        for i in 1..got.len() {
            let chosen: Vec<Point3> = got[..i].iter().map(|&j| points[j]).collect();
            let d = min_dist2(points[got[i]], &chosen);
            for q in (0..points.len()).filter(|q| !got[..i].contains(q)) {
                prop_assert!(d >= min_dist2(points[q], &chosen));
            }
        }
    }

    #[test]
    fn dbscan_single_point_clusters_are_components(points in cloud(64), eps in 0.01f64..0.2) {
        let got: BTreeSet<Vec<usize>> = dbscan(&points, eps, 1).clusters().into_iter().collect();
        prop_assert_eq!(got, components_oracle(&points, eps));
    }

    #[test]
    fn chamfer_matches_exhaustive_oracle(a in cloud(40), b in cloud(40), shift in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)) {
        let d = chamfer_distance(&a, &b).unwrap();
        prop_assert!((d - chamfer_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert_eq!(d, chamfer_distance(&b, &a).unwrap());
        prop_assert_eq!(chamfer_distance(&a, &a).unwrap(), 0.0);
        let t = Point3::new(shift.0, shift.1, shift.2);
        let (ta, tb): (Vec<Point3>, Vec<Point3>) = (a.iter().map(|p| *p + t).collect(), b.iter().map(|p| *p + t).collect());
        prop_assert!((chamfer_distance(&ta, &tb).unwrap() - d).abs() <= 1e-9);
    }

    #[test]
    fn selectors_match_brute_force(points in cloud(12)) {
        for r in ORACLE_RELATIONS {
            prop_assert_eq!(select_index(r, &points), relation_oracle(r, &points), "{}", r);
        }
    }

    #[test]
    fn relative_selectors_ignore_translation(
        raw in prop::collection::vec((-24i32..24, -24i32..24, 0i32..12), 1..10),
        shift in (-32i32..32, -32i32..32, -8i32..8),
    ) {
        // multiples of 1/64 keep every sum exact
        let q = |v: i32| v as f64 / 64.0;
        let pts: Vec<Point3> = raw.iter().map(|&(x, y, z)| Point3::new(q(x), q(y), q(z))).collect();
        let moved: Vec<Point3> = pts.iter().map(|p| *p + Point3::new(q(shift.0), q(shift.1), q(shift.2))).collect();
        for r in [Relation::LeftMost, Relation::RightMost, Relation::FrontMost, Relation::BackMost, Relation::Column(deskbench::instructions::Column::Middle)] {
            prop_assert_eq!(select_index(r, &pts), select_index(r, &moved), "{}", r);
        }
    }

    #[test]
    fn distance_selectors_ignore_rotation_about_z(points in continuous_cloud(10), angle in 0.0f64..std::f64::consts::TAU) {
        let (s, c) = angle.sin_cos();
        let rotated: Vec<Point3> = points.iter().map(|p| Point3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)).collect();
        for (r, want_max) in [(Relation::Nearest, false), (Relation::Furthest, true)] {
            let a = select_index(r, &points).unwrap();
            let b = select_index(r, &rotated).unwrap();
            // rounding may only reorder norms that agree to 1e-12
            prop_assert!(a == b || (points[a].norm() - points[b].norm()).abs() < 1e-12, "{} {} {}", r, a, want_max);
        }
    }

    #[test]
    fn projection_round_trip(
        eye in (-0.6f64..0.6, -0.8f64..-0.3, 0.4f64..0.9),
        points in continuous_cloud(20),
    ) {
        let cam = Camera::look_at(Point3::new(eye.0, eye.1, eye.2), Point3::new(0.0, 0.1, 0.05), Point3::new(0.0, 0.0, 1.0), 300.0, 300.0, 320, 240).unwrap();
        for p in points {
            let pr = cam.project_point(p);
            if pr.visible {
                prop_assert!(back_project_pixel(pr.u, pr.v, pr.depth, &cam).dist(p) <= 1e-6);
            }
        }
    }

    #[test]
    fn dilation_is_monotone_and_extensive(
        bits in prop::collection::vec(any::<bool>(), 12 * 9),
        extra in prop::collection::vec(any::<bool>(), 12 * 9),
        radius in 0usize..4,
    ) {
        let small = Mask2D { width: 12, height: 9, values: bits.clone() };
        let big = Mask2D { width: 12, height: 9, values: bits.iter().zip(&extra).map(|(a, b)| *a || *b).collect() };
        let (ds, db) = (dilate_mask(&small, radius), dilate_mask(&big, radius));
        prop_assert!(small.is_subset_of(&ds));
        prop_assert!(ds.is_subset_of(&db));
    }

    #[test]
    fn scene_generation_is_pure(task in task_strategy(), seed in any::<u64>()) {
        let cfg = SceneConfig::default();
        prop_assert_eq!(gen_scene(task, seed, &cfg).unwrap(), gen_scene(task, seed, &cfg).unwrap());
    }

    #[test]
    fn pack_reward_is_monotone_in_slack(
        dx in 0.0f64..0.05, dot in 0.95f64..1.0, h in 0.0f64..0.015,
        th in (0.01f64..0.05, 0.95f64..0.999, 0.002f64..0.015),
        slack in (0.0f64..0.02, 0.0f64..0.04, 0.0f64..0.01),
    ) {
        let scene = fixture(Task::PackBattery, Category::Slot, Point3::ORIGIN);
        let s = state(Category::Battery, Point3::new(dx, 0.0, h), [(1.0 - dot * dot).sqrt(), 0.0, dot]);
        let tight = PackThresholds { horizontal: th.0, up_dot: th.1, height: th.2 };
        let loose = PackThresholds { horizontal: th.0 + slack.0, up_dot: th.1 - slack.1, height: th.2 + slack.2 };
        prop_assert!(reward_pack_battery(&scene, &s, &[(7, 1)], &loose) >= reward_pack_battery(&scene, &s, &[(7, 1)], &tight));
    }

    #[test]
    fn hang_reward_is_monotone_in_slack(
        dx in -0.08f64..0.08, dz in -0.15f64..0.05,
        th in (0.01f64..0.08, 0.02f64..0.15, 0.0f64..0.03),
        slack in (0.0f64..0.02, 0.0f64..0.05, 0.0f64..0.02),
    ) {
        let scene = fixture(Task::HangMug, Category::Branch, Point3::new(0.0, 0.2, 0.3));
        let s = state(Category::Mug, Point3::new(dx, 0.2, 0.3 + dz), [0.0, 0.0, 1.0]);
        let tight = HangThresholds { x: th.0, below: th.1, above: th.2 };
        let loose = HangThresholds { x: th.0 + slack.0, below: th.1 + slack.1, above: th.2 + slack.2 };
        prop_assert!(reward_hang_mug(&scene, &s, &[(7, 1)], &loose) >= reward_hang_mug(&scene, &s, &[(7, 1)], &tight));
    }

    #[test]
    fn normalization_round_trip(chunks in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 1..20)) {
        let norm = Normalizer::fit(chunks.iter().map(|c| c.as_slice()), 4);
        for c in &chunks {
            let n = norm.normalize(c);
            prop_assert!(n.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
            let back = norm.denormalize(&n);
            prop_assert!(back.iter().zip(c).all(|(a, b)| (a - b).abs() <= 1e-9));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn encoder_ignores_point_order(seed in any::<u64>(), n in 2usize..40, perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = stream(seed, &["encoder"]);
        let net = NoiseNet::new(NetConfig::default(), &mut rng);
        let points: Vec<[f64; POINT_DIM]> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let obs = Observation { points, image: vec![], proprio: [0.0; 4] };
        let mut shuffled = obs.clone();
        shuffled.points.shuffle(&mut stream(perm_seed, &["perm"]));
        prop_assert_eq!(net.encode(&obs).0, net.encode(&shuffled).0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn instructions_are_consistent_and_grounding_hits_targets(task in task_strategy(), seed in any::<u64>()) {
        let scene = gen_scene(task, seed, &SceneConfig::default()).unwrap();
        let ins = sample_instruction(task, &scene, &mut stream(seed, &["ins"]), &InstructionConfig::default()).unwrap();
        prop_assert!(check_scene_matches(&scene, &ins.fills));
        let targets = extract_targets(&scene, &ins);
        match ins.slackness {
            Slackness::None => {
                // row and column descriptors name a set of slots
                let set_valued = ins.fills.iter().any(|f| matches!(f.component.descriptor, Descriptor::Row(_) | Descriptor::Column(_)));
                prop_assert_eq!(targets.pick.len(), 1);
                prop_assert!(targets.place.len() == 1 || set_valued);
            }
            Slackness::BothSlack => {
                prop_assert_eq!(&targets.pick, &role_universe(&scene, Role::Pick));
                prop_assert_eq!(&targets.place, &role_universe(&scene, Role::Place));
            }
            _ => {}
        }
        let render = RenderConfig::default();
        let cloud = render_feature_cloud(&scene, 0.0, seed, &render);
        let refs = ReferenceBank::new(render.feature_dim, render.reference_seed);
        let program = compile_program(&ins).unwrap();
        let (pick, place) = run_program(&program, &cloud, &refs, &AttributeOracle::from_scene(&scene), &GroundingConfig::for_task(task), seed).unwrap();
        prop_assert!(targets.pick.contains(&(pick.majority_gt as u32)));
        prop_assert!(targets.place.contains(&(place.majority_gt as u32)));
        prop_assert_eq!(build_attention(&cloud, &pick, &place).support_size(), pick.indices.len() + place.indices.len());
    }

    #[test]
    fn noise_free_pipeline_scores_zero_chamfer(task in task_strategy(), seed in any::<u64>(), index in 0u64..1000) {
        let cfg = BenchConfig::new(task, seed);
        let row = run_episode(&cfg, index);
        prop_assert!(row.pass);
        prop_assert_eq!(row.chamfer, Some(0.0));
    }
}

fn fixture(task: Task, category: Category, at: Point3) -> Scene {
    Scene { task, seed: 0, objects: vec![SceneObject { id: 1, category, color: Color::None, position: at, yaw: 0.0 }], slot_grid: None, branch_count: None }
}

fn state(category: Category, position: Point3, up: [f64; 3]) -> EnvState {
    EnvState {
        objects: vec![ObjectPose { id: 7, category, position, yaw: 0.0, up }],
        ee: EnvConfig::default().home,
        grip: Grip::Open,
        held: None,
        frame: 0,
        placements: vec![],
    }
}
