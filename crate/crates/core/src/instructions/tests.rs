use super::*;
use crate::geom::Point3;
use crate::rng::stream;
use crate::scene::{gen_scene, SceneConfig};

fn hole(role: Role, other: bool) -> Hole {
    Hole { role, other }
}

fn comp(category: Category, descriptor: Descriptor) -> Component {
    Component { category, descriptor }
}

fn mug_scene(colors: [Color; 2]) -> Scene {
    let mut s = gen_scene(Task::HangMug, 11, &SceneConfig::default()).unwrap();
    for (o, c) in s.objects.iter_mut().filter(|o| o.category == Category::Mug).zip(colors) {
        o.color = c;
    }
    s
}

#[test]
fn component_text_matches_library_wording() {
    assert_eq!(comp(Category::Slot, Descriptor::Row(Row::Front)).to_string(), "slot on the front-most row");
    assert_eq!(comp(Category::Slot, Descriptor::Row(Row::Middle)).to_string(), "slot on the middle row");
    assert_eq!(comp(Category::Slot, Descriptor::Column(Column::Left)).to_string(), "slot on left column");
    assert_eq!(comp(Category::Slot, Descriptor::Column(Column::Middle)).to_string(), "slot on the middle columns");
    assert_eq!(comp(Category::Mug, Descriptor::Color(Color::Blue)).to_string(), "blue mug");
    assert_eq!(comp(Category::Branch, Descriptor::LeftTopmost).to_string(), "left-topmost branch");
    assert_eq!(comp(Category::Battery, Descriptor::FrontMost).to_string(), "front-most battery");
}

#[test]
fn instruction_text_fills_holes() {
    let fills = vec![
        Fill { hole: hole(Role::Pick, false), component: comp(Category::Mug, Descriptor::Color(Color::Red)) },
        Fill { hole: hole(Role::Place, false), component: comp(Category::Branch, Descriptor::Furthest) },
    ];
    let i = Instruction::build(0, Task::HangMug, 0, fills);
    assert_eq!(i.text, "Hang the red mug on the furthest branch.");
    assert_eq!(i.slackness, Slackness::None);
}

#[test]
fn every_template_has_holes_matching_its_class() {
    for task in Task::ALL {
        for t in templates(task) {
            let holes = template_holes(task, t.text).unwrap();
            let has = |role| holes.iter().any(|h| h.role == role);
            let (pick, place) = match t.slackness {
                Slackness::None => (true, true),
                Slackness::PickSlack => (false, true),
                Slackness::PlaceSlack => (true, false),
                Slackness::BothSlack => (false, false),
            };
            assert_eq!((has(Role::Pick), has(Role::Place)), (pick, place), "{}", t.text);
        }
    }
}

#[test]
fn both_slack_hang_text() {
    let s = mug_scene([Color::Red, Color::Blue]);
    let i = Instruction::build(s.seed, Task::HangMug, 19, vec![]);
    assert_eq!(i.text, "Hang a mug on a branch.");
    let t = extract_targets(&s, &i);
    assert_eq!(t.pick.len(), 2);
    assert_eq!(t.place.len(), 4);
}

#[test]
fn color_check() {
    let s = mug_scene([Color::Blue, Color::Red]);
    let blue = [Fill { hole: hole(Role::Pick, false), component: comp(Category::Mug, Descriptor::Color(Color::Blue)) }];
    assert!(check_scene_matches(&s, &blue));
    let s = mug_scene([Color::Red, Color::Green]);
    assert!(!check_scene_matches(&s, &blue));
    assert!(check_scene_matches(&s, &[]));
}

#[test]
fn full_back_row_fails_vacancy_check() {
    let mut s = gen_scene(Task::PackBattery, 2, &SceneConfig::default()).unwrap();
    let g = s.slot_grid.as_mut().unwrap();
    g.occupied = vec![false; 12];
    for c in 0..4 {
        g.occupied[2 * 4 + c] = true;
    }
    let back = [Fill { hole: hole(Role::Place, false), component: comp(Category::Slot, Descriptor::Row(Row::Back)) }];
    assert!(!check_scene_matches(&s, &back));
}

#[test]
fn rightmost_battery_is_argmax_x() {
    let mut s = gen_scene(Task::PackBattery, 0, &SceneConfig::ambiguity_cell(3, 12)).unwrap();
    let xs = [-0.1, 0.0, 0.2];
    let ids: Vec<u32> = s.pick_candidates().iter().map(|o| o.id).collect();
    for (o, x) in s.objects.iter_mut().filter(|o| o.category == Category::Battery).zip(xs) {
        o.position = Point3::new(x, -0.2, 0.025);
    }
    assert_eq!(denote(&s, &comp(Category::Battery, Descriptor::RightMost)), vec![ids[2]]);
}

#[test]
fn middle_columns_are_both_inner_columns() {
    let s = gen_scene(Task::PackBattery, 0, &SceneConfig::ambiguity_cell(1, 12)).unwrap();
    let got = denote(&s, &comp(Category::Slot, Descriptor::Column(Column::Middle)));
    let want: Vec<u32> = s.slot_cells().iter().filter(|(_, _, c)| *c == 1 || *c == 2).map(|(o, _, _)| o.id).collect();
    assert_eq!(got, want);
    assert_eq!(got.len(), 6);
}

#[test]
fn other_one_resolves_to_complement() {
    let s = mug_scene([Color::Blue, Color::Red]);
    let fills = vec![Fill { hole: hole(Role::Pick, true), component: comp(Category::Mug, Descriptor::Color(Color::Blue)) }];
    let i = Instruction::build(s.seed, Task::HangMug, 12, fills);
    assert!(i.text.starts_with("I want to use the blue mug to drink some water."));
    let red = s.of_category(Category::Mug).find(|o| o.color == Color::Red).unwrap().id;
    assert_eq!(extract_targets(&s, &i).pick, vec![red]);
}

#[test]
fn distractor_must_differ_from_target() {
    let s = mug_scene([Color::Blue, Color::Red]);
    let same = [
        Fill { hole: hole(Role::Pick, false), component: comp(Category::Mug, Descriptor::Color(Color::Blue)) },
        Fill { hole: hole(Role::Pick, true), component: comp(Category::Mug, Descriptor::Color(Color::Blue)) },
    ];
    assert!(!check_scene_matches(&s, &same));
}

#[test]
fn sampled_instructions_are_consistent_and_cover_every_template() {
    let mut rng = stream(0, &["coverage"]);
    for task in Task::ALL {
        let mut seen = vec![false; templates(task).len()];
        for seed in 0..5000 {
            let scene = gen_scene(task, seed, &SceneConfig::default()).unwrap();
            let i = sample_instruction(task, &scene, &mut rng, &InstructionConfig::default()).unwrap();
            assert!(check_scene_matches(&scene, &i.fills));
            assert!(!i.text.contains('{'));
            let t = extract_targets(&scene, &i);
            assert!(!t.pick.is_empty() && !t.place.is_empty());
            if i.slackness == Slackness::BothSlack {
                assert_eq!(t.pick, role_universe(&scene, Role::Pick));
                assert_eq!(t.place, role_universe(&scene, Role::Place));
            }
            seen[i.template] = true;
        }
        assert!(seen.iter().all(|&s| s), "{task}: {seen:?}");
    }
}

#[test]
fn white_is_never_sampled_by_default() {
    let mut rng = stream(1, &["white"]);
    let scene = gen_scene(Task::HangMug, 0, &SceneConfig::default()).unwrap();
    for _ in 0..500 {
        let i = sample_instruction(Task::HangMug, &scene, &mut rng, &InstructionConfig::default()).unwrap();
        assert!(!i.text.contains("white"));
    }
}

#[test]
fn jsonl_fields() {
    let s = mug_scene([Color::Blue, Color::Red]);
    let i = Instruction::build(s.seed, Task::HangMug, 19, vec![]);
    let line = to_jsonl(&[InstructionRecord::new(&i, &extract_targets(&s, &i))]);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["slackness"], "both_slack");
    for k in ["scene_id", "text", "pick_ids", "place_ids"] {
        assert!(v.get(k).is_some());
    }
}
