//! Descriptive-component and template libraries for both tasks, kept word
//! for word (including their irregular punctuation).

use super::{Column, Component, Descriptor, Row, Slackness};
use crate::scene::{Category, Color, Task};

/// One instruction template. Holes are `{mug}`, `{other_mug}` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Template {
    pub slackness: Slackness,
    pub text: &'static str,
}

const fn t(slackness: Slackness, text: &'static str) -> Template {
    Template { slackness, text }
}

use Slackness::{BothSlack, None as NoSlack, PickSlack, PlaceSlack};

pub const HANG_MUG_TEMPLATES: &[Template] = &[
    t(NoSlack, "Hang the {mug} on the {branch}."),
    t(NoSlack, "I want to use the {other_mug} to drink some water. Put away the other one on the {branch}."),
    t(NoSlack, "I want to use the {other_mug} to drink some water. Put away the other mug on the {branch}."),
    t(NoSlack, "I will use the {other_mug} to drink some water. Hang the {mug} on the {branch}."),
    t(NoSlack, "Hang the {mug} on the {other_branch}. Sorry, the {branch}."),
    t(NoSlack, "There are two mugs. Keep {other_mug} on the table, put the other one on {branch}."),
    t(NoSlack, "I will not use this {mug} now. Hang it on {branch}"),
    t(NoSlack, "Put Bob's mug, the {mug}, on the {branch}."),
    t(PickSlack, "Hang a mug on the {branch}."),
    t(PickSlack, "Put away a mug on the {branch}."),
    t(PickSlack, "Hang a mug on the {other_branch}. Sorry, the {branch}."),
    t(PlaceSlack, "Hang the {mug} on a branch."),
    t(PlaceSlack, "I want to use the {other_mug} to drink some water. Put away the other one on a branch."),
    t(PlaceSlack, "I want to use the {other_mug} to drink some water. Put away the other mug on a branch."),
    t(PlaceSlack, "I will use the {other_mug} to drink some water. Hang the {mug} on a branch."),
    t(PlaceSlack, "Hang the {other_mug} on a branch. Sorry, the {mug}."),
    t(PlaceSlack, "There are two mugs. Keep {other_mug} on the table, put the other one on a branch."),
    t(PlaceSlack, "I will not use this {mug} now. Hang it on a branch"),
    t(PlaceSlack, "Put Bob's mug, the {mug}, on the a branch."),
    t(BothSlack, "Hang a mug on a branch."),
    t(BothSlack, "There are two mugs. Keep one on the table, put the other one on a branch."),
];

pub const PACK_BATTERY_TEMPLATES: &[Template] = &[
    t(NoSlack, "Pick the {battery} outside the crate into the {slot}."),
    t(NoSlack, "I need to use the {other_battery}. Put away the {battery} outside the box in the {slot}."),
    t(NoSlack, "The desk is too messy. Put away the {battery} outside the box into the {slot}."),
    t(NoSlack, "I want to put the {battery} outside the crate into the {other_slot}, oh sorry, the {slot}."),
    t(NoSlack, "You should make the table more tidy, Just start from putting the {battery} outside the crate into the {slot}."),
    t(PickSlack, "Pick a battery outside the crate into the {slot}."),
    t(PickSlack, "The desk is too messy. Put away a battery outside the crate into the {slot}."),
    t(PickSlack, "I want to put a battery outside the crate into the {other_slot}, oh sorry, the {slot}."),
    t(PickSlack, "I want to put a battery outside the crate into the {slot}."),
    t(PlaceSlack, "Pick the {battery} outside the crate into a slot."),
    t(PlaceSlack, "I need to use the {other_battery}. Put away the {battery} outside the crate in a slot."),
    t(PlaceSlack, "The desk is too messy. Put away the {battery} outside the crate into a slot."),
    t(PlaceSlack, "I want to put the {other_battery} into a slot, oh sorry, the {battery} outside the crate."),
    t(PlaceSlack, "You should make the table more tidy, Just start from putting the {battery} outside the crate into a slot."),
    t(BothSlack, "Put a battery outside the crate on a slot."),
    t(BothSlack, "There are some batteries outside the crate. Put one into a slot."),
];

pub fn templates(task: Task) -> &'static [Template] {
    match task {
        Task::HangMug => HANG_MUG_TEMPLATES,
        Task::PackBattery => PACK_BATTERY_TEMPLATES,
    }
}

/// Components that can describe the picked object and the place target.
/// White mugs are offered only when the scene generator can produce them.
pub fn component_library(task: Task, white_mugs: bool) -> (Vec<Component>, Vec<Component>) {
    use Descriptor as D;
    let c = |category, descriptor| Component { category, descriptor };
    match task {
        Task::HangMug => {
            let mut picks = vec![c(Category::Mug, D::LeftMost), c(Category::Mug, D::RightMost)];
            if white_mugs {
                picks.push(c(Category::Mug, D::Color(Color::White)));
            }
            picks.extend([Color::Red, Color::Blue, Color::Green].map(|col| c(Category::Mug, D::Color(col))));
            let places = [D::Furthest, D::RightTopmost, D::LeftTopmost, D::RightMiddle].map(|d| c(Category::Branch, d)).to_vec();
            (picks, places)
        }
        Task::PackBattery => {
            let picks = [D::LeftMost, D::RightMost, D::FrontMost, D::BackMost].map(|d| c(Category::Battery, d)).to_vec();
            let places = [
                D::Furthest,
                D::Nearest,
                D::Row(Row::Front),
                D::Row(Row::Middle),
                D::Row(Row::Back),
                D::Column(Column::Left),
                D::Column(Column::Middle),
                D::Column(Column::Right),
            ]
            .map(|d| c(Category::Slot, d))
            .to_vec();
            (picks, places)
        }
    }
}
