//! Spatial relations over instance centroids.
//!
//! Frame: +x right, +y away from the robot, +z up, robot base at the origin.
//! Every arg-min/arg-max scans in instance order and keeps the first extreme,
//! so ties go to the lowest index.

use crate::geom::Point3;
use crate::instructions::{Column, Row};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftMost,
    RightMost,
    FrontMost,
    BackMost,
    Nearest,
    Furthest,
    Row(Row),
    Column(Column),
    TopmostLeft,
    TopmostRight,
    MiddleRight,
    /// Seeded uniform choice; resolved by the interpreter, not here.
    Any,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::LeftMost => f.write_str("leftmost"),
            Relation::RightMost => f.write_str("rightmost"),
            Relation::FrontMost => f.write_str("frontmost"),
            Relation::BackMost => f.write_str("backmost"),
            Relation::Nearest => f.write_str("nearest"),
            Relation::Furthest => f.write_str("furthest"),
            Relation::Row(r) => write!(f, "row-{}", r.name()),
            Relation::Column(c) => write!(f, "column-{}", c.name()),
            Relation::TopmostLeft => f.write_str("topmost-left"),
            Relation::TopmostRight => f.write_str("topmost-right"),
            Relation::MiddleRight => f.write_str("middle-right"),
            Relation::Any => f.write_str("any"),
        }
    }
}

fn arg_by(points: &[Point3], key: impl Fn(Point3) -> f64, want_max: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in points.iter().enumerate() {
        let k = key(p);
        let better = match best {
            None => true,
            Some((_, b)) => (want_max && k > b) || (!want_max && k < b),
        };
        if better {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}

/// Midpoint rule: the centroid whose coordinate is closest to the middle of
/// the coordinate's range.
fn middle_by(points: &[Point3], key: impl Fn(Point3) -> f64) -> Option<usize> {
    let lo = points.iter().map(|&p| key(p)).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|&p| key(p)).fold(f64::NEG_INFINITY, f64::max);
    let mid = (hi + lo) / 2.0;
    arg_by(points, |p| (key(p) - mid).abs(), false)
}

/// Indices on the left (x at most the mean) or right (x at least the mean)
/// of the group.
fn side(points: &[Point3], right: bool) -> Vec<usize> {
    let mean = points.iter().map(|p| p.x).sum::<f64>() / points.len() as f64;
    (0..points.len()).filter(|&i| if right { points[i].x >= mean } else { points[i].x <= mean }).collect()
}

fn within(points: &[Point3], idx: &[usize], key: impl Fn(Point3) -> f64, want_max: bool) -> Option<usize> {
    let sub: Vec<Point3> = idx.iter().map(|&i| points[i]).collect();
    arg_by(&sub, key, want_max).map(|j| idx[j])
}

/// Index of the centroid selected by `relation`, or `None` when `points` is
/// empty or the relation is [`Relation::Any`].
pub fn select_index(relation: Relation, points: &[Point3]) -> Option<usize> {
    if points.is_empty() {
        return None;
    }
    match relation {
        Relation::LeftMost | Relation::Column(Column::Left) => arg_by(points, |p| p.x, false),
        Relation::RightMost | Relation::Column(Column::Right) => arg_by(points, |p| p.x, true),
        Relation::FrontMost | Relation::Row(Row::Front) => arg_by(points, |p| p.y, false),
        Relation::BackMost | Relation::Row(Row::Back) => arg_by(points, |p| p.y, true),
        Relation::Nearest => arg_by(points, |p| p.norm(), false),
        Relation::Furthest => arg_by(points, |p| p.norm(), true),
        Relation::Row(Row::Middle) => middle_by(points, |p| p.y),
        Relation::Column(Column::Middle) => middle_by(points, |p| p.x),
        Relation::TopmostLeft => within(points, &side(points, false), |p| p.z, true),
        Relation::TopmostRight => within(points, &side(points, true), |p| p.z, true),
        Relation::MiddleRight => {
            let right = side(points, true);
            let top = within(points, &right, |p| p.z, true)?;
            let rest: Vec<usize> = right.into_iter().filter(|&i| i != top).collect();
            within(points, &rest, |p| p.z, true).or(Some(top))
        }
        Relation::Any => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(v: &[f64]) -> Vec<Point3> {
        v.iter().map(|&x| Point3::new(x, 0.0, 0.0)).collect()
    }

    #[test]
    fn middle_column_tie_goes_to_lower_index() {
        assert_eq!(select_index(Relation::Column(Column::Middle), &xs(&[0.0, 0.1, 0.2, 0.3])), Some(1));
    }

    #[test]
    fn single_instance_is_always_selected() {
        let p = [Point3::new(0.3, -0.2, 0.1)];
        for r in [
            Relation::LeftMost,
            Relation::RightMost,
            Relation::FrontMost,
            Relation::BackMost,
            Relation::Nearest,
            Relation::Furthest,
            Relation::Row(Row::Middle),
            Relation::Column(Column::Middle),
            Relation::TopmostLeft,
            Relation::TopmostRight,
            Relation::MiddleRight,
        ] {
            assert_eq!(select_index(r, &p), Some(0), "{r}");
        }
    }

    #[test]
    fn branch_relations() {
        let b = [Point3::new(-0.15, 0.22, 0.32), Point3::new(0.15, 0.22, 0.32), Point3::new(0.15, 0.22, 0.14), Point3::new(0.0, 0.37, 0.23)];
        assert_eq!(select_index(Relation::TopmostLeft, &b), Some(0));
        assert_eq!(select_index(Relation::TopmostRight, &b), Some(1));
        assert_eq!(select_index(Relation::MiddleRight, &b), Some(2));
        assert_eq!(select_index(Relation::Furthest, &b), Some(3));
    }

    #[test]
    fn empty_and_any_select_nothing() {
        assert_eq!(select_index(Relation::LeftMost, &[]), None);
        assert_eq!(select_index(Relation::Any, &xs(&[1.0])), None);
    }
}
