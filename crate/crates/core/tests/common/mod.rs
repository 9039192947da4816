//! Brute-force oracles and input generators shared by the integration tests.
#![allow(dead_code)]

use deskbench::geom::Point3;
use deskbench::grounding::Relation;
use deskbench::instructions::{Column, Row};
use proptest::prelude::*;
use std::collections::BTreeSet;

/// Farthest point sampling by recomputing every min-distance from scratch:
/// O(M^2 k).
pub fn fps_oracle(points: &[Point3], k: usize, start: usize) -> Vec<usize> {
    let m = points.len();
    if m == 0 || k == 0 {
        return Vec::new();
    }
    let mut selected = vec![start.min(m - 1)];
    while selected.len() < k.min(m) {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if selected.contains(&i) {
                continue;
            }
            let d = selected.iter().map(|&s| points[i].dist2(points[s])).fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((i, d));
            }
        }
        selected.push(best.expect("an unselected point remains").0);
    }
    selected
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the graph joining points at most `eps` apart.
pub fn components_oracle(points: &[Point3], eps: f64) -> BTreeSet<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if points[i].dist2(points[j]) <= eps * eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, Vec<usize>>::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Symmetric squared-distance Chamfer by exhaustive double loops.
pub fn chamfer_oracle(a: &[Point3], b: &[Point3]) -> f64 {
    let directed = |x: &[Point3], y: &[Point3]| {
        let mut total = 0.0;
        for p in x {
            let mut best = f64::INFINITY;
            for q in y {
                let d = (p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2);
                if d < best {
                    best = d;
                }
            }
            total += best;
        }
        total / x.len() as f64
    };
    directed(a, b) + directed(b, a)
}

/// First index whose key equals the extreme key.
fn first_extreme(keys: &[f64], want_max: bool) -> usize {
    let target = if want_max { keys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) } else { keys.iter().cloned().fold(f64::INFINITY, f64::min) };
    keys.iter().position(|&k| k == target).expect("non-empty")
}

/// The listing's middle rule: threshold = (max + min) / 2, then the entry
/// closest to it, lowest index on ties.
pub fn middle_listing(values: &[f64]) -> usize {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = (max + min) / 2.0;
    let gaps: Vec<f64> = values.iter().map(|v| (v - threshold).abs()).collect();
    first_extreme(&gaps, false)
}

/// Brute-force selection for the relations with a closed-form definition.
pub fn relation_oracle(relation: Relation, points: &[Point3]) -> Option<usize> {
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let r: Vec<f64> = points.iter().map(|p| (p.x * p.x + p.y * p.y + p.z * p.z).sqrt()).collect();
    Some(match relation {
        Relation::LeftMost | Relation::Column(Column::Left) => first_extreme(&xs, false),
        Relation::RightMost | Relation::Column(Column::Right) => first_extreme(&xs, true),
        Relation::FrontMost | Relation::Row(Row::Front) => first_extreme(&ys, false),
        Relation::BackMost | Relation::Row(Row::Back) => first_extreme(&ys, true),
        Relation::Nearest => first_extreme(&r, false),
        Relation::Furthest => first_extreme(&r, true),
        Relation::Column(Column::Middle) => middle_listing(&xs),
        Relation::Row(Row::Middle) => middle_listing(&ys),
        _ => return None,
    })
}

pub const ORACLE_RELATIONS: [Relation; 12] = [
    Relation::LeftMost,
    Relation::RightMost,
    Relation::FrontMost,
    Relation::BackMost,
    Relation::Nearest,
    Relation::Furthest,
    Relation::Column(Column::Left),
    Relation::Column(Column::Middle),
    Relation::Column(Column::Right),
    Relation::Row(Row::Front),
    Relation::Row(Row::Middle),
    Relation::Row(Row::Back),
];

/// Points on a 1 cm lattice, so ties and exact duplicates occur.
pub fn lattice_cloud(max: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::vec((-30i32..30, -30i32..30, 0i32..15), 1..=max)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| Point3::new(x as f64 * 0.01, y as f64 * 0.01, z as f64 * 0.01)).collect())
}

/// Points with continuous coordinates in a desk-sized box.
pub fn continuous_cloud(max: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::vec((-0.4f64..0.4, -0.4f64..0.4, 0.0f64..0.3), 1..=max).prop_map(|v| v.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect())
}

pub fn cloud(max: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop_oneof![lattice_cloud(max), continuous_cloud(max)]
}
