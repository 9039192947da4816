use crate::geom::{centroid, dbscan, Point3};
use crate::scene::{Category, Color, FeatureCloud, ReferenceFeature, Scene};
use std::collections::BTreeMap;

/// Smallest cluster kept as an instance.
pub const MIN_CLUSTER_POINTS: usize = 20;
pub const DEFAULT_SIM_THRESHOLD: f64 = 0.7;

/// One detected object: its member points and their centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub category: Category,
    /// Ascending indices into the feature cloud.
    pub indices: Vec<usize>,
    pub centroid: Point3,
    /// Most frequent ground-truth instance id among the members (lowest on
    /// ties). Only the attribute oracle reads it.
    pub majority_gt: i32,
}

impl InstanceRecord {
    pub fn points<'a>(&'a self, cloud: &'a FeatureCloud) -> impl Iterator<Item = Point3> + 'a {
        self.indices.iter().map(|&i| cloud.points[i])
    }
}

/// Cosine similarity of every point's feature to `reference`.
pub fn similarity(cloud: &FeatureCloud, reference: &ReferenceFeature) -> Vec<f64> {
    (0..cloud.len()).map(|i| cloud.feature(i).iter().zip(&reference.vector).map(|(a, b)| a * b).sum()).collect()
}

fn majority(ids: impl Iterator<Item = i32>) -> i32 {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for id in ids {
        *counts.entry(id).or_default() += 1;
    }
    let mut best = (-1, 0);
    for (id, n) in counts {
        if n > best.1 {
            best = (id, n);
        }
    }
    best.0
}

/// Points at least `sim_threshold` similar to the reference, grouped by
/// single-linkage clustering at radius `eps`; clusters smaller than
/// [`MIN_CLUSTER_POINTS`] are dropped. Sorted by centroid (x, then y, then z).
pub fn detect(cloud: &FeatureCloud, reference: &ReferenceFeature, sim_threshold: f64, eps: f64) -> Vec<InstanceRecord> {
    let sim = similarity(cloud, reference);
    let kept: Vec<usize> = (0..cloud.len()).filter(|&i| sim[i] >= sim_threshold).collect();
    let pts: Vec<Point3> = kept.iter().map(|&i| cloud.points[i]).collect();
    let labels = dbscan(&pts, eps, 1);
    let mut out: Vec<InstanceRecord> = labels
        .clusters()
        .into_iter()
        .filter(|c| c.len() >= MIN_CLUSTER_POINTS)
        .map(|c| {
            let mut indices: Vec<usize> = c.iter().map(|&j| kept[j]).collect();
            indices.sort_unstable();
            let centroid = centroid(indices.iter().map(|&i| &cloud.points[i])).expect("non-empty cluster");
            let majority_gt = majority(indices.iter().map(|&i| cloud.gt_instance[i]));
            InstanceRecord { category: reference.category, indices, centroid, majority_gt }
        })
        .collect();
    out.sort_by(|a, b| {
        a.centroid
            .x
            .total_cmp(&b.centroid.x)
            .then(a.centroid.y.total_cmp(&b.centroid.y))
            .then(a.centroid.z.total_cmp(&b.centroid.z))
            .then_with(|| a.indices.cmp(&b.indices))
    });
    out
}

/// Ground-truth color lookup by object id; the stand-in for asking a vision
/// model which labelled instance has an attribute.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeOracle {
    colors: BTreeMap<i32, Color>,
}

impl AttributeOracle {
    pub fn from_scene(scene: &Scene) -> Self {
        Self { colors: scene.objects.iter().map(|o| (o.id as i32, o.color)).collect() }
    }

    pub fn color(&self, gt: i32) -> Option<Color> {
        self.colors.get(&gt).copied()
    }
}

pub(super) fn first_with_color(instances: &[InstanceRecord], color: Color, oracle: &AttributeOracle) -> Option<usize> {
    instances.iter().position(|r| oracle.color(r.majority_gt) == Some(color))
}
