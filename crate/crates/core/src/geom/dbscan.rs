use super::Point3;
use std::collections::HashMap;

/// Label carried by points that belong to no cluster.
pub const NOISE: i32 = -1;

/// Per-point cluster labels. Non-noise labels form the contiguous range
/// `0..cluster_count`, numbered in order of each cluster's lowest seed index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    pub labels: Vec<i32>,
    pub cluster_count: usize,
}

impl ClusterLabels {
    /// Member indices of each cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= 0 {
                out[l as usize].push(i);
            }
        }
        out
    }
}

/// Uniform grid with cell size `eps`; a radius query only has to look at
/// the 27 surrounding cells.
struct Grid<'a> {
    points: &'a [Point3],
    eps: f64,
    cells: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Point3], eps: f64) -> Self {
        let mut cells: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(*p, eps)).or_default().push(i);
        }
        Self { points, eps, cells }
    }

    fn key(p: Point3, eps: f64) -> (i64, i64, i64) {
        ((p.x / eps).floor() as i64, (p.y / eps).floor() as i64, (p.z / eps).floor() as i64)
    }

    fn neighbors(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = self.points[i];
        let (cx, cy, cz) = Self::key(p, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cell) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(cell.iter().copied().filter(|&j| self.points[j].dist2(p) <= eps2));
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

/// DBSCAN with Euclidean distance. A point is a core point when at least
/// `min_pts` points (itself included) lie within `eps`. With `min_pts == 1`
/// the clusters are exactly the connected components of the eps-graph.
pub fn dbscan(cloud: &[Point3], eps: f64, min_pts: usize) -> ClusterLabels {
    const UNSEEN: i32 = -2;
    assert!(eps > 0.0, "eps must be positive");
    let min_pts = min_pts.max(1);
    let grid = Grid::new(cloud, eps);
    let mut labels = vec![UNSEEN; cloud.len()];
    let mut cluster: i32 = 0;
    let mut nbrs = Vec::new();
    let mut inner = Vec::new();
    let mut queue = Vec::new();
    for i in 0..cloud.len() {
        if labels[i] != UNSEEN {
            continue;
        }
        grid.neighbors(i, &mut nbrs);
        if nbrs.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        labels[i] = cluster;
        queue.clear();
        queue.extend(nbrs.iter().copied().filter(|&j| j != i));
        while let Some(j) = queue.pop() {
            if labels[j] == NOISE {
                // border point
                labels[j] = cluster;
                continue;
            }
            if labels[j] != UNSEEN {
                continue;
            }
            labels[j] = cluster;
            grid.neighbors(j, &mut inner);
            if inner.len() >= min_pts {
                queue.extend(inner.iter().copied().filter(|&q| labels[q] == UNSEEN || labels[q] == NOISE));
            }
        }
        cluster += 1;
    }
    ClusterLabels { labels, cluster_count: cluster as usize }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_close_one_far() {
        let cloud = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.03, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        let l = dbscan(&cloud, 0.1, 1);
        assert_eq!(l.labels, vec![0, 0, 1]);
        assert_eq!(l.cluster_count, 2);
    }

    #[test]
    fn single_point() {
        for eps in [1e-6, 0.1, 10.0] {
            assert_eq!(dbscan(&[Point3::new(1.0, 2.0, 3.0)], eps, 1).labels, vec![0]);
        }
    }

    #[test]
    fn empty_cloud_has_no_clusters() {
        let l = dbscan(&[], 0.1, 5);
        assert!(l.labels.is_empty());
        assert_eq!(l.cluster_count, 0);
    }

    #[test]
    fn sparse_points_are_noise_with_min_pts() {
        let mut cloud: Vec<Point3> = (0..6).map(|i| Point3::new(0.01 * i as f64, 0.0, 0.0)).collect();
        cloud.push(Point3::new(5.0, 5.0, 5.0));
        let l = dbscan(&cloud, 0.015, 3);
        assert_eq!(l.labels[6], NOISE);
        assert!(l.labels[..6].iter().all(|&x| x == 0));
    }

    #[test]
    fn border_point_joins_cluster() {
        // 0..4 dense, point 4 only reachable from the core at index 3
        let cloud = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.01, 0.0, 0.0),
            Point3::new(0.02, 0.0, 0.0),
            Point3::new(0.03, 0.0, 0.0),
            Point3::new(0.045, 0.0, 0.0),
        ];
        let l = dbscan(&cloud, 0.0151, 3);
        assert_eq!(l.labels, vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn negative_coordinates_cross_cell_boundaries() {
        let cloud = vec![Point3::new(-0.001, 0.0, 0.0), Point3::new(0.001, 0.0, 0.0)];
        assert_eq!(dbscan(&cloud, 0.1, 1).labels, vec![0, 0]);
    }
}
