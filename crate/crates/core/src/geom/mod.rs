//! Geometric primitives shared by the perception, simulation and policy code:
//! farthest point sampling, DBSCAN, Chamfer distance, pinhole projection and
//! binary mask dilation.
//!
//! Everything here is a pure function of its inputs. Distances are Euclidean
//! and in meters.

mod camera;
mod chamfer;
mod dbscan;
mod fps;
mod mask;

pub use camera::{back_project, back_project_pixel, fuse_depth_views, project, Camera, DepthImage, Projection};
pub use chamfer::{chamfer_distance, chamfer_distance_with, ChamferVariant};
pub use dbscan::{dbscan, ClusterLabels, NOISE};
pub use fps::fps_downsample;
pub use mask::{dilate_mask, Mask2D};

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeomError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
}

/// A point in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Ordered, index-addressable cloud. Indices identify points across the
/// whole pipeline, so nothing here reorders a cloud in place.
pub type PointSet = Vec<Point3>;

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist2(self, o: Point3) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        let dz = self.z - o.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(self, o: Point3) -> f64 {
        self.dist2(o).sqrt()
    }

    /// Horizontal (XY) distance.
    pub fn dist_xy(self, o: Point3) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2)).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Arithmetic mean of a non-empty set of points.
pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Point3> {
    let mut sum = Point3::ORIGIN;
    let mut n = 0usize;
    for p in points {
        sum = sum + *p;
        n += 1;
    }
    (n > 0).then(|| sum * (1.0 / n as f64))
}
