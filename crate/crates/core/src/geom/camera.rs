use super::{GeomError, Point3};
use serde::{Deserialize, Serialize};

/// Pinhole camera. The extrinsic maps world to camera coordinates,
/// `p_cam = R * p_world + t`, with the OpenCV axis convention (+Z forward,
/// +X right, +Y down).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

/// Result of projecting one point. Points behind the camera or outside the
/// image are kept and flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
    pub visible: bool,
}

/// Per-pixel camera-frame depth (meters), row-major; 0 means no return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl DepthImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, d: f64) {
        self.data[v * self.width + u] = d;
    }
}

impl Camera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize, rotation: [[f64; 3]; 3], translation: [f64; 3]) -> Result<Self, GeomError> {
        let cam = Self { fx, fy, cx, cy, width, height, rotation, translation };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target`; `up` fixes the roll.
    pub fn look_at(eye: Point3, target: Point3, up: Point3, fx: f64, fy: f64, width: usize, height: usize) -> Result<Self, GeomError> {
        let forward = normalize(target - eye).ok_or_else(|| GeomError::InvalidCamera("eye equals target".into()))?;
        // OpenCV: +Y points down in the image, so the camera's y axis is -up projected.
        let right = normalize(cross(forward, up)).ok_or_else(|| GeomError::InvalidCamera("up parallel to view".into()))?;
        let down = cross(forward, right);
        let rotation = [right.to_array(), down.to_array(), forward.to_array()];
        let t = [-right.dot(eye), -down.dot(eye), -forward.dot(eye)];
        Self::new(fx, fy, width as f64 / 2.0, height as f64 / 2.0, width, height, rotation, t)
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let bad = |m: &str| Err(GeomError::InvalidCamera(m.to_string()));
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return bad("focal lengths must be positive");
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64 && self.cy >= 0.0 && self.cy < self.height as f64) {
            return bad("principal point outside image");
        }
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-9 {
                    return bad("rotation is not orthonormal");
                }
            }
        }
        Ok(())
    }

    pub fn world_to_camera(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        let t = &self.translation;
        Point3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + t[0],
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + t[1],
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + t[2],
        )
    }

    pub fn camera_to_world(&self, c: Point3) -> Point3 {
        let r = &self.rotation;
        let t = &self.translation;
        let (x, y, z) = (c.x - t[0], c.y - t[1], c.z - t[2]);
        Point3::new(r[0][0] * x + r[1][0] * y + r[2][0] * z, r[0][1] * x + r[1][1] * y + r[2][1] * z, r[0][2] * x + r[1][2] * y + r[2][2] * z)
    }

    pub fn project_point(&self, p: Point3) -> Projection {
        let c = self.world_to_camera(p);
        let u = self.fx * c.x / c.z + self.cx;
        let v = self.fy * c.y / c.z + self.cy;
        let visible = c.z > 0.0 && u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64;
        Projection { u, v, depth: c.z, visible }
    }
}

fn cross(a: Point3, b: Point3) -> Point3 {
    Point3::new(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x)
}

fn normalize(p: Point3) -> Option<Point3> {
    let n = p.norm();
    (n > 1e-12).then(|| p * (1.0 / n))
}

pub fn project(points: &[Point3], cam: &Camera) -> Vec<Projection> {
    points.iter().map(|p| cam.project_point(*p)).collect()
}

/// Inverse of [`Camera::project_point`] for a (sub)pixel location and its depth.
pub fn back_project_pixel(u: f64, v: f64, depth: f64, cam: &Camera) -> Point3 {
    let c = Point3::new((u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth);
    cam.camera_to_world(c)
}

/// One world-frame point per pixel with positive depth, in row-major pixel order.
pub fn back_project(depth: &DepthImage, cam: &Camera) -> Vec<Point3> {
    let mut out = Vec::new();
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = depth.get(u, v);
            if d > 0.0 {
                out.push(back_project_pixel(u as f64, v as f64, d, cam));
            }
        }
    }
    out
}

/// Concatenates the back-projections of several views into a single cloud.
pub fn fuse_depth_views(views: &[(DepthImage, Camera)]) -> Vec<Point3> {
    views.iter().flat_map(|(d, c)| back_project(d, c)).collect()
}
