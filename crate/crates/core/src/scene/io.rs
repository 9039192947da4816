//! Scene JSON and the binary feature-cloud format.

use super::render::FeatureCloud;
use super::{Category, Scene, SceneError};
use crate::geom::Point3;
use std::io::{Read, Write};

pub const FCD_MAGIC: &[u8; 4] = b"FCD1";

/// Serializes a [`Point3`] as a `[x, y, z]` array.
pub mod point_array {
    use crate::geom::Point3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Point3, s: S) -> Result<S::Ok, S::Error> {
        p.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point3, D::Error> {
        <[f64; 3]>::deserialize(d).map(Point3::from_array)
    }
}

pub fn scene_to_json(scene: &Scene) -> String {
    serde_json::to_string_pretty(scene).expect("scene serializes")
}

pub fn read_scene_json(text: &str) -> Result<Scene, SceneError> {
    serde_json::from_str(text).map_err(|e| SceneError::Format(e.to_string()))
}

fn io_err(e: std::io::Error) -> SceneError {
    SceneError::Io(e.to_string())
}

pub fn write_feature_cloud(cloud: &FeatureCloud, mut w: impl Write) -> Result<(), SceneError> {
    let m = cloud.len();
    let mut buf = Vec::with_capacity(12 + m * (12 + 4 * cloud.feature_dim + 5));
    buf.extend_from_slice(FCD_MAGIC);
    buf.extend_from_slice(&(m as u32).to_le_bytes());
    buf.extend_from_slice(&(cloud.feature_dim as u32).to_le_bytes());
    for p in &cloud.points {
        for c in p.to_array() {
            buf.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    for &f in &cloud.features {
        buf.extend_from_slice(&(f as f32).to_le_bytes());
    }
    for &g in &cloud.gt_instance {
        buf.extend_from_slice(&g.to_le_bytes());
    }
    buf.extend(cloud.gt_category.iter().map(|c| c.index() as u8));
    w.write_all(&buf).map_err(io_err)
}

struct Cursor<'a> {
    data: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SceneError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| SceneError::Format("truncated feature cloud".into()))?;
        let s = &self.data[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 4], SceneError> {
        Ok(self.take(4)?.try_into().expect("4 bytes"))
    }
}

/// Reads an FCD1 stream. Values come back widened from `f32`.
pub fn read_feature_cloud(mut r: impl Read) -> Result<FeatureCloud, SceneError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data).map_err(io_err)?;
    let mut c = Cursor { data: &data, at: 0 };
    if c.take(4)? != FCD_MAGIC {
        return Err(SceneError::Format("bad magic, expected FCD1".into()));
    }
    let m = u32::from_le_bytes(c.word()?) as usize;
    let f = u32::from_le_bytes(c.word()?) as usize;
    let mut points = Vec::with_capacity(m);
    for _ in 0..m {
        let mut xyz = [0.0; 3];
        for v in &mut xyz {
            *v = f32::from_le_bytes(c.word()?) as f64;
        }
        points.push(Point3::from_array(xyz));
    }
    let mut features = Vec::with_capacity(m * f);
    for _ in 0..m * f {
        features.push(f32::from_le_bytes(c.word()?) as f64);
    }
    let mut gt_instance = Vec::with_capacity(m);
    for _ in 0..m {
        gt_instance.push(i32::from_le_bytes(c.word()?));
    }
    let gt_category = c
        .take(m)?
        .iter()
        .map(|&b| Category::from_index(b as usize).ok_or_else(|| SceneError::Format(format!("unknown category code {b}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if c.at != data.len() {
        return Err(SceneError::Format("trailing bytes after feature cloud".into()));
    }
    Ok(FeatureCloud { points, feature_dim: f, features, gt_instance, gt_category })
}
