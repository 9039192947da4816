//! Binary 3D attention maps, their file format and 2D projection.

use super::detect::InstanceRecord;
use crate::geom::{dilate_mask, project, Camera, GeomError, Mask2D, Point3};
use crate::scene::{FeatureCloud, SceneError};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const ATT_MAGIC: &[u8; 4] = b"ATT1";
pub const DEFAULT_DILATION: usize = 2;

/// One flag per cloud point, in cloud order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionMap {
    pub values: Vec<bool>,
}

impl AttentionMap {
    pub fn empty(len: usize) -> Self {
        Self { values: vec![false; len] }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(len);
        for i in indices {
            m.values[i] = true;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i]).collect()
    }

    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn points(&self, cloud: &FeatureCloud) -> Vec<Point3> {
        self.support().into_iter().map(|i| cloud.points[i]).collect()
    }
}

/// Attention on exactly the union of the two instances' points.
pub fn build_attention(cloud: &FeatureCloud, pick: &InstanceRecord, place: &InstanceRecord) -> AttentionMap {
    AttentionMap::from_indices(cloud.len(), pick.indices.iter().chain(&place.indices).copied())
}

pub fn write_attention(map: &AttentionMap, mut w: impl Write) -> Result<(), SceneError> {
    let mut buf = Vec::with_capacity(8 + map.len());
    buf.extend_from_slice(ATT_MAGIC);
    buf.extend_from_slice(&(map.len() as u32).to_le_bytes());
    buf.extend(map.values.iter().map(|&v| v as u8));
    w.write_all(&buf).map_err(|e| SceneError::Io(e.to_string()))
}

pub fn read_attention(mut r: impl Read) -> Result<AttentionMap, SceneError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data).map_err(|e| SceneError::Io(e.to_string()))?;
    let bad = |m: &str| SceneError::Format(m.to_string());
    if data.len() < 8 || &data[..4] != ATT_MAGIC {
        return Err(bad("bad magic, expected ATT1"));
    }
    let m = u32::from_le_bytes(data[4..8].try_into().expect("4 bytes")) as usize;
    if data.len() != 8 + m {
        return Err(bad("attention length does not match header"));
    }
    data[8..]
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(bad("attention values must be 0 or 1")),
        })
        .collect::<Result<_, _>>()
        .map(|values| AttentionMap { values })
}

/// Four corner cameras and one overhead camera around the workspace.
pub fn camera_rig(width: usize, height: usize, focal: f64) -> Result<Vec<Camera>, GeomError> {
    let target = Point3::new(0.0, 0.05, 0.0);
    let up = Point3::new(0.0, 0.0, 1.0);
    let mut cams = Vec::with_capacity(5);
    for (x, y) in [(-0.7, -0.6), (0.7, -0.6), (-0.7, 0.7), (0.7, 0.7)] {
        cams.push(Camera::look_at(Point3::new(x, y, 0.6), target, up, focal, focal, width, height)?);
    }
    cams.push(Camera::look_at(Point3::new(0.0, 0.05, 1.2), target, Point3::new(0.0, 1.0, 0.0), focal, focal, width, height)?);
    Ok(cams)
}

/// Projects attended points into each camera, marks the pixels they land on
/// and dilates the result.
pub fn project_attention_2d(map: &AttentionMap, cloud: &FeatureCloud, cameras: &[Camera], dilation_radius: usize) -> Vec<Mask2D> {
    let pts = map.points(cloud);
    cameras
        .iter()
        .map(|cam| {
            let mut mask = Mask2D::zeros(cam.width, cam.height);
            for p in project(&pts, cam) {
                if p.visible {
                    mask.set(p.u.floor() as usize, p.v.floor() as usize, true);
                }
            }
            dilate_mask(&mask, dilation_radius)
        })
        .collect()
}
