use super::{GeomError, Point3};
use serde::{Deserialize, Serialize};

/// Whether nearest-neighbor distances enter the mean squared or as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamferVariant {
    #[default]
    Squared,
    Unsquared,
}

/// Symmetric Chamfer distance with squared nearest-neighbor distances:
/// mean over `a` of the squared distance to the closest point of `b`, plus
/// the same from `b` to `a`.
pub fn chamfer_distance(a: &[Point3], b: &[Point3]) -> Result<f64, GeomError> {
    chamfer_distance_with(a, b, ChamferVariant::Squared)
}

pub fn chamfer_distance_with(a: &[Point3], b: &[Point3], variant: ChamferVariant) -> Result<f64, GeomError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::EmptyPointSet);
    }
    Ok(directed(a, b, variant) + directed(b, a, variant))
}

fn directed(from: &[Point3], to: &[Point3], variant: ChamferVariant) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            let d2 = to.iter().map(|q| p.dist2(*q)).fold(f64::INFINITY, f64::min);
            match variant {
                ChamferVariant::Squared => d2,
                ChamferVariant::Unsquared => d2.sqrt(),
            }
        })
        .sum();
    total / from.len() as f64
}
