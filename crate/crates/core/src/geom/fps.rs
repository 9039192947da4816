use super::Point3;

/// Farthest point sampling.
///
/// Returns `min(k, cloud.len())` distinct indices in selection order. The
/// first index is `start`; every following one maximizes the distance to
/// the nearest already-selected point, ties going to the lowest index.
///
/// `start` is clamped to a valid index; an empty cloud yields an empty
/// selection.
pub fn fps_downsample(cloud: &[Point3], k: usize, start: usize) -> Vec<usize> {
    let m = cloud.len();
    let k = k.min(m);
    if k == 0 {
        return Vec::new();
    }
    let start = start.min(m - 1);
    let mut selected = Vec::with_capacity(k);
    let mut taken = vec![false; m];
    // Squared distance from every point to the selected set.
    let mut nearest = vec![f64::INFINITY; m];
    let mut current = start;
    for _ in 0..k {
        selected.push(current);
        taken[current] = true;
        let c = cloud[current];
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, p) in cloud.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d = p.dist2(c);
            if d < nearest[i] {
                nearest[i] = d;
            }
            if nearest[i] > best_d {
                best_d = nearest[i];
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        current = best;
    }
    selected
}
