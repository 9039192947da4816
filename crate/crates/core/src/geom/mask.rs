use serde::{Deserialize, Serialize};

/// Binary image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask2D {
    pub width: usize,
    pub height: usize,
    pub values: Vec<bool>,
}

impl Mask2D {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, values: vec![false; width * height] }
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self { width, height, values: vec![true; width * height] }
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.values[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, on: bool) {
        self.values[v * self.width + u] = on;
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    /// Pixel-wise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Mask2D) -> bool {
        self.values.iter().zip(&other.values).all(|(&a, &b)| !a || b)
    }
}

/// Dilation with a `(2r+1)²` square structuring element: a pixel is set iff
/// some set input pixel lies within Chebyshev distance `radius`.
///
/// Runs as two separable 1-D passes.
pub fn dilate_mask(mask: &Mask2D, radius: usize) -> Mask2D {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width, mask.height);
    let mut rows = Mask2D::zeros(w, h);
    for v in 0..h {
        for u in 0..w {
            let lo = u.saturating_sub(radius);
            let hi = (u + radius).min(w.saturating_sub(1));
            rows.set(u, v, (lo..=hi).any(|x| mask.get(x, v)));
        }
    }
    let mut out = Mask2D::zeros(w, h);
    for v in 0..h {
        let lo = v.saturating_sub(radius);
        let hi = (v + radius).min(h.saturating_sub(1));
        for u in 0..w {
            out.set(u, v, (lo..=hi).any(|y| rows.get(u, y)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_is_identity() {
        let mut m = Mask2D::zeros(5, 4);
        m.set(1, 2, true);
        assert_eq!(dilate_mask(&m, 0), m);
    }

    #[test]
    fn center_pixel_radius_one_is_3x3() {
        let mut m = Mask2D::zeros(7, 7);
        m.set(3, 3, true);
        let d = dilate_mask(&m, 1);
        for v in 0..7 {
            for u in 0..7 {
                let inside = (2..=4).contains(&u) && (2..=4).contains(&v);
                assert_eq!(d.get(u, v), inside, "({u},{v})");
            }
        }
        assert_eq!(d.count(), 9);
    }

    #[test]
    fn all_ones_is_fixed_point() {
        let m = Mask2D::ones(6, 3);
        assert_eq!(dilate_mask(&m, 4), m);
    }

    #[test]
    fn corner_pixel_clips_at_border() {
        let mut m = Mask2D::zeros(4, 4);
        m.set(0, 0, true);
        assert_eq!(dilate_mask(&m, 2).count(), 9);
    }
}
