//! Row-major 2D scalar grid shared by heatmaps, curvature and distance maps.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<S> {
    pub height: usize,
    pub width: usize,
    pub data: Vec<S>,
}

impl<S: Real> Grid<S> {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![S::zero(); height * width],
        }
    }

    pub fn from_data(height: usize, width: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), height * width);
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: S) {
        self.data[row * self.width + col] = v;
    }

    pub fn max_value(&self) -> S {
        self.data.iter().fold(S::zero(), |a, &b| a.max(b))
    }

    /// Bilinear sample at image coordinates (x, y), where pixel (i, j)
    /// has its center at (j + 0.5, i + 0.5). Out-of-range samples are 0.
    pub fn sample_bilinear(&self, x: S, y: S) -> S {
        let half = S::c(0.5);
        let u = x - half;
        let v = y - half;
        let c0 = u.floor();
        let r0 = v.floor();
        let fu = u - c0;
        let fv = v - r0;
        let mut acc = S::zero();
        for (dr, wr) in [(0i64, S::one() - fv), (1, fv)] {
            for (dc, wc) in [(0i64, S::one() - fu), (1, fu)] {
                let r = r0.to_f64c() as i64 + dr;
                let c = c0.to_f64c() as i64 + dc;
                if r >= 0 && c >= 0 && (r as usize) < self.height && (c as usize) < self.width {
                    acc = acc + wr * wc * self.get(r as usize, c as usize);
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_at_pixel_centers_is_exact() {
        let mut g = Grid::<f64>::zeros(3, 3);
        g.set(1, 2, 5.0);
        assert_eq!(g.sample_bilinear(2.5, 1.5), 5.0);
        assert_eq!(g.sample_bilinear(2.0, 1.5), 2.5);
        assert_eq!(g.sample_bilinear(-10.0, 1.0), 0.0);
    }
}
