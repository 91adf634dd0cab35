use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)` with `M` nodes.
///
/// `M` is a power of two, so node `M/2` sits exactly at the origin (the
/// impurity location) and `h * M == 2L` holds without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    num_points: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(
                "L",
                format!("half width must be finite and positive, got {half_width}"),
            ));
        }
        if num_points < 2 || !num_points.is_power_of_two() {
            return Err(Error::invalid(
                "M",
                format!("number of points must be a power of two >= 2, got {num_points}"),
            ));
        }
        Ok(Self {
            half_width,
            num_points,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.num_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.num_points).map(move |j| self.node(j))
    }

    /// Index of the node at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.num_points / 2
    }

    /// Signed mode number of DFT bin `m` (symmetric ordering).
    pub fn mode_number(&self, m: usize) -> i64 {
        let n = self.num_points as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Wavenumber `k_m = pi * m / L` of DFT bin `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        PI * self.mode_number(m) as f64 / self.half_width
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.num_points).map(|m| self.wavenumber(m)).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.num_points / 2
    }

    pub(crate) fn ensure_same(&self, other: &Grid1D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_l: self.half_width,
                left_m: self.num_points,
                right_l: other.half_width,
                right_m: other.num_points,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_a_node() {
        for (l, m) in [(20.0, 1024), (1.0, 8), (3.7, 64), (160.0, 32768)] {
            let g = Grid1D::new(l, m).unwrap();
            assert_eq!(g.node(g.origin_index()), 0.0);
            assert_eq!(g.spacing() * m as f64, 2.0 * l);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid1D::new(1.0, 12).is_err());
        assert!(Grid1D::new(1.0, 1).is_err());
        assert!(Grid1D::new(0.0, 8).is_err());
        assert!(Grid1D::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn wavenumbers_are_symmetric() {
        let g = Grid1D::new(2.0, 8).unwrap();
        let k = g.wavenumbers();
        let step = PI / 2.0;
        let expected = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in k.iter().zip(expected) {
            assert!((a - b * step).abs() < 1e-15);
        }
    }
}
