use num_complex::Complex64;

use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Complex amplitudes of a one-body state sampled on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} amplitudes, got {}",
                    grid.num_points(),
                    values.len()
                ),
            ));
        }
        if values
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("wave function amplitudes".into()));
        }
        Ok(Self { grid, values })
    }

    /// Builds a state without the finiteness scan; callers guarantee it.
    pub(crate) fn from_parts(grid: Grid1D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_points());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.num_points()])
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    /// `(2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2))`, unit L² norm on the line.
    pub fn gaussian(grid: Grid1D, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        let amp = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        Self::from_fn(grid, |x| {
            Complex64::new(amp * (-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.grid.origin_index()]
    }

    /// `sqrt(h * sum |psi_j|^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `h * sum conj(self_j) * other_j`, conjugate-linear in `self`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.spacing())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|z| z * c).collect())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.l2_norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn l2_distance(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    pub fn sup_distance(&self, other: &WaveFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn ensure_normalized(&self, tol: f64) -> Result<()> {
        let n = self.l2_norm();
        if (n - 1.0).abs() > tol {
            Err(Error::NotNormalized(n))
        } else {
            Ok(())
        }
    }
}

pub fn l2_norm(psi: &WaveFunction) -> f64 {
    psi.l2_norm()
}

pub fn inner(f: &WaveFunction, g: &WaveFunction) -> Result<Complex64> {
    f.inner(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_and_constant_norms() {
        let g = Grid1D::new(1.0, 8).unwrap();
        assert_eq!(WaveFunction::zeros(g).l2_norm(), 0.0);
        let one = WaveFunction::from_fn(g, |_| c(1.0, 0.0)).unwrap();
        assert!((one.l2_norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_is_normalized() {
        // Tail mass beyond |x| = 20 for sigma = 1 is erfc(10*sqrt2) ~ 1e-89.
        let g = Grid1D::new(20.0, 512).unwrap();
        let phi = WaveFunction::gaussian(g, 1.0).unwrap();
        assert!((phi.l2_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inner_is_hermitian() {
        let g = Grid1D::new(3.0, 16).unwrap();
        let f = WaveFunction::from_fn(g, |x| c(x.cos(), x.sin() * 0.3)).unwrap();
        let h = WaveFunction::from_fn(g, |x| c((-x * x).exp(), x)).unwrap();
        let a = f.inner(&h).unwrap();
        let b = h.inner(&f).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        let ff = f.inner(&f).unwrap();
        assert!(ff.im.abs() < 1e-15 && (ff.re - f.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn disjoint_bumps_are_orthogonal() {
        let g = Grid1D::new(4.0, 64).unwrap();
        let left = WaveFunction::from_fn(g, |x| c(if x < -1.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let right = WaveFunction::from_fn(g, |x| c(if x > 1.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        assert_eq!(left.inner(&right).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = WaveFunction::zeros(Grid1D::new(1.0, 8).unwrap());
        let b = WaveFunction::zeros(Grid1D::new(1.0, 16).unwrap());
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid1D::new(1.0, 2).unwrap();
        assert!(WaveFunction::new(g, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
    }
}
