//! Spectral machinery on a periodic grid: DFT plans, the exact free flow,
//! spectral derivatives, and the free Schrödinger kernel on the line.
//!
//! Dispersion is `omega(k) = k^2`: the mode `e^{ikx}` evolves to
//! `e^{ikx} e^{-ik^2 t}`, the flow of `i du/dt = -u''`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid1D;
use super::wave::WaveFunction;
use crate::error::{Error, Result};

/// Dispersion relation of the free flow.
#[derive(Debug, Clone, Copy, Default)]
pub struct DispersionConvention;

impl DispersionConvention {
    pub const fn omega(k: f64) -> f64 {
        k * k
    }

    /// Phase acquired by mode `k` over time `t`.
    pub fn phase(k: f64, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -Self::omega(k) * t)
    }
}

/// Cached forward/inverse transforms and wavenumbers for one grid.
///
/// The forward transform is the unnormalized DFT; `inverse` divides by `M`.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        let m = grid.num_points();
        Self {
            grid,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            k: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub fn forward_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub fn inverse_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
        let s = 1.0 / self.grid.num_points() as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.inverse_with_scratch(buf, &mut scratch);
    }

    /// DFT coefficients of `psi` (unnormalized, internal scaling).
    pub fn coefficients(&self, psi: &WaveFunction) -> Vec<Complex64> {
        let mut buf = psi.values().to_vec();
        self.forward(&mut buf);
        buf
    }

    /// Multiplies DFT coefficients by `e^{-i k^2 dt}`.
    pub fn apply_free_phase(&self, coeffs: &mut [Complex64], dt: f64) {
        for (c, &k) in coeffs.iter_mut().zip(&self.k) {
            *c *= DispersionConvention::phase(k, dt);
        }
    }

    /// Exact free evolution on the periodic grid.
    pub fn free_step(&self, psi: &WaveFunction, dt: f64) -> WaveFunction {
        let mut buf = psi.values().to_vec();
        self.forward(&mut buf);
        self.apply_free_phase(&mut buf, dt);
        self.inverse(&mut buf);
        WaveFunction::from_parts(self.grid, buf)
    }

    /// Spectral derivative; the Nyquist mode is dropped.
    pub fn derivative(&self, psi: &WaveFunction) -> WaveFunction {
        let mut buf = psi.values().to_vec();
        self.forward(&mut buf);
        let nyq = self.grid.nyquist_index();
        for (m, (c, &k)) in buf.iter_mut().zip(&self.k).enumerate() {
            *c = if m == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                *c * Complex64::new(0.0, k)
            };
        }
        self.inverse(&mut buf);
        WaveFunction::from_parts(self.grid, buf)
    }

    /// `||psi'||^2` by Parseval, Nyquist mode dropped.
    pub fn kinetic_norm_sq(&self, psi: &WaveFunction) -> f64 {
        let coeffs = self.coefficients(psi);
        self.kinetic_norm_sq_from_coefficients(&coeffs)
    }

    pub fn kinetic_norm_sq_from_coefficients(&self, coeffs: &[Complex64]) -> f64 {
        let nyq = self.grid.nyquist_index();
        let s: f64 = coeffs
            .iter()
            .zip(&self.k)
            .enumerate()
            .filter(|(m, _)| *m != nyq)
            .map(|(_, (c, k))| k * k * c.norm_sqr())
            .sum();
        s * self.grid.spacing() / self.grid.num_points() as f64
    }

    /// `(U(t) psi)(0)`: the free evolution read at the origin node.
    pub fn free_at_origin_from_coefficients(&self, coeffs: &[Complex64], t: f64) -> Complex64 {
        // Node M/2 carries the factor e^{2 pi i m (M/2) / M} = (-1)^m.
        let s: Complex64 = coeffs
            .iter()
            .zip(&self.k)
            .enumerate()
            .map(|(m, (c, &k))| {
                let z = c * DispersionConvention::phase(k, t);
                if m % 2 == 0 {
                    z
                } else {
                    -z
                }
            })
            .sum();
        s / self.grid.num_points() as f64
    }
}

/// Exact free evolution of `psi` over `dt` (any sign).
pub fn free_step(psi: &WaveFunction, dt: f64) -> WaveFunction {
    Spectral::new(*psi.grid()).free_step(psi, dt)
}

/// Free Schrödinger kernel on the line, `e^{i x^2/(4t)} / sqrt(4 pi i t)`,
/// principal branch of the square root.
pub fn free_kernel(t: f64, x: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Err(Error::SingularTime);
    }
    if !(t.is_finite() && x.is_finite()) {
        return Err(Error::invalid("t, x", "must be finite"));
    }
    let denom = Complex64::new(0.0, 4.0 * PI * t).sqrt();
    Ok(Complex64::from_polar(1.0, x * x / (4.0 * t)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_grid() -> (Grid1D, WaveFunction) {
        let g = Grid1D::new(20.0, 512).unwrap();
        let phi = WaveFunction::gaussian(g, 1.0).unwrap();
        (g, phi)
    }

    /// Closed-form free Gaussian: with a(t) = sigma^2 + i t,
    /// u(t, x) = A sigma a^{-1/2} exp(-x^2 / (4 a)).
    fn free_gaussian(sigma: f64, t: f64, x: f64) -> Complex64 {
        let amp = (2.0 * PI * sigma * sigma).powf(-0.25);
        let a = Complex64::new(sigma * sigma, t);
        amp * sigma / a.sqrt() * (-(x * x) / (4.0 * a)).exp()
    }

    #[test]
    fn zero_step_is_identity() {
        let (_, phi) = gaussian_grid();
        assert!(free_step(&phi, 0.0).sup_distance(&phi).unwrap() < 1e-15);
    }

    #[test]
    fn reversible() {
        let (_, phi) = gaussian_grid();
        let back = free_step(&free_step(&phi, 0.37), -0.37);
        assert!(back.sup_distance(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn matches_closed_form_gaussian() {
        let (g, phi) = gaussian_grid();
        let u = free_step(&phi, 0.5);
        for (j, x) in g.nodes().enumerate() {
            assert!(
                (u.values()[j] - free_gaussian(1.0, 0.5, x)).norm() < 1e-8,
                "x = {x}"
            );
        }
    }

    #[test]
    fn free_at_origin_agrees_with_full_step() {
        let (g, phi) = gaussian_grid();
        let sp = Spectral::new(g);
        let coeffs = sp.coefficients(&phi);
        for t in [0.0, 0.1, 0.8] {
            let a = sp.free_at_origin_from_coefficients(&coeffs, t);
            let b = sp.free_step(&phi, t).at_origin();
            assert!((a - b).norm() < 1e-14);
            assert!((a - free_gaussian(1.0, t, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let (g, phi) = gaussian_grid();
        let d = Spectral::new(g).derivative(&phi);
        for (j, x) in g.nodes().enumerate() {
            let exact = -x / 2.0 * phi.values()[j];
            assert!((d.values()[j] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_values() {
        let t = 0.3;
        let k0 = free_kernel(t, 0.0).unwrap();
        let expected = Complex64::new(0.0, 4.0 * PI * t).sqrt().inv();
        assert!((k0 - expected).norm() < 1e-15);
        for x in [0.2, 1.0, 3.5] {
            let a = free_kernel(t, x).unwrap();
            assert!((a - free_kernel(t, -x).unwrap()).norm() < 1e-15);
            assert!((a.norm() - (4.0 * PI * t).powf(-0.5)).abs() < 1e-14);
        }
        assert!(matches!(free_kernel(0.0, 1.0), Err(Error::SingularTime)));
        // Negative times take the principal branch: sqrt(-4 pi i |t|) has argument -pi/4.
        let neg = free_kernel(-t, 0.0).unwrap();
        assert!((neg.arg() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_semigroup_by_quadrature() {
        // The kernel is entire in its spatial argument, so the convolution
        // integral over y may be moved to y = y0 + e^{i pi/4} u, where the
        // combined phase becomes a decaying Gaussian in u.
        fn kernel_c(t: f64, w: Complex64) -> Complex64 {
            (Complex64::i() * w * w / (4.0 * t)).exp() / Complex64::new(0.0, 4.0 * PI * t).sqrt()
        }
        for x in [-0.7, 0.3, 1.0] {
            assert!(
                (kernel_c(0.2, Complex64::new(x, 0.0)) - free_kernel(0.2, x).unwrap()).norm()
                    < 1e-15
            );
        }
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        for (t, s) in [(0.1, 0.1), (0.1, 0.2), (0.2, 0.1), (0.2, 0.2)] {
            for d in [0.0, 0.5, -1.0, 1.0] {
                let (x, z) = (d + 0.25, 0.25);
                let y0 = z + (x - z) * s / (t + s);
                let n = 4000;
                let span = 6.0;
                let du = 2.0 * span / n as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..=n {
                    let u = -span + i as f64 * du;
                    let y = y0 + rot * u;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    acc += w * kernel_c(t, Complex64::new(x, 0.0) - y) * kernel_c(s, y - z);
                }
                acc *= du * rot;
                let exact = free_kernel(t + s, x - z).unwrap();
                assert!(
                    (acc - exact).norm() < 1e-6,
                    "t={t} s={s} x-z={d}: {acc} vs {exact}"
                );
            }
        }
    }
}
