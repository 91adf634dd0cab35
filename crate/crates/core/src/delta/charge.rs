//! The charge equation for `q(t) = phi_t(0)`.
//!
//! Evaluating the Duhamel formula at the origin with `U(t - s, 0) =
//! (4 pi i (t - s))^{-1/2}` gives
//!
//! `q(t) = (U(t) phi)(0) - kappa int_0^t (t - s)^{-1/2} |q(s)|^2 q(s) ds`,
//! `kappa = i mu / sqrt(4 pi i)`.
//!
//! The density `g = |q|^2 q` is interpolated linearly between mesh nodes and
//! integrated exactly against the Abel kernel.

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::sqrt_4pi_i;
use crate::error::{Error, Result};
use crate::onebody::{Spectral, WaveFunction};

pub const NODE_TOLERANCE: f64 = 1e-12;
pub const MAX_NODE_ITERATIONS: usize = 50;
pub const DAMPING: f64 = 0.5;

/// Exact integrals of the Abel kernel over the cells of a uniform mesh.
#[derive(Debug, Clone, Copy)]
pub struct AbelWeights {
    step: f64,
}

impl AbelWeights {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(
                "delta",
                format!("charge mesh step must be positive, got {step}"),
            ));
        }
        Ok(Self { step })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `int_{t_j}^{t_{j+1}} (t_n - s)^{-1/2} ds` for `j < n`.
    pub fn weight(&self, n: usize, j: usize) -> f64 {
        assert!(j < n, "cell {j} is not before node {n}");
        2.0 * self.step.sqrt() * (((n - j) as f64).sqrt() - ((n - j - 1) as f64).sqrt())
    }

    pub fn weights(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.weight(n, j)).collect()
    }

    /// Hat-function weights `(A_k, B_k)` of the cell `k = n - j` cells back:
    /// the kernel integrated against the left and right linear interpolants.
    pub fn linear(&self, k: usize) -> (f64, f64) {
        debug_assert!(k >= 1);
        let kf = k as f64;
        let (a, b) = (kf.sqrt(), (kf - 1.0).sqrt());
        let sd = self.step.sqrt();
        let total = 2.0 * sd * (a - b);
        let right = sd * (2.0 * kf * (a - b) - (2.0 / 3.0) * (kf * a - (kf - 1.0) * b));
        (total - right, right)
    }
}

/// Charges `q_n` at `t_n = n * step`, with the free source `f_n = (U(t_n) phi)(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeTrajectory {
    step: f64,
    mu: f64,
    q: Vec<Complex64>,
    f: Vec<Complex64>,
}

impl ChargeTrajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn charges(&self) -> &[Complex64] {
        &self.q
    }

    pub fn sources(&self) -> &[Complex64] {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.q.len()).map(|n| self.time(n)).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.q.len() - 1)
    }

    /// Mesh index of `t`; fails unless `t` is a node within the trajectory.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.step;
        let n = x.round();
        let off = || Error::OffMesh {
            t,
            step: self.step,
            nodes: self.q.len(),
        };
        if !x.is_finite() || n < 0.0 || (x - n).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(off());
        }
        let n = n as usize;
        if n >= self.q.len() {
            return Err(off());
        }
        Ok(n)
    }

    pub(crate) fn densities(&self) -> Vec<Complex64> {
        self.q.iter().map(|q| q.norm_sqr() * q).collect()
    }
}

/// `(U(t) phi)(0)`, computed spectrally.
pub fn free_at_origin(phi: &WaveFunction, t: f64) -> Complex64 {
    if t == 0.0 {
        return phi.at_origin();
    }
    let sp = Spectral::new(*phi.grid());
    sp.free_at_origin_from_coefficients(&sp.coefficients(phi), t)
}

pub(crate) fn free_sources(phi: &WaveFunction, step: f64, n_max: usize) -> Vec<Complex64> {
    let sp = Spectral::new(*phi.grid());
    let coeffs = sp.coefficients(phi);
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            if n == 0 {
                phi.at_origin()
            } else {
                sp.free_at_origin_from_coefficients(&coeffs, n as f64 * step)
            }
        })
        .collect()
}

pub fn solve_charge(
    phi: &WaveFunction,
    mu: f64,
    step: f64,
    n_max: usize,
) -> Result<ChargeTrajectory> {
    let weights = AbelWeights::new(step)?;
    if !mu.is_finite() {
        return Err(Error::invalid("mu", "must be finite"));
    }
    let f = free_sources(phi, step, n_max);
    if mu == 0.0 {
        return Ok(ChargeTrajectory {
            step,
            mu,
            q: f.clone(),
            f,
        });
    }
    let kappa = Complex64::i() * mu / sqrt_4pi_i();
    let ab: Vec<(f64, f64)> = (1..=n_max).map(|k| weights.linear(k)).collect();

    let mut q = Vec::with_capacity(n_max + 1);
    let mut g: Vec<Complex64> = Vec::with_capacity(n_max + 1);
    q.push(f[0]);
    g.push(f[0].norm_sqr() * f[0]);

    for n in 1..=n_max {
        // Everything but the implicit endpoint term B_1 g_n.
        let mut hist = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            let (a, b) = ab[k - 1];
            hist += a * g[n - k];
            if k >= 2 {
                hist += b * g[n - k + 1];
            }
        }
        let b1 = ab[0].1;
        let rhs = f[n] - kappa * hist;
        let map = |z: Complex64| rhs - kappa * b1 * z.norm_sqr() * z;

        let mut z = if n >= 2 {
            2.0 * q[n - 1] - q[n - 2]
        } else {
            q[0]
        };
        let mut residual = (z - map(z)).norm();
        let mut iters = 0;
        while residual > NODE_TOLERANCE {
            if iters == MAX_NODE_ITERATIONS || !residual.is_finite() {
                return Err(Error::NonConvergence { node: n, residual });
            }
            z = (1.0 - DAMPING) * z + DAMPING * map(z);
            residual = (z - map(z)).norm();
            iters += 1;
        }
        q.push(z);
        g.push(z.norm_sqr() * z);
    }
    Ok(ChargeTrajectory { step, mu, q, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onebody::Grid1D;
    use std::f64::consts::PI;

    fn gaussian() -> WaveFunction {
        WaveFunction::gaussian(Grid1D::new(20.0, 1024).unwrap(), 1.0).unwrap()
    }

    fn sup(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn weights_telescope() {
        let w = AbelWeights::new(1e-3).unwrap();
        for n in [1, 2, 17, 1000] {
            let ws = w.weights(n);
            assert!(ws.iter().all(|&x| x > 0.0));
            let s: f64 = ws.iter().sum();
            assert!((s - 2.0 * (n as f64 * 1e-3).sqrt()).abs() < 1e-13);
        }
        assert!(AbelWeights::new(0.0).is_err());
    }

    #[test]
    fn hat_weights_integrate_linears_exactly() {
        // Check against a fine midpoint rule after the substitution s = t_n - u^2.
        let d = 0.01;
        let w = AbelWeights::new(d).unwrap();
        for k in [1usize, 2, 7] {
            let (a, b) = w.linear(k);
            let (lo, hi) = (((k - 1) as f64 * d).sqrt(), (k as f64 * d).sqrt());
            let n = 200_000;
            let du = (hi - lo) / n as f64;
            let (mut qa, mut qb) = (0.0, 0.0);
            for i in 0..n {
                let u = lo + (i as f64 + 0.5) * du;
                let right = (k as f64 * d - u * u) / d;
                qb += 2.0 * right * du;
                qa += 2.0 * (1.0 - right) * du;
            }
            assert!((a - qa).abs() < 1e-10 && (b - qb).abs() < 1e-10, "k = {k}");
            assert!((a + b - w.weight(k, 0)).abs() < 1e-15);
        }
        let (_, b1) = w.linear(1);
        assert!((b1 - 4.0 / 3.0 * d.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn free_at_origin_closed_form() {
        let phi = gaussian();
        assert_eq!(free_at_origin(&phi, 0.0), phi.at_origin());
        for t in [0.3, 1.0] {
            let a = Complex64::new(1.0, t);
            let exact = (2.0 * PI).powf(-0.25) / a.sqrt();
            assert!((free_at_origin(&phi, t) - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn free_case_is_the_source() {
        let phi = gaussian();
        let traj = solve_charge(&phi, 0.0, 1e-2, 100).unwrap();
        assert_eq!(traj.charges(), traj.sources());
        assert_eq!(traj.charges()[0], phi.at_origin());
    }

    #[test]
    fn phase_equivariance() {
        let phi = gaussian();
        let rot = Complex64::from_polar(1.0, 0.9);
        let a = solve_charge(&phi, 1.0, 1e-3, 500).unwrap();
        let b = solve_charge(&phi.scaled(rot), 1.0, 1e-3, 500).unwrap();
        let rotated: Vec<_> = a.charges().iter().map(|q| q * rot).collect();
        assert!(sup(&rotated, b.charges()) < 1e-11);
    }

    #[test]
    fn small_coupling_is_linear_in_mu() {
        let phi = gaussian();
        let free = solve_charge(&phi, 0.0, 1e-3, 1000).unwrap();
        let d2 = sup(
            solve_charge(&phi, 1e-2, 1e-3, 1000).unwrap().charges(),
            free.charges(),
        );
        let d3 = sup(
            solve_charge(&phi, 1e-3, 1e-3, 1000).unwrap().charges(),
            free.charges(),
        );
        let ratio = d2 / d3;
        assert!((9.5..10.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn self_convergence() {
        let phi = gaussian();
        let coarse = solve_charge(&phi, 1.0, 1e-3, 1000).unwrap();
        let mid = solve_charge(&phi, 1.0, 5e-4, 2000).unwrap();
        let fine = solve_charge(&phi, 1.0, 2.5e-4, 4000).unwrap();
        let at = |t: &ChargeTrajectory, every: usize| -> Vec<Complex64> {
            t.charges().iter().step_by(every).copied().collect()
        };
        let e1 = sup(&at(&coarse, 1), &at(&fine, 4));
        let e2 = sup(&at(&mid, 2), &at(&fine, 4));
        assert!(e1 <= 5e-5, "{e1:e}");
        // Richardson estimate of the order from three meshes.
        let order = ((e1 - e2) / e2).log2();
        assert!(order >= 1.0, "order {order}");
    }

    #[test]
    fn mesh_lookup() {
        let traj = solve_charge(&gaussian(), 1.0, 0.1, 10).unwrap();
        assert_eq!(traj.index_of(0.3).unwrap(), 3);
        assert_eq!(traj.index_of(1.0).unwrap(), 10);
        assert!(matches!(traj.index_of(0.25), Err(Error::OffMesh { .. })));
        assert!(matches!(traj.index_of(1.1), Err(Error::OffMesh { .. })));
        assert!((traj.final_time() - 1.0).abs() < 1e-15);
    }
}
