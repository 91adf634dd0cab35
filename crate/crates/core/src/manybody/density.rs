//! One-particle reduced density matrices and trace distances.
//!
//! Kernels are stored as their grid values `gamma(x_i, x_j)`. The operator
//! they represent acts as `(gamma f)(x_i) = h sum_j gamma(x_i, x_j) f(x_j)`, so
//! every spectral quantity (eigenvalues, trace norm) is computed from the
//! matrix `h * gamma`, never from `gamma` itself.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::ManyBodyState;
use crate::error::{Error, Result};
use crate::onebody::{Grid1D, Spectral, WaveFunction};
use crate::potentials::ScaledBump;

const UNIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    grid: Grid1D,
    kernel: DMatrix<Complex64>,
}

impl ReducedDensity {
    pub fn from_kernel(grid: Grid1D, kernel: DMatrix<Complex64>) -> Result<Self> {
        let m = grid.num_points();
        if kernel.shape() != (m, m) {
            return Err(Error::invalid(
                "gamma",
                format!("expected a {m}x{m} kernel, got {:?}", kernel.shape()),
            ));
        }
        Ok(Self { grid, kernel })
    }

    /// `|psi><psi|`.
    pub fn pure(psi: &WaveFunction) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.values());
        Self {
            grid: *psi.grid(),
            kernel: &v * v.adjoint(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Kernel values `gamma(x_i, x_j)`.
    pub fn kernel(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    /// `h * gamma`, the matrix of the operator.
    pub fn operator(&self) -> DMatrix<Complex64> {
        self.kernel.map(|z| z * self.grid.spacing())
    }

    /// `h sum_i gamma(x_i, x_i)`.
    pub fn trace(&self) -> f64 {
        self.grid.spacing() * self.kernel.diagonal().iter().map(|z| z.re).sum::<f64>()
    }

    pub fn hermitian_residual(&self) -> f64 {
        (&self.kernel - self.kernel.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Operator eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_part(self.operator())
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

fn hermitian_part(a: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `gamma(x, y) = h^{N-1} sum_Z Psi(x, Z) conj(Psi(y, Z))`.
pub fn reduced_density(psi: &ManyBodyState) -> ReducedDensity {
    let grid = *psi.grid();
    let m = grid.num_points();
    let rest = psi.amplitudes().len() / m;
    let a = DMatrix::from_row_slice(m, rest, psi.amplitudes());
    let w = grid.spacing().powi(psi.num_particles() as i32 - 1);
    let mut kernel = &a * a.adjoint();
    kernel *= Complex64::new(w, 0.0);
    ReducedDensity { grid, kernel }
}

/// Reduced density of the symmetrized defect state `phi^{(N-1)} v phi_perp`,
/// `((N-1)/N) |phi><phi| + (1/N) |phi_perp><phi_perp|`, for any `N >= 2`.
pub fn defect_reduced_density(
    phi: &WaveFunction,
    phi_perp: &WaveFunction,
    n: usize,
) -> Result<ReducedDensity> {
    if n < 2 {
        return Err(Error::invalid(
            "N",
            format!("need at least two particles, got {n}"),
        ));
    }
    phi.ensure_normalized(UNIT_TOLERANCE)?;
    phi_perp.ensure_normalized(UNIT_TOLERANCE)?;
    let overlap = phi.inner(phi_perp)?.norm();
    if overlap > UNIT_TOLERANCE {
        return Err(Error::NotOrthogonal(overlap));
    }
    let nf = n as f64;
    let kernel = ReducedDensity::pure(phi).kernel * Complex64::new((nf - 1.0) / nf, 0.0)
        + ReducedDensity::pure(phi_perp).kernel * Complex64::new(1.0 / nf, 0.0);
    Ok(ReducedDensity {
        grid: *phi.grid(),
        kernel,
    })
}

/// `Tr |gamma - |psi><psi||`.
pub fn trace_distance(gamma: &ReducedDensity, psi: &WaveFunction) -> Result<f64> {
    gamma.grid.ensure_same(psi.grid())?;
    psi.ensure_normalized(UNIT_TOLERANCE)?;
    let diff = (&gamma.kernel - ReducedDensity::pure(psi).kernel)
        * Complex64::new(gamma.grid.spacing(), 0.0);
    Ok(hermitian_part(diff)
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.abs())
        .sum())
}

/// Per-particle share of the `N`-body energy of `phi^{(x) N}`,
/// `(1/2)||phi'||^2 + (mu/4) ((N-1)/N) <w_eps, |phi|^2>^2`.
pub fn factorized_energy_per_particle(
    phi: &WaveFunction,
    b: &ScaledBump,
    mu: f64,
    n: usize,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("N", "need at least one particle"));
    }
    let c = b.sample(phi.grid())?.coupling(phi)?;
    let kin = Spectral::new(*phi.grid()).kinetic_norm_sq(phi);
    let nf = n as f64;
    Ok(0.5 * kin + 0.25 * mu * (nf - 1.0) / nf * c * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::fixtures::{odd_partner, unit_gaussian};
    use crate::manybody::{
        build_defect_state, build_factorized, energy_functional, evolve_manybody,
    };
    use crate::onebody::free_step;

    fn grid() -> Grid1D {
        Grid1D::new(4.0, 32).unwrap()
    }

    #[test]
    fn factorized_density_is_pure() {
        let phi = unit_gaussian(grid(), 0.5);
        for n in 2..=4 {
            let gamma = reduced_density(&build_factorized(&phi, n).unwrap());
            let pure = ReducedDensity::pure(&phi);
            let d = (gamma.kernel() - pure.kernel())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(d < 1e-10);
            let ev = gamma.eigenvalues();
            assert!((ev[0] - 1.0).abs() < 1e-10 && ev[1].abs() < 1e-10);
            assert!((gamma.trace() - 1.0).abs() < 1e-9);
            assert!(trace_distance(&gamma, &phi).unwrap() < 1e-10);
        }
    }

    #[test]
    fn defect_density_spectrum() {
        let g = grid();
        let phi = unit_gaussian(g, 0.5);
        let perp = odd_partner(g, 0.5);
        for n in 2..=4 {
            let nf = n as f64;
            let gamma = reduced_density(&build_defect_state(&phi, &perp, n).unwrap());
            let ev = gamma.eigenvalues();
            assert!((ev[0] - (nf - 1.0) / nf).abs() < 1e-10, "N = {n}: {ev:?}");
            assert!((ev[1] - 1.0 / nf).abs() < 1e-10);
            assert!(ev[2..].iter().all(|l| l.abs() < 1e-10));
            let analytic = defect_reduced_density(&phi, &perp, n).unwrap();
            let d = (gamma.kernel() - analytic.kernel())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(d < 1e-10);
            assert!((trace_distance(&gamma, &phi).unwrap() - 2.0 / nf).abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_pure_states_are_at_distance_two() {
        let g = grid();
        let phi = unit_gaussian(g, 0.5);
        let perp = odd_partner(g, 0.5);
        let d = trace_distance(&ReducedDensity::pure(&phi), &perp).unwrap();
        assert!((d - 2.0).abs() < 1e-10);
        assert!(matches!(
            trace_distance(
                &ReducedDensity::pure(&phi),
                &phi.scaled(Complex64::new(1.1, 0.0))
            ),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn density_invariants_along_interacting_flow() {
        let g = Grid1D::new(2.0, 32).unwrap();
        let b = ScaledBump::gaussian(0.5).unwrap();
        let phi = unit_gaussian(g, 0.3);
        let psi =
            evolve_manybody(&build_factorized(&phi, 3).unwrap(), &b, 10.0, 0.01, 0.5).unwrap();
        let gamma = reduced_density(&psi);
        assert!(gamma.hermitian_residual() < 1e-12);
        assert!((gamma.trace() - 1.0).abs() < 1e-8);
        assert!(*gamma.eigenvalues().last().unwrap() >= -1e-10);
        let d = trace_distance(&gamma, &free_step(&phi, 0.5)).unwrap();
        assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn per_particle_energy() {
        let g = Grid1D::new(2.0, 32).unwrap();
        let b = ScaledBump::gaussian(0.5).unwrap();
        let phi = unit_gaussian(g, 0.3);
        let kin = Spectral::new(g).kinetic_norm_sq(&phi);
        assert!(
            (factorized_energy_per_particle(&phi, &b, 0.0, 3).unwrap() - 0.5 * kin).abs() < 1e-15
        );
        let psi = build_factorized(&phi, 3).unwrap();
        let direct = energy_functional(&psi, &b, 1.0).unwrap() / 3.0;
        assert!((factorized_energy_per_particle(&phi, &b, 1.0, 3).unwrap() - direct).abs() < 1e-7);
        let big = factorized_energy_per_particle(&phi, &b, 1.0, 1_000_000).unwrap();
        let c = b.sample(&g).unwrap().coupling(&phi).unwrap();
        assert!((big - (0.5 * kin + 0.25 * c * c)).abs() < 1e-6);
    }
}
