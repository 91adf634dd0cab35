use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::onebody::{Grid1D, WaveFunction};

/// Largest tensor (in complex entries) the solver will allocate.
pub const MEMORY_BUDGET: u64 = 1 << 27;
pub const MIN_PARTICLES: usize = 2;
pub const MAX_PARTICLES: usize = 4;

const UNIT_TOLERANCE: f64 = 1e-8;

/// Refuses particle counts outside the tensor range and tensors over budget.
pub fn check_budget(m: usize, n: usize) -> Result<usize> {
    if !(MIN_PARTICLES..=MAX_PARTICLES).contains(&n) {
        return Err(Error::invalid(
            "N",
            format!("tensor states support {MIN_PARTICLES} to {MAX_PARTICLES} particles, got {n}"),
        ));
    }
    let entries = (m as u128).pow(n as u32);
    if entries > MEMORY_BUDGET as u128 {
        return Err(Error::MemoryBudget {
            entries,
            m,
            n,
            budget: MEMORY_BUDGET,
        });
    }
    Ok(entries as usize)
}

/// `N`-particle amplitudes on `grid^N`, row-major with particle 1 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    n: usize,
    grid: Grid1D,
    amps: Vec<Complex64>,
}

impl ManyBodyState {
    pub fn from_amplitudes(n: usize, grid: Grid1D, amps: Vec<Complex64>) -> Result<Self> {
        let len = check_budget(grid.num_points(), n)?;
        if amps.len() != len {
            return Err(Error::invalid(
                "amplitudes",
                format!("expected {len} entries, got {}", amps.len()),
            ));
        }
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("many-body amplitudes".into()));
        }
        Ok(Self { n, grid, amps })
    }

    pub fn num_particles(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// `h^N sum |Psi|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.grid.spacing().powi(self.n as i32)
            * self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &ManyBodyState) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        if self.n != other.n {
            return Err(Error::invalid(
                "N",
                format!("particle counts differ: {} vs {}", self.n, other.n),
            ));
        }
        let s: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.spacing().powi(self.n as i32))
    }

    pub fn sup_distance(&self, other: &ManyBodyState) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest change of any amplitude under any transposition of two particles.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.grid.num_points();
        let n = self.n;
        let strides: Vec<usize> = (0..n).map(|k| m.pow((n - 1 - k) as u32)).collect();
        let mut worst = 0.0f64;
        for (p, z) in self.amps.iter().enumerate() {
            for a in 0..n {
                let ia = (p / strides[a]) % m;
                for b in a + 1..n {
                    let ib = (p / strides[b]) % m;
                    if ia == ib {
                        continue;
                    }
                    let q =
                        p + ib * strides[a] + ia * strides[b] - ia * strides[a] - ib * strides[b];
                    worst = worst.max((z - self.amps[q]).norm());
                }
            }
        }
        worst
    }
}

fn check_unit(psi: &WaveFunction) -> Result<()> {
    psi.ensure_normalized(UNIT_TOLERANCE)
}

fn tensor_product(factors: &[&[Complex64]], m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * m);
        for a in &out {
            next.extend(f.iter().map(|b| a * b));
        }
        out = next;
    }
    out
}

/// `phi^{(x) N}`.
pub fn build_factorized(phi: &WaveFunction, n: usize) -> Result<ManyBodyState> {
    check_unit(phi)?;
    let m = phi.grid().num_points();
    check_budget(m, n)?;
    let factors = vec![phi.values(); n];
    Ok(ManyBodyState {
        n,
        grid: *phi.grid(),
        amps: tensor_product(&factors, m),
    })
}

/// Normalized symmetrization of `phi^{(x)(N-1)} (x) phi_perp`.
pub fn build_defect_state(
    phi: &WaveFunction,
    phi_perp: &WaveFunction,
    n: usize,
) -> Result<ManyBodyState> {
    check_unit(phi)?;
    check_unit(phi_perp)?;
    let overlap = phi.inner(phi_perp)?.norm();
    if overlap > UNIT_TOLERANCE {
        return Err(Error::NotOrthogonal(overlap));
    }
    let m = phi.grid().num_points();
    check_budget(m, n)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); m.pow(n as u32)];
    // The N placements of the defect are mutually orthogonal, so the sum has norm sqrt(N).
    let scale = 1.0 / (n as f64).sqrt();
    for slot in 0..n {
        let factors: Vec<&[Complex64]> = (0..n)
            .map(|k| {
                if k == slot {
                    phi_perp.values()
                } else {
                    phi.values()
                }
            })
            .collect();
        for (a, b) in amps.iter_mut().zip(tensor_product(&factors, m)) {
            *a += b * scale;
        }
    }
    Ok(ManyBodyState {
        n,
        grid: *phi.grid(),
        amps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::fixtures::{odd_partner, unit_gaussian};

    #[test]
    fn budget() {
        assert!(check_budget(64, 4).is_ok());
        assert!(matches!(
            check_budget(128, 4),
            Err(Error::MemoryBudget { .. })
        ));
        assert!(check_budget(8, 5).is_err());
        assert!(check_budget(8, 1).is_err());
    }

    #[test]
    fn factorized_single_node() {
        let g = Grid1D::new(1.0, 8).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = Complex64::new(2.0, 0.0); // h = 1/4, so |v|^2 h = 1
        let phi = WaveFunction::new(g, v).unwrap();
        let psi = build_factorized(&phi, 2).unwrap();
        let nonzero: Vec<usize> = (0..64)
            .filter(|&p| psi.amplitudes()[p].norm() > 0.0)
            .collect();
        assert_eq!(nonzero, vec![3 * 8 + 3]);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn factorized_is_symmetric_and_normalized() {
        let g = Grid1D::new(3.0, 16).unwrap();
        let phi = WaveFunction::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.3 * x))
            .unwrap()
            .normalized()
            .unwrap();
        for n in 2..=4 {
            let psi = build_factorized(&phi, n).unwrap();
            assert!(psi.symmetry_residual() < 1e-14);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            build_factorized(&phi.scaled(Complex64::new(2.0, 0.0)), 2),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn defect_state() {
        let g = Grid1D::new(4.0, 16).unwrap();
        let phi = unit_gaussian(g, 0.5);
        let perp = odd_partner(g, 0.5);
        let two = build_defect_state(&phi, &perp, 2).unwrap();
        let m = 16;
        for i in 0..m {
            for j in 0..m {
                let expected = (phi.values()[i] * perp.values()[j]
                    + perp.values()[i] * phi.values()[j])
                    / 2f64.sqrt();
                assert!((two.amplitudes()[i * m + j] - expected).norm() < 1e-15);
            }
        }
        for n in 2..=4 {
            let psi = build_defect_state(&phi, &perp, n).unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            assert!(psi.symmetry_residual() < 1e-15);
            let overlap = psi.inner(&build_factorized(&phi, n).unwrap()).unwrap();
            assert!(overlap.norm() < 1e-12);
        }
        assert!(matches!(
            build_defect_state(&phi, &phi, 2),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn symmetry_residual_detects_asymmetry() {
        let g = Grid1D::new(1.0, 4).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 64];
        amps[1] = Complex64::new(1.0, 0.0); // (0, 0, 1) without its images
        let psi = ManyBodyState::from_amplitudes(3, g, amps).unwrap();
        assert_eq!(psi.symmetry_residual(), 1.0);
    }
}
