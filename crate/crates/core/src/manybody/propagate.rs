//! Split-step propagation on `grid^N`.
//!
//! `H_N = -sum_j d^2/dx_j^2 + V`, `V(X) = (mu/N) sum_{k<l} w_eps(x_k) w_eps(x_l)`.
//! The kinetic factor is diagonal after an `N`-dimensional DFT, the potential
//! factor is diagonal on the grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::state::{check_budget, ManyBodyState};
use crate::error::{Error, Result};
use crate::hartree::ensure_stiffness;
use crate::onebody::{DispersionConvention, Grid1D};
use crate::potentials::ScaledBump;

/// `V` at every grid multi-index, in the state's layout.
pub fn manybody_potential(b: &ScaledBump, mu: f64, n: usize, grid: &Grid1D) -> Result<Vec<f64>> {
    let m = grid.num_points();
    let len = check_budget(m, n)?;
    let w = b.sample(grid)?;
    let w = w.values();
    let scale = mu / n as f64;
    let mut out = Vec::with_capacity(len);
    let rows = len / m;
    let mut digits = vec![0usize; n - 1];
    for r in 0..rows {
        decompose(r, m, &mut digits);
        let s1: f64 = digits.iter().map(|&d| w[d]).sum();
        let s2: f64 = digits.iter().map(|&d| w[d] * w[d]).sum();
        // sum_{k<l} w_k w_l = ((sum w)^2 - sum w^2) / 2
        out.extend(w.iter().map(|&wl| {
            let a = s1 + wl;
            let q = s2 + wl * wl;
            scale * 0.5 * (a * a - q)
        }));
    }
    Ok(out)
}

/// Base-`m` digits of `r`, most significant first.
fn decompose(mut r: usize, m: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = r % m;
        r /= m;
    }
}

/// In-place `N`-dimensional DFT over a row-major cube of side `m`.
pub(crate) struct TensorFft {
    m: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

impl TensorFft {
    pub(crate) fn new(m: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            m,
            n,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            lines: vec![Complex64::default(); m.pow(n as u32 - 1) * m],
        }
    }

    fn axis(&mut self, data: &mut [Complex64], axis: usize, inverse: bool) {
        let m = self.m;
        let fft = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        let stride = m.pow((self.n - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut self.scratch);
            return;
        }
        let block = m * stride;
        let buf = &mut self.lines[..block];
        for chunk in data.chunks_exact_mut(block) {
            for i in 0..m {
                for s in 0..stride {
                    buf[s * m + i] = chunk[i * stride + s];
                }
            }
            fft.process_with_scratch(buf, &mut self.scratch);
            for i in 0..m {
                for s in 0..stride {
                    chunk[i * stride + s] = buf[s * m + i];
                }
            }
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        for a in 0..self.n {
            self.axis(data, a, false);
        }
    }

    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        for a in 0..self.n {
            self.axis(data, a, true);
        }
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}

/// Multiplies by `prod_a f[i_a]` for a per-axis factor `f`.
pub(crate) fn apply_separable<T>(data: &mut [Complex64], m: usize, n: usize, f: &[T])
where
    T: Copy + Into<Complex64>,
{
    let mut digits = vec![0usize; n - 1];
    for (r, row) in data.chunks_exact_mut(m).enumerate() {
        decompose(r, m, &mut digits);
        let prefix: Complex64 = digits.iter().map(|&d| f[d].into()).product();
        for (z, &fj) in row.iter_mut().zip(f) {
            *z *= prefix * fj.into();
        }
    }
}

/// Reusable Strang propagator for one `(N, grid, bump, mu, dt)`.
pub struct ManyBodyPropagator {
    n: usize,
    grid: Grid1D,
    fft: TensorFft,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    potential_phase: Vec<Complex64>,
}

impl ManyBodyPropagator {
    pub fn new(n: usize, grid: Grid1D, b: &ScaledBump, mu: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::invalid("mu", format!("must be >= 0, got {mu}")));
        }
        b.ensure_resolved(&grid)?;
        ensure_stiffness(dt, b, &grid)?;
        let v = manybody_potential(b, mu, n, &grid)?;
        let k = grid.wavenumbers();
        Ok(Self {
            n,
            grid,
            fft: TensorFft::new(grid.num_points(), n),
            half: k
                .iter()
                .map(|&k| DispersionConvention::phase(k, 0.5 * dt))
                .collect(),
            full: k
                .iter()
                .map(|&k| DispersionConvention::phase(k, dt))
                .collect(),
            potential_phase: v
                .iter()
                .map(|&v| Complex64::from_polar(1.0, -v * dt))
                .collect(),
        })
    }

    fn kinetic(&mut self, data: &mut [Complex64], full: bool) {
        self.fft.forward(data);
        let phase = if full { &self.full } else { &self.half };
        apply_separable(data, self.grid.num_points(), self.n, phase);
        self.fft.inverse(data);
    }

    /// Advances `psi` by `steps` Strang steps, merging adjacent kinetic halves.
    pub fn advance(&mut self, psi: &mut ManyBodyState, steps: usize) -> Result<()> {
        if psi.num_particles() != self.n {
            return Err(Error::invalid(
                "N",
                format!(
                    "propagator built for {} particles, state has {}",
                    self.n,
                    psi.num_particles()
                ),
            ));
        }
        self.grid.ensure_same(psi.grid())?;
        if steps == 0 {
            return Ok(());
        }
        let data = psi.amplitudes_mut();
        self.kinetic(data, false);
        for s in 0..steps {
            for (z, p) in data.iter_mut().zip(&self.potential_phase) {
                *z *= p;
            }
            self.kinetic(data, s + 1 < steps);
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("many-body amplitudes".into()));
        }
        Ok(())
    }
}

pub fn evolve_manybody(
    psi: &ManyBodyState,
    b: &ScaledBump,
    mu: f64,
    dt: f64,
    t_final: f64,
) -> Result<ManyBodyState> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::invalid("T", format!("must be >= 0, got {t_final}")));
    }
    let mut prop = ManyBodyPropagator::new(psi.num_particles(), *psi.grid(), b, mu, dt)?;
    let mut out = psi.clone();
    prop.advance(&mut out, (t_final / dt).round() as usize)?;
    Ok(out)
}

/// `<Psi, H_N Psi>` with spectral kinetic energy (Nyquist modes dropped).
pub fn hamiltonian_expectation(psi: &ManyBodyState, b: &ScaledBump, mu: f64) -> Result<f64> {
    let grid = *psi.grid();
    let (m, n) = (grid.num_points(), psi.num_particles());
    let v = manybody_potential(b, mu, n, &grid)?;
    let vol = grid.spacing().powi(n as i32);
    let potential: f64 = vol
        * psi
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(z, v)| v * z.norm_sqr())
            .sum::<f64>();

    let mut c = psi.amplitudes().to_vec();
    TensorFft::new(m, n).forward(&mut c);
    let nyq = grid.nyquist_index();
    let k2: Vec<f64> = grid
        .wavenumbers()
        .iter()
        .enumerate()
        .map(|(i, k)| if i == nyq { 0.0 } else { k * k })
        .collect();
    let mut digits = vec![0usize; n - 1];
    let mut kinetic = 0.0;
    for (r, row) in c.chunks_exact(m).enumerate() {
        decompose(r, m, &mut digits);
        let prefix: f64 = digits.iter().map(|&d| k2[d]).sum();
        kinetic += row
            .iter()
            .zip(&k2)
            .map(|(z, k)| (prefix + k) * z.norm_sqr())
            .sum::<f64>();
    }
    kinetic *= vol / c.len() as f64;
    Ok(kinetic + potential)
}

/// The `N`-body energy functional `(1/2) <Psi, H_N Psi>`, whose per-particle
/// share for `phi^{(x) N}` is [`super::factorized_energy_per_particle`].
pub fn energy_functional(psi: &ManyBodyState, b: &ScaledBump, mu: f64) -> Result<f64> {
    Ok(0.5 * hamiltonian_expectation(psi, b, mu)?)
}
