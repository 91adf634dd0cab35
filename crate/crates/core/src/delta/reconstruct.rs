//! Grid reconstruction of the delta-NLS solution from its charge trajectory:
//!
//! `phi_t(x) = (U(t) phi)(x) - i mu int_0^t U(t - s, x) g(s) ds`, `g = |q|^2 q`.
//!
//! With `G(tau) = g(t - tau)` piecewise linear on the charge mesh, one
//! integration by parts turns the time integral into
//! `V(t) G(t) - sum_k (G_k - G_{k-1}) (W(tau_k) - W(tau_{k-1})) / step`,
//! exact for the interpolated density. At `x = 0` this is the charge equation
//! itself, so reconstruction and charge solver agree there by construction.

use num_complex::Complex64;
use rayon::prelude::*;

use super::charge::ChargeTrajectory;
use super::kernel::{kernel_integrals_with, sqrt_4pi_i};
use crate::error::Result;
use crate::onebody::{energy_delta_with, Spectral, WaveFunction};

pub fn reconstruct(phi: &WaveFunction, traj: &ChargeTrajectory, t: f64) -> Result<WaveFunction> {
    Ok(reconstruct_many(phi, traj, &[t])?.remove(0))
}

/// Reconstructs several mesh times in one sweep over the grid.
pub fn reconstruct_many(
    phi: &WaveFunction,
    traj: &ChargeTrajectory,
    times: &[f64],
) -> Result<Vec<WaveFunction>> {
    let idx: Vec<usize> = times
        .iter()
        .map(|&t| traj.index_of(t))
        .collect::<Result<_>>()?;
    let grid = *phi.grid();
    let sp = Spectral::new(grid);
    let coeffs = sp.coefficients(phi);
    let mut out: Vec<Vec<Complex64>> = idx
        .iter()
        .map(|&n| {
            if n == 0 {
                return phi.values().to_vec();
            }
            let mut c = coeffs.clone();
            sp.apply_free_phase(&mut c, traj.time(n));
            sp.inverse(&mut c);
            c
        })
        .collect();

    let mu = traj.mu();
    let n_top = idx.iter().copied().max().unwrap_or(0);
    if mu != 0.0 && n_top > 0 {
        let g = traj.densities();
        let step = traj.step();
        let inv_s4 = sqrt_4pi_i().inv();
        let factor = Complex64::new(0.0, -mu);
        let nodes: Vec<f64> = grid.nodes().collect();
        let duhamel: Vec<Vec<Complex64>> = nodes
            .par_iter()
            .map_init(
                || {
                    (
                        vec![Complex64::default(); n_top + 1],
                        vec![Complex64::default(); n_top + 1],
                    )
                },
                |(v, dw), &x| {
                    let mut w_prev = Complex64::default();
                    for k in 1..=n_top {
                        let (vk, wk) = kernel_integrals_with(k as f64 * step, x, inv_s4);
                        v[k] = vk;
                        dw[k] = (wk - w_prev) / step;
                        w_prev = wk;
                    }
                    idx.iter()
                        .map(|&n| {
                            if n == 0 {
                                return Complex64::default();
                            }
                            let mut s = g[0] * v[n];
                            for k in 1..=n {
                                s -= (g[n - k] - g[n - k + 1]) * dw[k];
                            }
                            factor * s
                        })
                        .collect()
                },
            )
            .collect();
        for (j, per_time) in duhamel.iter().enumerate() {
            for (slot, d) in out.iter_mut().zip(per_time) {
                slot[j] += d;
            }
        }
    }
    out.into_iter()
        .map(|v| WaveFunction::new(grid, v))
        .collect()
}

/// `energy_delta` of the reconstructed states at the given mesh times.
pub fn delta_energy_series(
    phi: &WaveFunction,
    traj: &ChargeTrajectory,
    sample_times: &[f64],
) -> Result<Vec<f64>> {
    let sp = Spectral::new(*phi.grid());
    Ok(reconstruct_many(phi, traj, sample_times)?
        .iter()
        .map(|u| energy_delta_with(&sp, u, traj.mu()))
        .collect())
}
