//! Concentrated Hartree equation `i u_t = -u'' + mu w_eps <w_eps, |u|^2> u`.
//!
//! Time stepping is Strang splitting: half a free step, the nonlinear flow,
//! half a free step. The nonlinear flow only multiplies `u` by a real phase,
//! so `|u|` and hence the coupling `c = <w_eps, |u|^2>` are frozen during it
//! and the substep `u -> u exp(-i mu c w_eps tau)` is exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::onebody::{DispersionConvention, Grid1D, Spectral, WaveFunction};
use crate::potentials::{SampledBump, ScaledBump};

/// Exact flow of the nonlinear part over time `tau`.
pub fn nonlinear_substep(
    u: &WaveFunction,
    b: &ScaledBump,
    mu: f64,
    tau: f64,
) -> Result<WaveFunction> {
    let w = b.sample(u.grid())?;
    let mut values = u.values().to_vec();
    apply_nonlinear_phase(&w, mu, tau, &mut values);
    Ok(WaveFunction::from_parts(*u.grid(), values))
}

fn apply_nonlinear_phase(w: &SampledBump, mu: f64, tau: f64, values: &mut [Complex64]) -> f64 {
    let c = w.coupling_of(values);
    if mu != 0.0 {
        let a = -mu * c * tau;
        for (z, &wj) in values.iter_mut().zip(w.values()) {
            *z *= Complex64::from_polar(1.0, a * wj);
        }
    }
    c
}

/// One Strang step `free(dt/2) . nonlinear(dt) . free(dt/2)`.
pub fn hartree_step(u: &WaveFunction, b: &ScaledBump, mu: f64, dt: f64) -> Result<WaveFunction> {
    let mut stepper = HartreeStepper::new(b.sample(u.grid())?, mu);
    let mut values = u.values().to_vec();
    stepper.step(&mut values, dt);
    Ok(WaveFunction::from_parts(*u.grid(), values))
}

/// Conserved energy `(1/2)||u'||^2 + (mu/4) <w_eps, |u|^2>^2`.
pub fn energy_hartree(u: &WaveFunction, b: &ScaledBump, mu: f64) -> Result<f64> {
    let w = b.sample(u.grid())?;
    let c = w.coupling(u)?;
    let kin = Spectral::new(*u.grid()).kinetic_norm_sq(u);
    Ok(0.5 * kin + 0.25 * mu * c * c)
}

/// Reusable Strang stepper holding transform plans and scratch space.
pub struct HartreeStepper {
    spectral: Spectral,
    bump: SampledBump,
    mu: f64,
    half_phase: Vec<Complex64>,
    phase_dt: f64,
    scratch: Vec<Complex64>,
}

/// Quantities available for free at the end of a step.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub kinetic_norm_sq: f64,
    pub coupling: f64,
}

impl HartreeStepper {
    pub fn new(bump: SampledBump, mu: f64) -> Self {
        let spectral = Spectral::new(*bump.grid());
        let scratch = vec![Complex64::new(0.0, 0.0); spectral.scratch_len()];
        Self {
            half_phase: Vec::new(),
            phase_dt: f64::NAN,
            spectral,
            bump,
            mu,
            scratch,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.spectral.grid()
    }

    fn ensure_phase(&mut self, dt: f64) {
        if self.phase_dt.to_bits() != dt.to_bits() {
            self.half_phase = self
                .spectral
                .wavenumbers()
                .iter()
                .map(|&k| DispersionConvention::phase(k, 0.5 * dt))
                .collect();
            self.phase_dt = dt;
        }
    }

    fn half_free(&mut self, values: &mut [Complex64]) -> f64 {
        self.spectral
            .forward_with_scratch(values, &mut self.scratch);
        for (z, p) in values.iter_mut().zip(&self.half_phase) {
            *z *= p;
        }
        let kin = self.spectral.kinetic_norm_sq_from_coefficients(values);
        self.spectral
            .inverse_with_scratch(values, &mut self.scratch);
        kin
    }

    /// Advances `values` in place by `dt` (either sign).
    pub fn step(&mut self, values: &mut [Complex64], dt: f64) -> StepReport {
        self.ensure_phase(dt);
        self.half_free(values);
        apply_nonlinear_phase(&self.bump, self.mu, dt, values);
        let kinetic_norm_sq = self.half_free(values);
        StepReport {
            kinetic_norm_sq,
            coupling: self.bump.coupling_of(values),
        }
    }

    pub fn energy_of(&self, kinetic_norm_sq: f64, coupling: f64) -> f64 {
        0.5 * kinetic_norm_sq + 0.25 * self.mu * coupling * coupling
    }
}

/// A Hartree simulation request.
#[derive(Debug, Clone)]
pub struct HartreeRun {
    pub initial: WaveFunction,
    pub bump: ScaledBump,
    pub mu: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Full states are kept every `stride` steps (and at the final step).
    pub stride: usize,
}

impl HartreeRun {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::invalid(
                "T",
                format!("must be >= 0, got {}", self.t_final),
            ));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::invalid(
                "mu",
                format!(
                    "only the defocusing case mu >= 0 is supported, got {}",
                    self.mu
                ),
            ));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be >= 1"));
        }
        let grid = self.initial.grid();
        self.bump.ensure_resolved(grid)?;
        ensure_stiffness(self.dt, &self.bump, grid)
    }

    pub fn num_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Heuristic stiffness guard `dt <= eps * h`.
pub fn ensure_stiffness(dt: f64, bump: &ScaledBump, grid: &Grid1D) -> Result<()> {
    let bound = bump.eps() * grid.spacing();
    if dt.abs() > bound {
        Err(Error::StepTooLarge {
            dt: dt.abs(),
            bound,
        })
    } else {
        Ok(())
    }
}

/// One row of the scalar time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSample {
    pub t: f64,
    pub l2: f64,
    pub energy: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone)]
pub struct HartreeTrajectory {
    pub snapshots: Vec<(f64, WaveFunction)>,
    pub series: Vec<ScalarSample>,
}

impl HartreeTrajectory {
    pub fn final_state(&self) -> &WaveFunction {
        &self
            .snapshots
            .last()
            .expect("trajectory always holds the initial state")
            .1
    }
}

pub fn evolve_hartree(run: &HartreeRun) -> Result<HartreeTrajectory> {
    run.validate()?;
    let grid = *run.initial.grid();
    let bump = run.bump.sample(&grid)?;
    let mut stepper = HartreeStepper::new(bump.clone(), run.mu);
    let mut values = run.initial.values().to_vec();

    let c0 = bump.coupling_of(&values);
    let kin0 = Spectral::new(grid).kinetic_norm_sq(&run.initial);
    let mut series = vec![ScalarSample {
        t: 0.0,
        l2: run.initial.l2_norm(),
        energy: stepper.energy_of(kin0, c0),
        coupling: c0,
    }];
    let mut snapshots = vec![(0.0, run.initial.clone())];

    let n = run.num_steps();
    for step in 1..=n {
        let report = stepper.step(&mut values, run.dt);
        let t = step as f64 * run.dt;
        let l2 = (grid.spacing() * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        let sample = ScalarSample {
            t,
            l2,
            energy: stepper.energy_of(report.kinetic_norm_sq, report.coupling),
            coupling: report.coupling,
        };
        if !(sample.l2.is_finite() && sample.energy.is_finite()) {
            return Err(Error::NonFinite(format!("Hartree state at t = {t}")));
        }
        series.push(sample);
        if step % run.stride == 0 || step == n {
            snapshots.push((t, WaveFunction::from_parts(grid, values.clone())));
        }
    }
    Ok(HartreeTrajectory { snapshots, series })
}
