//! Convergence studies: the one-body ε → 0 limit and the small-`N` chaos
//! trend, plus log-log rate fitting and report writing.
//!
//! Studies are split into a pure `run_*` step returning tables and a
//! `check_*` step that turns violated properties into errors, so reports can
//! be written before a failing property is reported.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::delta::{reconstruct_many, solve_charge};
use crate::error::{Error, Result};
use crate::hartree::{ensure_stiffness, HartreeStepper};
use crate::io::{fmt_f64, write_json, write_table};
use crate::manybody::{
    build_factorized, check_budget, reduced_density, trace_distance, ManyBodyPropagator,
    ReducedDensity,
};
use crate::onebody::WaveFunction;
use crate::potentials::{epsilon_of_n, BumpProfile, ScaledBump};

/// Slack on the numerical triangle inequality.
pub const TRIANGLE_SLACK: f64 = 1e-6;
const UNIT_TOLERANCE: f64 = 1e-8;

/// Runs `f` on a pool capped at `jobs` workers (`0` means one per core).
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Number of `dt` steps to reach `t`; `t` must be a multiple of `dt`.
fn steps_to(t: f64, dt: f64, what: &'static str) -> Result<usize> {
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::invalid(
            what,
            format!("sample time {t} is not a multiple of {dt}"),
        ));
    }
    Ok(k as usize)
}

fn check_sample_times(times: &[f64], t_final: f64, dt: f64, delta: f64) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid(
            "sample_times",
            "need at least one sample time",
        ));
    }
    let mut prev = f64::NEG_INFINITY;
    for &t in times {
        if !(t.is_finite() && t >= 0.0 && t <= t_final * (1.0 + 1e-12)) {
            return Err(Error::invalid(
                "sample_times",
                format!("{t} lies outside [0, T = {t_final}]"),
            ));
        }
        if t <= prev {
            return Err(Error::invalid(
                "sample_times",
                "must be strictly increasing",
            ));
        }
        prev = t;
        steps_to(t, dt, "dt")?;
        steps_to(t, delta, "delta")?;
    }
    Ok(())
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "mu",
            format!("must be finite and >= 0, got {mu}"),
        ))
    }
}

/// Hartree states at increasing multiples of `dt`.
pub fn hartree_states_at(
    initial: &WaveFunction,
    bump: &ScaledBump,
    mu: f64,
    dt: f64,
    times: &[f64],
) -> Result<Vec<WaveFunction>> {
    let grid = *initial.grid();
    let mut stepper = HartreeStepper::new(bump.sample(&grid)?, mu);
    let mut values = initial.values().to_vec();
    let mut done = 0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let target = steps_to(t, dt, "dt")?;
        if target < done {
            return Err(Error::invalid("sample_times", "must be increasing"));
        }
        for _ in done..target {
            stepper.step(&mut values, dt);
        }
        done = target;
        if values
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite(format!(
                "Hartree state (eps = {}) at t = {t}",
                bump.eps()
            )));
        }
        out.push(WaveFunction::new(grid, values.clone())?);
    }
    Ok(out)
}

/// Delta-NLS states at the sample times, reconstructed on the initial grid.
pub fn delta_states_at(
    initial: &WaveFunction,
    mu: f64,
    delta: f64,
    t_final: f64,
    times: &[f64],
) -> Result<Vec<WaveFunction>> {
    let nodes = steps_to(t_final, delta, "delta")?;
    let traj = solve_charge(initial, mu, delta, nodes)?;
    let mesh: Vec<f64> = times
        .iter()
        .map(|&t| steps_to(t, delta, "delta").map(|k| traj.time(k)))
        .collect::<Result<_>>()?;
    let states = reconstruct_many(initial, &traj, &mesh)?;
    for (t, s) in times.iter().zip(&states) {
        if !s.l2_norm().is_finite() {
            return Err(Error::NonFinite(format!("delta state at t = {t}")));
        }
    }
    Ok(states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsMode {
    /// One ε for every `N`.
    Fixed,
    /// `ε = (log N)^{-1/2}`.
    Log,
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|log y - (intercept + slope log x)|`.
    pub max_residual: f64,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(
            "ys",
            format!("{} abscissae but {} ordinates", xs.len(), ys.len()),
        ));
    }
    if xs.len() < 3 {
        return Err(Error::invalid(
            "xs",
            format!("need at least 3 points, got {}", xs.len()),
        ));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::invalid(
            "ys",
            format!("log-log fit needs positive finite data, got {v}"),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("xs", "abscissae must not all coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept,
        max_residual,
    })
}

#[derive(Debug, Clone)]
pub struct EpsStudyConfig {
    pub initial: WaveFunction,
    pub profile: BumpProfile,
    pub mu: f64,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    /// Charge mesh step.
    pub delta: f64,
    pub sample_times: Vec<f64>,
    pub require_monotone: bool,
    pub min_slope: Option<f64>,
}

impl EpsStudyConfig {
    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        check_positive("dt", self.dt)?;
        check_positive("delta", self.delta)?;
        check_positive("T", self.t_final)?;
        if self.eps.is_empty() {
            return Err(Error::invalid("eps", "need at least one value"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eps", "values must be strictly decreasing"));
        }
        steps_to(self.t_final, self.delta, "delta")?;
        check_sample_times(&self.sample_times, self.t_final, self.dt, self.delta)?;
        let grid = self.initial.grid();
        for &eps in &self.eps {
            let bump = ScaledBump::new(self.profile.clone(), eps)?;
            bump.ensure_resolved(grid)?;
            ensure_stiffness(self.dt, &bump, grid)?;
        }
        Ok(())
    }
}

/// One ε of the study: `||u_eps(t) - phi(t)||` at every sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRun {
    pub eps: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

impl EpsRun {
    pub fn sup_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsStudy {
    /// Ordered by ε, descending.
    pub runs: Vec<EpsRun>,
    /// Fit of `sup_t ||u_eps - phi||` against ε when three or more values are positive.
    pub fit: Option<RateFit>,
}

impl EpsStudy {
    /// `(eps, sup_t ||.||, sup_t ||.||^2)`.
    pub fn table(&self) -> Vec<(f64, f64, f64)> {
        self.runs
            .iter()
            .map(|r| {
                let d = r.sup_distance();
                (r.eps, d, d * d)
            })
            .collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.runs
            .windows(2)
            .all(|w| w[1].sup_distance() < w[0].sup_distance())
    }
}

pub fn run_eps_study(cfg: &EpsStudyConfig, jobs: usize) -> Result<EpsStudy> {
    cfg.validate()?;
    with_jobs(jobs, || {
        let phi = delta_states_at(
            &cfg.initial,
            cfg.mu,
            cfg.delta,
            cfg.t_final,
            &cfg.sample_times,
        )?;
        let runs: Vec<EpsRun> = cfg
            .eps
            .par_iter()
            .map(|&eps| {
                let bump = ScaledBump::new(cfg.profile.clone(), eps)?;
                let u = hartree_states_at(&cfg.initial, &bump, cfg.mu, cfg.dt, &cfg.sample_times)?;
                let distances = u
                    .iter()
                    .zip(&phi)
                    .map(|(a, b)| a.l2_distance(b))
                    .collect::<Result<Vec<_>>>()?;
                if distances.iter().any(|d| !d.is_finite()) {
                    return Err(Error::NonFinite(format!("distance at eps = {eps}")));
                }
                Ok(EpsRun {
                    eps,
                    times: cfg.sample_times.clone(),
                    distances,
                })
            })
            .collect::<Result<_>>()?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = runs.iter().map(|r| (r.eps, r.sup_distance())).unzip();
        let fit = if ys.iter().filter(|&&y| y > 0.0).count() >= 3 && ys.iter().all(|&y| y > 0.0) {
            Some(fit_rate(&xs, &ys)?)
        } else {
            None
        };
        Ok(EpsStudy { runs, fit })
    })?
}

/// Monotonicity and slope floor, when the config asks for them.
pub fn check_eps_properties(study: &EpsStudy, cfg: &EpsStudyConfig) -> Result<()> {
    if cfg.require_monotone && !study.is_strictly_decreasing() {
        let d: Vec<String> = study
            .table()
            .iter()
            .map(|r| format!("{:.3e}", r.1))
            .collect();
        return Err(Error::PropertyViolated(format!(
            "sup distances are not strictly decreasing in eps: [{}]",
            d.join(", ")
        )));
    }
    if let Some(floor) = cfg.min_slope {
        match &study.fit {
            Some(fit) if fit.slope >= floor => {}
            Some(fit) => {
                return Err(Error::PropertyViolated(format!(
                    "fitted rate {:.4} is below the floor {floor}",
                    fit.slope
                )))
            }
            None => {
                return Err(Error::PropertyViolated(
                    "slope floor requested but fewer than 3 positive distances to fit".into(),
                ))
            }
        }
    }
    Ok(())
}

pub fn write_eps_report(dir: &Path, study: &EpsStudy) -> Result<()> {
    for (i, run) in study.runs.iter().enumerate() {
        let rows = run
            .times
            .iter()
            .zip(&run.distances)
            .map(|(t, d)| vec![fmt_f64(*t), fmt_f64(*d), fmt_f64(d * d)]);
        write_table(
            &dir.join("runs").join(format!("eps_{i:02}.csv")),
            &["t", "distance", "distance_sq"],
            rows,
        )?;
    }
    let rows = study
        .table()
        .into_iter()
        .map(|(e, d, d2)| vec![fmt_f64(e), fmt_f64(d), fmt_f64(d2)]);
    write_table(
        &dir.join("aggregate.csv"),
        &["eps", "sup_distance", "sup_distance_sq"],
        rows,
    )?;
    let summary = json!({
        "study": "eps",
        "eps": study.runs.iter().map(|r| r.eps).collect::<Vec<_>>(),
        "sup_distance": study.runs.iter().map(EpsRun::sup_distance).collect::<Vec<_>>(),
        "strictly_decreasing": study.is_strictly_decreasing(),
        "fit": study.fit.as_ref().map(|f| json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "max_residual": f.max_residual,
        })),
    });
    write_json(&dir.join("summary.json"), &summary)
}

#[derive(Debug, Clone)]
pub struct ChaosStudyConfig {
    /// Unit-norm datum on the many-body grid.
    pub initial: WaveFunction,
    pub profile: BumpProfile,
    pub mu: f64,
    pub eps: f64,
    pub eps_mode: EpsMode,
    pub particles: Vec<usize>,
    pub t_final: f64,
    pub dt: f64,
    pub delta: f64,
    pub sample_times: Vec<f64>,
    pub require_decreasing: bool,
}

impl ChaosStudyConfig {
    pub fn eps_for(&self, n: usize) -> Result<f64> {
        match self.eps_mode {
            EpsMode::Fixed => Ok(self.eps),
            EpsMode::Log => epsilon_of_n(n as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        check_positive("dt", self.dt)?;
        check_positive("delta", self.delta)?;
        check_positive("T", self.t_final)?;
        self.initial.ensure_normalized(UNIT_TOLERANCE)?;
        if self.particles.is_empty() {
            return Err(Error::invalid("N", "need at least one particle count"));
        }
        if self.particles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "N",
                "particle counts must be strictly increasing",
            ));
        }
        steps_to(self.t_final, self.delta, "delta")?;
        check_sample_times(&self.sample_times, self.t_final, self.dt, self.delta)?;
        let grid = self.initial.grid();
        for &n in &self.particles {
            check_budget(grid.num_points(), n)?;
            let bump = ScaledBump::new(self.profile.clone(), self.eps_for(n)?)?;
            bump.ensure_resolved(grid)?;
            ensure_stiffness(self.dt, &bump, grid)?;
        }
        Ok(())
    }
}

/// One `(N, t)` sample of the triangular split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    pub eps: f64,
    pub t: f64,
    /// `Tr |gamma_N(t) - |u(t)><u(t)||`.
    pub d_hartree: f64,
    /// `Tr |gamma_N(t) - |phi(t)><phi(t)||`, with `phi(t)` normalized on the grid.
    pub d_delta: f64,
    /// `Tr ||u(t)><u(t)| - |phi(t)><phi(t)||`.
    pub d_onebody: f64,
    /// `||u(t) - phi(t)||`.
    pub onebody_l2: f64,
}

impl ChaosRow {
    /// `d_hartree + d_onebody`, which bounds `d_delta`.
    pub fn bound(&self) -> f64 {
        self.d_hartree + self.d_onebody
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosStudy {
    /// Ordered by `N`, then `t`.
    pub rows: Vec<ChaosRow>,
}

impl ChaosStudy {
    /// `(N, d_hartree)` at the last sample time.
    pub fn final_hartree_leg(&self) -> Vec<(usize, f64)> {
        let t_last = self
            .rows
            .iter()
            .map(|r| r.t)
            .fold(f64::NEG_INFINITY, f64::max);
        self.rows
            .iter()
            .filter(|r| r.t == t_last)
            .map(|r| (r.n, r.d_hartree))
            .collect()
    }
}

pub fn run_chaos_study(cfg: &ChaosStudyConfig, jobs: usize) -> Result<ChaosStudy> {
    cfg.validate()?;
    let grid = *cfg.initial.grid();
    with_jobs(jobs, || {
        let phi: Vec<WaveFunction> = delta_states_at(
            &cfg.initial,
            cfg.mu,
            cfg.delta,
            cfg.t_final,
            &cfg.sample_times,
        )?
        .iter()
        .map(WaveFunction::normalized)
        .collect::<Result<_>>()?;
        let per_n: Vec<Vec<ChaosRow>> = cfg
            .particles
            .par_iter()
            .map(|&n| {
                let eps = cfg.eps_for(n)?;
                let bump = ScaledBump::new(cfg.profile.clone(), eps)?;
                let u = hartree_states_at(&cfg.initial, &bump, cfg.mu, cfg.dt, &cfg.sample_times)?;
                let mut prop = ManyBodyPropagator::new(n, grid, &bump, cfg.mu, cfg.dt)?;
                let mut psi = build_factorized(&cfg.initial, n)?;
                let mut done = 0;
                let mut rows = Vec::with_capacity(cfg.sample_times.len());
                for ((&t, u_t), phi_t) in cfg.sample_times.iter().zip(&u).zip(&phi) {
                    let target = steps_to(t, cfg.dt, "dt")?;
                    prop.advance(&mut psi, target - done)?;
                    done = target;
                    let gamma = reduced_density(&psi);
                    let row = ChaosRow {
                        n,
                        eps,
                        t,
                        d_hartree: trace_distance(&gamma, u_t)?,
                        d_delta: trace_distance(&gamma, phi_t)?,
                        d_onebody: trace_distance(&ReducedDensity::pure(u_t), phi_t)?,
                        onebody_l2: u_t.l2_distance(phi_t)?,
                    };
                    if ![row.d_hartree, row.d_delta, row.d_onebody]
                        .iter()
                        .all(|v| v.is_finite())
                    {
                        return Err(Error::NonFinite(format!(
                            "trace distance at N = {n}, t = {t}"
                        )));
                    }
                    rows.push(row);
                }
                Ok(rows)
            })
            .collect::<Result<_>>()?;
        Ok(ChaosStudy {
            rows: per_n.into_iter().flatten().collect(),
        })
    })?
}

/// Triangle inequality on every sample, and the decreasing Hartree leg at the
/// last sample time when requested.
pub fn check_chaos_properties(study: &ChaosStudy, cfg: &ChaosStudyConfig) -> Result<()> {
    for r in &study.rows {
        if r.d_delta > r.d_hartree + 2.0 * r.onebody_l2 + TRIANGLE_SLACK {
            return Err(Error::PropertyViolated(format!(
                "triangle inequality fails at N = {}, t = {}: {:.6e} > {:.6e} + 2*{:.6e}",
                r.n, r.t, r.d_delta, r.d_hartree, r.onebody_l2
            )));
        }
    }
    if cfg.require_decreasing {
        let leg = study.final_hartree_leg();
        if leg.windows(2).any(|w| w[1].1 >= w[0].1) {
            let s: Vec<String> = leg.iter().map(|(n, d)| format!("N={n}: {d:.4e}")).collect();
            return Err(Error::PropertyViolated(format!(
                "Hartree leg is not strictly decreasing in N: {}",
                s.join(", ")
            )));
        }
    }
    Ok(())
}

pub fn write_chaos_report(dir: &Path, study: &ChaosStudy) -> Result<()> {
    let header = [
        "N",
        "eps",
        "t",
        "d_hartree",
        "d_delta",
        "d_onebody",
        "bound",
        "onebody_l2",
    ];
    let line = |r: &ChaosRow| {
        vec![
            r.n.to_string(),
            fmt_f64(r.eps),
            fmt_f64(r.t),
            fmt_f64(r.d_hartree),
            fmt_f64(r.d_delta),
            fmt_f64(r.d_onebody),
            fmt_f64(r.bound()),
            fmt_f64(r.onebody_l2),
        ]
    };
    let mut ns: Vec<usize> = study.rows.iter().map(|r| r.n).collect();
    ns.dedup();
    for n in &ns {
        let rows = study.rows.iter().filter(|r| r.n == *n).map(line);
        write_table(
            &dir.join("runs").join(format!("chaos_n{n}.csv")),
            &header,
            rows,
        )?;
    }
    write_table(
        &dir.join("aggregate.csv"),
        &header,
        study.rows.iter().map(line),
    )?;
    let leg = study.final_hartree_leg();
    let (xs, ys): (Vec<f64>, Vec<f64>) = leg.iter().map(|&(n, d)| (n as f64, d)).unzip();
    let fit = fit_rate(&xs, &ys).ok();
    let summary = json!({
        "study": "chaos",
        "final_time": study.rows.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max),
        "N": leg.iter().map(|p| p.0).collect::<Vec<_>>(),
        "final_d_hartree": ys,
        "strictly_decreasing": leg.windows(2).all(|w| w[1].1 < w[0].1),
        "fit_vs_N": fit.map(|f| json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "max_residual": f.max_residual,
        })),
    });
    write_json(&dir.join("summary.json"), &summary)
}
