//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    self, ChaosStudyFile, DeltaConfig, EpsStudyFile, HartreeConfig, ManyBodyConfig,
};
use crate::delta::{delta_energy_series, reconstruct_many, solve_charge};
use crate::error::{Error, ErrorKind, Result};
use crate::experiments::{
    check_chaos_properties, check_eps_properties, fit_rate, hartree_states_at, run_chaos_study,
    run_eps_study, with_jobs, write_chaos_report, write_eps_report,
};
use crate::hartree::evolve_hartree;
use crate::io::{
    fmt_f64, write_charge_csv, write_density_csv, write_eigenvalues_csv, write_json,
    write_series_csv, write_state_csv, write_table,
};
use crate::manybody::{
    build_defect_state, build_factorized, check_budget, defect_reduced_density, energy_functional,
    reduced_density, trace_distance, ManyBodyPropagator, ReducedDensity,
};
use crate::onebody::{free_step, Grid1D, WaveFunction};
use crate::potentials::ScaledBump;
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(
    name = "deltanls",
    version,
    about = "Impurity-mediated many-boson dynamics and its one-body limits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Worker cap for studies (0 = one per core).
    #[arg(long, global = true, value_name = "K", default_value_t = 0)]
    pub jobs: usize,

    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Concentrated Hartree equation.
    SimulateHartree,
    /// NLS with the nonlinearity concentrated at the origin.
    SimulateDelta,
    /// Exact N-body dynamics from a factorized datum (N <= 4).
    SimulateManybody,
    /// One-body convergence as eps -> 0.
    StudyEps,
    /// Hartree and delta legs of the trace-distance split over N.
    StudyChaos,
    /// Quick built-in checks of every module.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SimulateHartree => "simulate-hartree",
            Command::SimulateDelta => "simulate-delta",
            Command::SimulateManybody => "simulate-manybody",
            Command::StudyEps => "study-eps",
            Command::StudyChaos => "study-chaos",
            Command::Selftest => "selftest",
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Validation => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Guard => 4,
        ErrorKind::Io => 1,
    }
}

/// One-line diagnostic, prefixed by the failure class.
pub fn describe(err: &Error) -> String {
    let class = match err {
        Error::UnresolvedBump { .. } => "resolution guard",
        Error::StepTooLarge { .. } => "stiffness guard",
        Error::MemoryBudget { .. } => "memory guard",
        Error::PropertyViolated(_) => "check failed",
        _ => match err.kind() {
            ErrorKind::Validation => "invalid input",
            ErrorKind::Numerical => "numerical failure",
            ErrorKind::Guard => "guard",
            ErrorKind::Io => "i/o",
        },
    };
    format!("{class}: {err}")
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("deltanls {}: {}", cli.command.name(), describe(&e));
            exit_code(&e)
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    raw: String,
    base: Option<PathBuf>,
}

impl Ctx<'_> {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.cli.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn out(&self) -> &Path {
        &self.cli.out
    }

    fn base(&self) -> Option<&Path> {
        self.base.as_deref()
    }

    /// Writes the verbatim input, the fully resolved config and the version.
    fn echo<T: Serialize>(&self, resolved: &T) -> Result<()> {
        std::fs::create_dir_all(self.out())?;
        std::fs::write(self.out().join("config.input.toml"), &self.raw)?;
        let body = toml::to_string(resolved).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(
            self.out().join("config.toml"),
            format!("# deltanls {VERSION} {}\n{body}", self.cli.command.name()),
        )?;
        write_json(
            &self.out().join("metadata.json"),
            &json!({ "version": VERSION, "command": self.cli.command.name() }),
        )
    }
}

fn load<T: serde::de::DeserializeOwned + Default>(cli: &Cli) -> Result<(T, Ctx<'_>)> {
    let (value, raw, base) = match &cli.config {
        Some(path) => {
            let (v, raw) = config::load(path)?;
            (v, raw, path.parent().map(Path::to_path_buf))
        }
        None => (T::default(), String::new(), None),
    };
    Ok((value, Ctx { cli, raw, base }))
}

/// Tabulated profile paths are made absolute so the echoed config works from
/// the output directory.
fn absolute_profile(profile: &str, base: Option<&Path>) -> String {
    if profile == "gaussian" {
        return profile.to_string();
    }
    let p = Path::new(profile);
    let joined = match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    std::fs::canonicalize(&joined)
        .map(|p| p.display().to_string())
        .unwrap_or_else(|_| profile.to_string())
}

pub fn run(cli: &Cli) -> Result<()> {
    match cli.command {
        Command::SimulateHartree => simulate_hartree(cli),
        Command::SimulateDelta => simulate_delta(cli),
        Command::SimulateManybody => simulate_manybody(cli),
        Command::StudyEps => study_eps(cli),
        Command::StudyChaos => study_chaos(cli),
        Command::Selftest => selftest(cli),
    }
}

fn simulate_hartree(cli: &Cli) -> Result<()> {
    let (mut cfg, ctx): (HartreeConfig, _) = load(cli)?;
    let run = cfg.to_run(ctx.base())?;
    cfg.profile = absolute_profile(&cfg.profile, ctx.base());
    ctx.echo(&cfg)?;
    let traj = evolve_hartree(&run)?;
    let out = ctx.out();
    write_series_csv(&out.join("series.csv"), &traj.series)?;
    for (k, (t, psi)) in traj.snapshots.iter().enumerate() {
        write_state_csv(
            &out.join("states").join(format!("state_{k:04}.csv")),
            psi,
            *t,
        )?;
    }
    let first = traj.series[0];
    let last = *traj.series.last().expect("series holds the initial sample");
    let norm_drift = (last.l2 - first.l2).abs() / first.l2;
    let energy_drift =
        (last.energy - first.energy).abs() / first.energy.abs().max(f64::MIN_POSITIVE);
    write_json(
        &out.join("summary.json"),
        &json!({
            "steps": run.num_steps(),
            "final_time": last.t,
            "relative_norm_drift": norm_drift,
            "relative_energy_drift": energy_drift,
            "initial_energy": first.energy,
            "final_energy": last.energy,
        }),
    )?;
    ctx.say(format!(
        "hartree: {} steps to t = {}, norm drift {:.3e}, energy drift {:.3e}",
        run.num_steps(),
        last.t,
        norm_drift,
        energy_drift
    ));
    Ok(())
}

fn simulate_delta(cli: &Cli) -> Result<()> {
    let (mut cfg, ctx): (DeltaConfig, _) = load(cli)?;
    cfg.validate()?;
    cfg.sample_times = Some(cfg.sample_times());
    ctx.echo(&cfg)?;
    let phi = cfg.initial()?;
    let traj = solve_charge(&phi, cfg.mu, cfg.delta, cfg.num_nodes())?;
    let times: Vec<f64> = cfg
        .sample_times()
        .iter()
        .map(|&t| traj.index_of(t).map(|k| traj.time(k)))
        .collect::<Result<_>>()?;
    let out = ctx.out();
    write_charge_csv(&out.join("charge.csv"), &traj)?;
    let states = reconstruct_many(&phi, &traj, &times)?;
    for (k, (t, s)) in times.iter().zip(&states).enumerate() {
        write_state_csv(&out.join("states").join(format!("state_{k:04}.csv")), s, *t)?;
    }
    let mut energy_times = vec![0.0];
    energy_times.extend(&times);
    let energies = delta_energy_series(&phi, &traj, &energy_times)?;
    let rows = energy_times
        .iter()
        .zip(&energies)
        .zip(std::iter::once(&phi).chain(&states))
        .map(|((t, e), s)| vec![fmt_f64(*t), fmt_f64(s.l2_norm()), fmt_f64(*e)]);
    write_table(&out.join("energy.csv"), &["t", "l2", "energy"], rows)?;
    let e0 = energies[0];
    let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
        / e0.abs().max(f64::MIN_POSITIVE);
    write_json(
        &out.join("summary.json"),
        &json!({
            "nodes": traj.len(),
            "final_time": traj.final_time(),
            "initial_energy": e0,
            "max_relative_energy_drift": drift,
        }),
    )?;
    ctx.say(format!(
        "delta: {} charge nodes to t = {}, max energy drift {:.3e}",
        traj.len(),
        traj.final_time(),
        drift
    ));
    Ok(())
}

fn simulate_manybody(cli: &Cli) -> Result<()> {
    let (mut cfg, ctx): (ManyBodyConfig, _) = load(cli)?;
    cfg.validate(ctx.base())?;
    let grid = cfg.grid()?;
    let bump = cfg.bump(ctx.base())?;
    let times = cfg.sample_times();
    let steps: Vec<usize> = times
        .iter()
        .map(|t| (t / cfg.dt).round() as usize)
        .collect();
    if let Some((t, _)) = times
        .iter()
        .zip(&steps)
        .find(|(t, k)| ((**k as f64) * cfg.dt - **t).abs() > 1e-9)
    {
        return Err(Error::invalid(
            "sample_times",
            format!("{t} is not a multiple of dt = {}", cfg.dt),
        ));
    }
    cfg.num_points = Some(cfg.num_points());
    cfg.sample_times = Some(times.clone());
    cfg.profile = absolute_profile(&cfg.profile, ctx.base());
    ctx.echo(&cfg)?;

    let n = cfg.particles;
    let phi = WaveFunction::gaussian(grid, cfg.sigma)?.normalized()?;
    let u = hartree_states_at(&phi, &bump, cfg.mu, cfg.dt, &times)?;
    let mut prop = ManyBodyPropagator::new(n, grid, &bump, cfg.mu, cfg.dt)?;
    let mut psi = build_factorized(&phi, n)?;
    let out = ctx.out();
    let mut rows = Vec::with_capacity(times.len() + 1);
    let mut record = |t: f64, psi: &crate::manybody::ManyBodyState, d: f64| -> Result<()> {
        let e = energy_functional(psi, &bump, cfg.mu)?;
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("many-body energy at t = {t}")));
        }
        rows.push(vec![
            fmt_f64(t),
            fmt_f64(psi.norm()),
            fmt_f64(e / n as f64),
            fmt_f64(d),
        ]);
        Ok(())
    };
    record(0.0, &psi, 0.0)?;
    let mut done = 0;
    for (k, ((&t, &target), u_t)) in times.iter().zip(&steps).zip(&u).enumerate() {
        prop.advance(&mut psi, target.saturating_sub(done))?;
        done = done.max(target);
        let gamma = reduced_density(&psi);
        let d = trace_distance(&gamma, u_t)?;
        record(t, &psi, d)?;
        write_density_csv(
            &out.join("density").join(format!("gamma_{k:04}.csv")),
            &gamma,
        )?;
        write_eigenvalues_csv(
            &out.join("density").join(format!("eigenvalues_{k:04}.csv")),
            &gamma.eigenvalues(),
        )?;
    }
    write_table(
        &out.join("series.csv"),
        &["t", "norm", "energy_per_particle", "trace_distance_hartree"],
        rows,
    )?;
    ctx.say(format!(
        "manybody: N = {n}, M = {}, {} steps to t = {}",
        grid.num_points(),
        done,
        times.last().copied().unwrap_or(0.0)
    ));
    Ok(())
}

fn study_eps(cli: &Cli) -> Result<()> {
    let (mut file, ctx): (EpsStudyFile, _) = load(cli)?;
    let cfg = file.resolve(ctx.base())?;
    file.sample_times = Some(cfg.sample_times.clone());
    file.profile = absolute_profile(&file.profile, ctx.base());
    ctx.echo(&file)?;
    let study = run_eps_study(&cfg, cli.jobs)?;
    write_eps_report(ctx.out(), &study)?;
    for (eps, d, _) in study.table() {
        ctx.say(format!("eps = {eps:<8} sup_t ||u - phi|| = {d:.6e}"));
    }
    if let Some(fit) = &study.fit {
        ctx.say(format!(
            "fitted rate {:.4} (max log residual {:.3e})",
            fit.slope, fit.max_residual
        ));
    }
    check_eps_properties(&study, &cfg)
}

fn study_chaos(cli: &Cli) -> Result<()> {
    let (mut file, ctx): (ChaosStudyFile, _) = load(cli)?;
    let cfg = file.resolve(ctx.base())?;
    file.sample_times = Some(cfg.sample_times.clone());
    file.profile = absolute_profile(&file.profile, ctx.base());
    ctx.echo(&file)?;
    let study = run_chaos_study(&cfg, cli.jobs)?;
    write_chaos_report(ctx.out(), &study)?;
    for (n, d) in study.final_hartree_leg() {
        ctx.say(format!("N = {n}: d_hartree(T) = {d:.6e}"));
    }
    check_chaos_properties(&study, &cfg)
}

type Check = (&'static str, fn() -> Result<bool>);

fn selftest_checks() -> Vec<Check> {
    fn grid() -> Result<Grid1D> {
        Grid1D::new(8.0, 128)
    }
    vec![
        ("grid origin is a node", || {
            let g = grid()?;
            Ok(g.node(g.origin_index()) == 0.0)
        }),
        ("free flow preserves the norm", || {
            let phi = WaveFunction::gaussian(grid()?, 1.0)?;
            Ok((free_step(&phi, 0.7).l2_norm() - phi.l2_norm()).abs() < 1e-12)
        }),
        ("hartree with mu = 0 is free flow", || {
            let phi = WaveFunction::gaussian(grid()?, 1.0)?;
            let b = ScaledBump::gaussian(0.5)?;
            let u = hartree_states_at(&phi, &b, 0.0, 1e-3, &[0.1])?;
            Ok(u[0].sup_distance(&free_step(&phi, 0.1))? <= 1e-8)
        }),
        ("delta with mu = 0 is free flow", || {
            let phi = WaveFunction::gaussian(grid()?, 1.0)?;
            let traj = solve_charge(&phi, 0.0, 1e-2, 10)?;
            let s = reconstruct_many(&phi, &traj, &[traj.final_time()])?;
            Ok(traj.charges() == traj.sources()
                && s[0].sup_distance(&free_step(&phi, 0.1))? <= 1e-8)
        }),
        ("many-body with mu = 0 stays factorized", || {
            let g = Grid1D::new(2.0, 32)?;
            let phi = WaveFunction::gaussian(g, 0.3)?.normalized()?;
            let b = ScaledBump::gaussian(0.5)?;
            let mut psi = build_factorized(&phi, 2)?;
            ManyBodyPropagator::new(2, g, &b, 0.0, 1e-3)?.advance(&mut psi, 50)?;
            let d = trace_distance(&reduced_density(&psi), &free_step(&phi, 0.05))?;
            Ok(d <= 1e-8)
        }),
        ("defect state trace distance is 2/N", || {
            let g = grid()?;
            let phi = WaveFunction::gaussian(g, 0.5)?.normalized()?;
            let perp = WaveFunction::from_fn(g, |x| Complex64::new(x * (-x * x).exp(), 0.0))?
                .normalized()?;
            let tensor = reduced_density(&build_defect_state(&phi, &perp, 2)?);
            let mut ok = (trace_distance(&tensor, &phi)? - 1.0).abs() < 1e-9;
            for n in [2usize, 5, 10] {
                let gamma = defect_reduced_density(&phi, &perp, n)?;
                ok &= (trace_distance(&gamma, &phi)? - 2.0 / n as f64).abs() < 1e-9;
            }
            Ok(ok)
        }),
        ("pure state has distance 0 from itself", || {
            let phi = WaveFunction::gaussian(grid()?, 1.0)?.normalized()?;
            Ok(trace_distance(&ReducedDensity::pure(&phi), &phi)? < 1e-10)
        }),
        ("rate fit recovers exact powers", || {
            let xs = [0.4, 0.2, 0.1, 0.05];
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            Ok((fit_rate(&xs, &xs)?.slope - 1.0).abs() < 1e-12
                && (fit_rate(&xs, &sq)?.slope - 2.0).abs() < 1e-12)
        }),
        ("memory guard refuses N = 4, M = 128", || {
            Ok(matches!(
                check_budget(128, 4),
                Err(Error::MemoryBudget { .. })
            ))
        }),
        ("resolution guard refuses eps < 4h", || {
            let b = ScaledBump::gaussian(0.1)?;
            Ok(matches!(
                b.ensure_resolved(&grid()?),
                Err(Error::UnresolvedBump { .. })
            ))
        }),
    ]
}

fn selftest(cli: &Cli) -> Result<()> {
    let ctx = Ctx {
        cli,
        raw: String::new(),
        base: None,
    };
    let results = with_jobs(cli.jobs, || {
        selftest_checks()
            .into_iter()
            .map(|(name, f)| (name, f()))
            .collect::<Vec<_>>()
    })?;
    let mut failed = Vec::new();
    for (name, r) in &results {
        let status = match r {
            Ok(true) => "PASS",
            _ => {
                failed.push(*name);
                "FAIL"
            }
        };
        match r {
            Err(e) => ctx.say(format!("{status} {name}: {e}")),
            _ => ctx.say(format!("{status} {name}")),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::PropertyViolated(format!(
            "selftest failed: {}",
            failed.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for (name, f) in selftest_checks() {
            assert!(f().unwrap(), "{name}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("mu", "x")), 2);
        assert_eq!(exit_code(&Error::NonFinite("x".into())), 3);
        assert_eq!(
            exit_code(&Error::StepTooLarge {
                dt: 1.0,
                bound: 0.1
            }),
            4
        );
        let e = Error::UnresolvedBump {
            eps: 0.05,
            h: 0.04,
            factor: 4.0,
        };
        let msg = describe(&e);
        assert!(
            msg.starts_with("resolution guard") && msg.contains("0.05") && msg.contains("0.04"),
            "{msg}"
        );
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        assert_eq!(main_with_args(["deltanls", "simulate-everything"]), 2);
    }
}
