//! The impurity bump `w`, its short-range scaling `w_eps(x) = w(x/eps)/eps`,
//! the three-body pair potential and the concentrated coupling
//! `<w_eps, |u|^2>`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::onebody::{Grid1D, WaveFunction};

/// Default resolution guard: a bump of width `eps` needs `eps >= 4h`.
pub const RESOLUTION_FACTOR: f64 = 4.0;

/// Even, positive, unit-integral bump profile.
#[derive(Debug, Clone, PartialEq)]
pub enum BumpProfile {
    /// `pi^{-1/2} exp(-x^2)`.
    Gaussian,
    Tabulated(TabulatedProfile),
}

impl BumpProfile {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(BumpProfile::Gaussian),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (expected \"gaussian\" or a tabulated CSV path)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            BumpProfile::Gaussian => "gaussian",
            BumpProfile::Tabulated(_) => "tabulated",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BumpProfile::Gaussian => (-x * x).exp() / PI.sqrt(),
            BumpProfile::Tabulated(t) => t.eval(x),
        }
    }
}

/// Profile given by samples `(x_i, w_i)`, linearly interpolated, zero
/// outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    xs: Arc<[f64]>,
    ws: Arc<[f64]>,
}

impl TabulatedProfile {
    pub const EVEN_TOL: f64 = 1e-8;
    pub const INTEGRAL_TOL: f64 = 1e-6;

    pub fn new(xs: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        if xs.len() != ws.len() || xs.len() < 3 {
            return Err(Error::invalid("profile", "need at least three (x, w) rows"));
        }
        if xs
            .windows(2)
            .any(|p| p[1].partial_cmp(&p[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::invalid(
                "profile",
                "abscissae must be strictly increasing",
            ));
        }
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "profile",
                "values must be finite and w >= 0",
            ));
        }
        let table = Self {
            xs: xs.into(),
            ws: ws.into(),
        };
        for (&x, &w) in table.xs.iter().zip(table.ws.iter()) {
            let mirror = table.eval(-x);
            if (w - mirror).abs() > Self::EVEN_TOL {
                return Err(Error::invalid(
                    "profile",
                    format!("not even: w({x}) = {w} but w({}) = {mirror}", -x),
                ));
            }
        }
        if table.eval(0.0) <= 0.0 {
            return Err(Error::invalid("profile", "w(0) must be positive"));
        }
        let integral: f64 = table
            .xs
            .windows(2)
            .zip(table.ws.windows(2))
            .map(|(x, w)| 0.5 * (x[1] - x[0]) * (w[0] + w[1]))
            .sum();
        if (integral - 1.0).abs() > Self::INTEGRAL_TOL {
            return Err(Error::invalid(
                "profile",
                format!(
                    "integral is {integral}, expected 1 within {}",
                    Self::INTEGRAL_TOL
                ),
            ));
        }
        Ok(table)
    }

    /// Reads a two-column CSV `x,w`; a non-numeric first line is a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let source_name = path.display().to_string();
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        source_name,
                        reason: format!("line {}: expected two columns", lineno + 1),
                    })
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(w)) => {
                    xs.push(x);
                    ws.push(w);
                }
                _ if xs.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        source_name,
                        reason: format!("line {}: not a number pair", lineno + 1),
                    })
                }
            }
        }
        Self::new(xs, ws)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.xs;
        let n = xs.len();
        if x < xs[0] || x > xs[n - 1] {
            return 0.0;
        }
        let i = xs.partition_point(|&v| v <= x);
        if i == 0 {
            return self.ws[0];
        }
        if i >= n {
            return self.ws[n - 1];
        }
        let (x0, x1) = (xs[i - 1], xs[i]);
        let s = (x - x0) / (x1 - x0);
        self.ws[i - 1] * (1.0 - s) + self.ws[i] * s
    }
}

/// `w_eps(x) = eps^{-1} w(x / eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBump {
    profile: BumpProfile,
    eps: f64,
}

impl ScaledBump {
    pub fn new(profile: BumpProfile, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(
                "eps",
                format!("must lie in (0, 1], got {eps}"),
            ));
        }
        Ok(Self { profile, eps })
    }

    pub fn gaussian(eps: f64) -> Result<Self> {
        Self::new(BumpProfile::Gaussian, eps)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.profile.eval(x / self.eps) / self.eps
    }

    pub fn ensure_resolved(&self, grid: &Grid1D) -> Result<()> {
        self.ensure_resolved_with(grid, RESOLUTION_FACTOR)
    }

    pub fn ensure_resolved_with(&self, grid: &Grid1D, factor: f64) -> Result<()> {
        let h = grid.spacing();
        if self.eps < factor * h {
            Err(Error::UnresolvedBump {
                eps: self.eps,
                h,
                factor,
            })
        } else {
            Ok(())
        }
    }

    /// Samples `w_eps` on the grid after the resolution check.
    pub fn sample(&self, grid: &Grid1D) -> Result<SampledBump> {
        self.sample_with(grid, RESOLUTION_FACTOR)
    }

    pub fn sample_with(&self, grid: &Grid1D, factor: f64) -> Result<SampledBump> {
        self.ensure_resolved_with(grid, factor)?;
        Ok(SampledBump {
            grid: *grid,
            values: grid.nodes().map(|x| self.eval(x)).collect(),
        })
    }
}

/// `w_eps` at the grid nodes.
#[derive(Debug, Clone)]
pub struct SampledBump {
    grid: Grid1D,
    values: Vec<f64>,
}

impl SampledBump {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid rule on the periodic grid: `h * sum w_eps(x_j) |u_j|^2`.
    pub fn coupling(&self, u: &WaveFunction) -> Result<f64> {
        self.grid.ensure_same(u.grid())?;
        Ok(self.coupling_of(u.values()))
    }

    pub(crate) fn coupling_of(&self, values: &[num_complex::Complex64]) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(values)
            .map(|(w, z)| w * z.norm_sqr())
            .sum();
        s * self.grid.spacing()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }
}

pub fn eval_w_eps(b: &ScaledBump, x: f64) -> f64 {
    b.eval(x)
}

/// `W_eps(x_k, x_l) = w_eps(x_k) w_eps(x_l)`.
pub fn pair_potential(b: &ScaledBump, xk: f64, xl: f64) -> f64 {
    b.eval(xk) * b.eval(xl)
}

/// `<w_eps, |u|^2>` on the grid of `u`, refusing unresolved bumps.
pub fn coupling(b: &ScaledBump, u: &WaveFunction) -> Result<f64> {
    b.sample(u.grid())?.coupling(u)
}

/// `eps(N) = (log N)^{-1/2}`.
pub fn epsilon_of_n(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("N", format!("need N >= 2, got {n}")));
    }
    Ok((n as f64).ln().powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn grid() -> Grid1D {
        Grid1D::new(20.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_peak_and_evenness() {
        let b = ScaledBump::gaussian(1.0).unwrap();
        assert!((b.eval(0.0) - PI.powf(-0.5)).abs() < 1e-16);
        for x in [0.1, 0.7, 3.0] {
            assert_eq!(b.eval(x), b.eval(-x));
        }
        assert!((pair_potential(&b, 0.0, 0.0) - 1.0 / PI).abs() < 1e-16);
    }

    #[test]
    fn unit_integral_on_grid() {
        for eps in [1.0, 0.5, 0.1] {
            let b = ScaledBump::gaussian(eps).unwrap();
            // eps = 0.1 is below 4h for this grid; the integral check itself does not need the guard.
            let g = grid();
            let s: f64 = g.nodes().map(|x| b.eval(x)).sum::<f64>() * g.spacing();
            assert!((s - 1.0).abs() < 1e-10, "eps = {eps}: {s}");
        }
    }

    #[test]
    fn tails_vanish() {
        let eps = 0.3;
        let b = ScaledBump::gaussian(eps).unwrap();
        assert!(pair_potential(&b, 10.0 * eps, 0.0) <= 1e-30);
        assert!(pair_potential(&b, 0.1, -12.0 * eps) <= 1e-30);
        assert_eq!(pair_potential(&b, 0.2, -0.5), pair_potential(&b, -0.5, 0.2));
    }

    #[test]
    fn coupling_basics() {
        let g = grid();
        let b = ScaledBump::gaussian(0.5).unwrap();
        assert_eq!(coupling(&b, &WaveFunction::zeros(g)).unwrap(), 0.0);
        let flat = WaveFunction::from_fn(g, |_| Complex64::new(0.6, 0.8) * 0.5).unwrap();
        assert!((coupling(&b, &flat).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn coupling_approaches_density_at_origin() {
        // Oracle: for a Gaussian density the bump average is itself a Gaussian
        // integral, <w_eps, |u|^2> = (2 pi (sigma^2 + eps^2/2))^{-1/2}.
        let g = Grid1D::new(20.0, 2048).unwrap();
        let eps = 0.1;
        let b = ScaledBump::gaussian(eps).unwrap();
        let u = WaveFunction::gaussian(g, 1.0).unwrap();
        let c = coupling(&b, &u).unwrap();
        let exact = (2.0 * PI * (1.0 + eps * eps / 2.0)).powf(-0.5);
        assert!((c - exact).abs() < 1e-12);
        let at0 = u.at_origin().norm_sqr();
        assert!((c - at0).abs() / at0 < 0.02);
    }

    #[test]
    fn guard_refuses_unresolved_bumps() {
        let g = grid();
        let b = ScaledBump::gaussian(0.1).unwrap();
        let err = coupling(&b, &WaveFunction::zeros(g)).unwrap_err();
        assert!(matches!(err, Error::UnresolvedBump { .. }));
        assert!(err.to_string().contains("eps = 0.1"));
    }

    #[test]
    fn coupling_is_quadratic_and_phase_invariant() {
        let g = grid();
        let b = ScaledBump::gaussian(0.5).unwrap();
        let u = WaveFunction::gaussian(g, 0.8).unwrap();
        let c = coupling(&b, &u).unwrap();
        let rot = u.scaled(Complex64::from_polar(1.0, 1.1));
        assert!((coupling(&b, &rot).unwrap() - c).abs() <= 4.0 * f64::EPSILON * c);
        let lam = Complex64::new(1.5, -2.0);
        assert!((coupling(&b, &u.scaled(lam)).unwrap() - lam.norm_sqr() * c).abs() < 1e-14);
    }

    #[test]
    fn pair_potential_integrates_to_one() {
        let g = Grid1D::new(6.0, 256).unwrap();
        let b = ScaledBump::gaussian(0.4).unwrap();
        let h = g.spacing();
        let nodes: Vec<f64> = g.nodes().collect();
        let total: f64 = nodes
            .iter()
            .flat_map(|&x| nodes.iter().map(move |&y| (x, y)))
            .map(|(x, y)| pair_potential(&b, x, y))
            .sum::<f64>()
            * h
            * h;
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn epsilon_schedule() {
        assert!((epsilon_of_n(55).unwrap() - 55f64.ln().powf(-0.5)).abs() < 1e-16);
        // ln 55 = 4.0073332, so the value is 0.4995423.
        assert!((epsilon_of_n(55).unwrap() - 0.4995423).abs() < 1e-7);
        assert!(epsilon_of_n(10).unwrap() > epsilon_of_n(11).unwrap());
        assert!(epsilon_of_n(1_000_000).unwrap() < epsilon_of_n(1000).unwrap());
        assert!(epsilon_of_n(1).is_err());
    }

    #[test]
    fn tabulated_profile_validation() {
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
        let ws: Vec<f64> = xs.iter().map(|x| (-x * x).exp() / PI.sqrt()).collect();
        let t = TabulatedProfile::new(xs.clone(), ws.clone()).unwrap();
        assert!((t.eval(0.005) - BumpProfile::Gaussian.eval(0.005)).abs() < 1e-4);
        assert_eq!(t.eval(5.0), 0.0);

        let mut skew = ws.clone();
        skew[100] *= 1.01;
        assert!(TabulatedProfile::new(xs.clone(), skew).is_err());
        let doubled: Vec<f64> = ws.iter().map(|w| 2.0 * w).collect();
        assert!(TabulatedProfile::new(xs, doubled).is_err());
    }

    #[test]
    fn tabulated_profile_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let mut text = String::from("x,w\n");
        for i in -400..=400 {
            let x = i as f64 * 0.01;
            text.push_str(&format!("{x},{}\n", (-x * x).exp() / PI.sqrt()));
        }
        std::fs::write(&path, text).unwrap();
        let t = TabulatedProfile::from_csv(&path).unwrap();
        assert!((t.eval(0.0) - PI.powf(-0.5)).abs() < 1e-15);
        std::fs::write(&path, "x,w\n0,1\n1,oops\n").unwrap();
        assert!(TabulatedProfile::from_csv(&path).is_err());
    }
}
