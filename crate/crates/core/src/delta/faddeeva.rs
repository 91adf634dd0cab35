//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` on the ray `z = e^{i pi/4} r`,
//! the only place the free-kernel time integrals need it.
//!
//! Small `r` uses the Taylor series `w(z) = sum (iz)^n / Gamma(n/2 + 1)`; larger
//! `r` the Laplace continued fraction
//! `w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`.
//! Callers never see `w` itself but the combinations `rho` and `beta` below,
//! which the continued fraction delivers without cancellation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 1.5;

/// `rho = -i sqrt(pi) z w(z) - 1` and `beta = (3 - 2 z^2) rho + 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RayValues {
    pub rho: Complex64,
    pub beta: Complex64,
}

fn ray_point(r: f64) -> Complex64 {
    Complex64::new(r * FRAC_1_SQRT_2, r * FRAC_1_SQRT_2)
}

fn w_series(z: Complex64) -> Complex64 {
    let iz = Complex64::i() * z;
    let iz2 = iz * iz;
    let mut even = Complex64::new(1.0, 0.0);
    let mut odd = iz * (2.0 / PI.sqrt());
    let mut sum = even + odd;
    for m in 1..200 {
        even *= iz2 / m as f64;
        odd *= iz2 / (m as f64 + 0.5);
        sum += even + odd;
        if even.norm() + odd.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

fn depth(r: f64) -> usize {
    (440.0 / (r * r)).ceil() as usize + 12
}

/// Levels `t_2, t_3, t_4` of the continued fraction, `t_n = z - (n/2)/t_{n+1}`.
fn fraction_levels(z: Complex64, r: f64) -> (Complex64, Complex64, Complex64) {
    let mut t = z;
    let mut t3 = z;
    let mut t4 = z;
    for n in (2..=depth(r)).rev() {
        t4 = t3;
        t3 = t;
        t = z - (n as f64 / 2.0) / t;
    }
    (t, t3, t4)
}

pub(crate) fn ray_values(r: f64) -> RayValues {
    let z = ray_point(r);
    if r <= SERIES_RADIUS {
        let rho = -Complex64::i() * PI.sqrt() * z * w_series(z) - 1.0;
        let beta = (3.0 - 2.0 * z * z) * rho + 1.0;
        RayValues { rho, beta }
    } else {
        // K = t_2. rho = 1/(2Kz - 1), and beta simplifies to
        // 2(1 - z/t_3)/(2Kz - 1) = -3 / (t_4 t_3 (2Kz - 1)).
        let (k, t3, t4) = fraction_levels(z, r);
        let denom = 2.0 * k * z - 1.0;
        RayValues {
            rho: denom.inv(),
            beta: -3.0 / (t4 * t3 * denom),
        }
    }
}

/// `w(e^{i pi/4} r)` for `r >= 0`.
pub fn faddeeva_on_diagonal(r: f64) -> Complex64 {
    let z = ray_point(r);
    if r <= SERIES_RADIUS {
        w_series(z)
    } else {
        let (k, _, _) = fraction_levels(z, r);
        Complex64::i() / PI.sqrt() / (z - 0.5 / k)
    }
}
