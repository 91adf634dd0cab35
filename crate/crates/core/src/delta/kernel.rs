//! Closed forms of the first and second time integrals of the free kernel,
//! `V(tau, x) = int_0^tau U(s, x) ds` and `W(tau, x) = int_0^tau V(s, x) ds`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::faddeeva::ray_values;

pub(crate) fn sqrt_4pi_i() -> Complex64 {
    Complex64::new(0.0, 4.0 * PI).sqrt()
}

/// Returns `(V, W)`; both vanish at `tau = 0`.
pub fn kernel_integrals(tau: f64, x: f64) -> (Complex64, Complex64) {
    if tau <= 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    kernel_integrals_with(tau, x, sqrt_4pi_i().inv())
}

#[inline]
pub(crate) fn kernel_integrals_with(tau: f64, x: f64, inv_s4: Complex64) -> (Complex64, Complex64) {
    let st = tau.sqrt();
    let r = x.abs() / (2.0 * st);
    let v = ray_values(r);
    let e = Complex64::from_polar(1.0, r * r) * inv_s4;
    (-2.0 * st * v.rho * e, (-2.0 / 3.0) * tau * st * v.beta * e)
}
