use super::spectral::Spectral;
use super::wave::WaveFunction;

/// Energy of the point-nonlinearity NLS: `(1/2)||phi'||^2 + (mu/4)|phi(0)|^4`.
pub fn energy_delta(phi: &WaveFunction, mu: f64) -> f64 {
    energy_delta_with(&Spectral::new(*phi.grid()), phi, mu)
}

pub fn energy_delta_with(spectral: &Spectral, phi: &WaveFunction, mu: f64) -> f64 {
    0.5 * spectral.kinetic_norm_sq(phi) + 0.25 * mu * phi.at_origin().norm_sqr().powi(2)
}

/// `sqrt(||psi||^2 + ||psi'||^2)`.
pub fn h1_norm(psi: &WaveFunction) -> f64 {
    let sp = Spectral::new(*psi.grid());
    (psi.norm_sq() + sp.kinetic_norm_sq(psi)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onebody::Grid1D;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn zero_state() {
        let g = Grid1D::new(5.0, 64).unwrap();
        let z = WaveFunction::zeros(g);
        assert_eq!(energy_delta(&z, 1.0), 0.0);
        assert_eq!(h1_norm(&z), 0.0);
    }

    #[test]
    fn gaussian_closed_forms() {
        // For sigma = 1: ||phi'||^2 = 1/(4 sigma^2), |phi(0)|^4 = 1/(2 pi sigma^2).
        let g = Grid1D::new(20.0, 1024).unwrap();
        let phi = WaveFunction::gaussian(g, 1.0).unwrap();
        let e = energy_delta(&phi, 1.0);
        assert!((e - (0.125 + 0.25 / (2.0 * PI))).abs() < 1e-12, "{e}");
        assert!((h1_norm(&phi) - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_state_has_no_kinetic_energy() {
        let g = Grid1D::new(2.0, 32).unwrap();
        let c = WaveFunction::from_fn(g, |_| Complex64::new(0.3, -0.1)).unwrap();
        assert!((h1_norm(&c) - c.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn vanishing_at_origin_leaves_kinetic_part() {
        // sin(k x) windowed by a Gaussian vanishes at x = 0.
        let g = Grid1D::new(20.0, 512).unwrap();
        let psi = WaveFunction::from_fn(g, |x| {
            Complex64::new((3.0 * x).sin() * (-x * x / 4.0).exp(), 0.0)
        })
        .unwrap();
        let sp = Spectral::new(g);
        assert_eq!(psi.at_origin().norm(), 0.0);
        let kin = 0.5 * sp.kinetic_norm_sq(&psi);
        assert!((energy_delta(&psi, 3.0) - kin).abs() < 1e-15);
    }

    #[test]
    fn phase_invariant() {
        let g = Grid1D::new(20.0, 256).unwrap();
        let phi = WaveFunction::gaussian(g, 1.3).unwrap();
        let rot = phi.scaled(Complex64::from_polar(1.0, 0.9));
        assert!((energy_delta(&phi, 2.0) - energy_delta(&rot, 2.0)).abs() < 1e-14);
        assert!((h1_norm(&phi) - h1_norm(&rot)).abs() < 1e-14);
    }
}
