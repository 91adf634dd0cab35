use std::ffi::CStr;
use std::ptr;

use deltanls::delta::free_at_origin;
use deltanls::hartree::energy_hartree;
use deltanls::onebody::{energy_delta, free_step};
use deltanls::{Grid1D, ScaledBump, WaveFunction};
use deltanls_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nd_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn grid(l: f64, m: usize) -> *mut NdGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { nd_grid_new(l, m, &mut g) }, NdStatus::Ok);
    g
}

fn gaussian(g: *const NdGrid, sigma: f64) -> *mut NdWave {
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { nd_wave_gaussian(g, sigma, &mut w) }, NdStatus::Ok);
    w
}

fn values(w: *const NdWave) -> Vec<num_complex::Complex64> {
    let n = unsafe { nd_wave_len(w) };
    let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
    assert_eq!(
        unsafe { nd_wave_values(w, re.as_mut_ptr(), im.as_mut_ptr(), n) },
        NdStatus::Ok
    );
    re.into_iter()
        .zip(im)
        .map(|(a, b)| num_complex::Complex64::new(a, b))
        .collect()
}

#[test]
fn grid_and_wave_round_trip() {
    let g = grid(4.0, 64);
    unsafe {
        assert_eq!(nd_grid_num_points(g), 64);
        assert_eq!(nd_grid_spacing(g), 0.125);
        let mut x = vec![0.0; 64];
        assert_eq!(nd_grid_nodes(g, x.as_mut_ptr(), 64), NdStatus::Ok);
        assert_eq!((x[0], x[32]), (-4.0, 0.0));

        let re: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        let im: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let mut w = ptr::null_mut();
        assert_eq!(
            nd_wave_from_parts(g, re.as_ptr(), im.as_ptr(), 64, &mut w),
            NdStatus::Ok
        );
        let back = values(w);
        assert!(back
            .iter()
            .zip(&re)
            .zip(&im)
            .all(|((z, a), b)| z.re == *a && z.im == *b));
        nd_wave_free(w);
        nd_grid_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(nd_grid_new(4.0, 100, &mut g), NdStatus::Validation);
        assert!(g.is_null());
        assert!(last_error().contains('M'), "{}", last_error());

        assert_eq!(nd_grid_new(4.0, 64, ptr::null_mut()), NdStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(nd_grid_num_points(ptr::null()), 0);
        assert!(nd_wave_l2_norm(ptr::null()).is_nan());

        let g = grid(4.0, 64);
        let w = gaussian(g, 1.0);
        let mut out = ptr::null_mut();
        // h = 0.125 cannot resolve eps = 0.1.
        assert_eq!(
            nd_hartree_evolve(w, 0.1, 1.0, 1e-3, 0.1, &mut out),
            NdStatus::Guard
        );
        assert!(last_error().contains("eps = 0.1"), "{}", last_error());
        assert_eq!(
            nd_hartree_evolve(w, 0.5, 1.0, 1.0, 1.0, &mut out),
            NdStatus::Guard
        );
        assert!(last_error().contains("stiffness"), "{}", last_error());

        let mut short = [0.0; 3];
        assert_eq!(
            nd_wave_values(w, short.as_mut_ptr(), short.as_mut_ptr(), 3),
            NdStatus::Validation
        );
        nd_wave_free(w);
        nd_grid_free(g);
        nd_wave_free(ptr::null_mut());
        nd_grid_free(ptr::null_mut());
    }
}

#[test]
fn free_flow_through_both_solvers() {
    let core_grid = Grid1D::new(10.0, 256).unwrap();
    let phi = WaveFunction::gaussian(core_grid, 1.0).unwrap();
    let expected = free_step(&phi, 0.2);
    let g = grid(10.0, 256);
    let w = gaussian(g, 1.0);
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            nd_hartree_evolve(w, 0.5, 0.0, 1e-3, 0.2, &mut h),
            NdStatus::Ok
        );
        let hv = values(h);
        assert!(hv
            .iter()
            .zip(expected.values())
            .all(|(a, b)| (a - b).norm() < 1e-8));

        let mut d = ptr::null_mut();
        assert_eq!(nd_delta_evolve(w, 0.0, 1e-2, 0.2, &mut d), NdStatus::Ok);
        let dv = values(d);
        assert!(dv
            .iter()
            .zip(expected.values())
            .all(|(a, b)| (a - b).norm() < 1e-8));

        let (mut re, mut im) = ([0.0; 21], [0.0; 21]);
        assert_eq!(
            nd_delta_charge(w, 0.0, 1e-2, 20, re.as_mut_ptr(), im.as_mut_ptr(), 21),
            NdStatus::Ok
        );
        let q = free_at_origin(&phi, 0.2);
        assert!((re[20] - q.re).abs() < 1e-14 && (im[20] - q.im).abs() < 1e-14);
        assert_eq!(
            nd_delta_charge(w, 0.0, 1e-2, 20, re.as_mut_ptr(), im.as_mut_ptr(), 20),
            NdStatus::Validation
        );

        nd_wave_free(h);
        nd_wave_free(d);
        nd_wave_free(w);
        nd_grid_free(g);
    }
}

#[test]
fn energies_match_the_library() {
    let core_grid = Grid1D::new(10.0, 256).unwrap();
    let phi = WaveFunction::gaussian(core_grid, 1.0).unwrap();
    let g = grid(10.0, 256);
    let w = gaussian(g, 1.0);
    unsafe {
        let mut e = f64::NAN;
        assert_eq!(nd_hartree_energy(w, 0.5, 2.0, &mut e), NdStatus::Ok);
        assert_eq!(
            e,
            energy_hartree(&phi, &ScaledBump::gaussian(0.5).unwrap(), 2.0).unwrap()
        );
        assert_eq!(nd_delta_energy(w, 2.0, &mut e), NdStatus::Ok);
        assert_eq!(e, energy_delta(&phi, 2.0));
        assert_eq!(
            nd_delta_energy(w, 2.0, ptr::null_mut()),
            NdStatus::NullPointer
        );
        nd_wave_free(w);
        nd_grid_free(g);
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(nd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/deltanls.h"))
            .unwrap();
    for sym in [
        "nd_grid_new",
        "nd_hartree_evolve",
        "nd_delta_charge",
        "nd_last_error_message",
        "ND_STATUS_GUARD",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
    assert!(header.contains("typedef struct NdWave NdWave;"));
}
