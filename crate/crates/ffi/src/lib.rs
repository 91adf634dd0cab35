//! C interface.
//!
//! Objects are opaque heap handles created by `nd_*_new`-style functions and
//! released with the matching `nd_*_free`. Every fallible call returns an
//! [`NdStatus`]; on failure the message is available from
//! [`nd_last_error_message`] on the same thread until the next failing call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use deltanls::delta::{reconstruct, solve_charge};
use deltanls::hartree::{energy_hartree, evolve_hartree, HartreeRun};
use deltanls::onebody::energy_delta;
use deltanls::{Error, ErrorKind, Grid1D, ScaledBump, WaveFunction};
use num_complex::Complex64;

/// Call outcome. Nonzero values match the command-line exit codes where
/// both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Numerical = 3,
    Guard = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Periodic grid on `[-L, L)`.
pub struct NdGrid(Grid1D);

/// Complex samples on an [`NdGrid`].
pub struct NdWave(WaveFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> NdStatus {
    match err.kind() {
        ErrorKind::Validation => NdStatus::Validation,
        ErrorKind::Numerical => NdStatus::Numerical,
        ErrorKind::Guard => NdStatus::Guard,
        ErrorKind::Io => NdStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> NdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NdStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            NdStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            NdStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn slice_mut<'a>(
    p: *mut f64,
    len: usize,
    what: &'static str,
) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(len: usize, need: usize) -> Result<(), Failure> {
    if len < need {
        return Err(Failure::Lib(Error::InvalidParameter {
            name: "len",
            reason: format!("buffer holds {len} values, need {need}"),
        }));
    }
    Ok(())
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn nd_grid_new(
    half_width: f64,
    num_points: usize,
    out: *mut *mut NdGrid,
) -> NdStatus {
    guarded(|| put(out, NdGrid(Grid1D::new(half_width, num_points)?), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn nd_grid_free(grid: *mut NdGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nd_grid_num_points(grid: *const NdGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.num_points())
}

/// Node spacing, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nd_grid_spacing(grid: *const NdGrid) -> f64 {
    grid.as_ref().map_or(f64::NAN, |g| g.0.spacing())
}

/// Writes the nodes into `x[0..len)`; `len` must be at least the node count.
#[no_mangle]
pub unsafe extern "C" fn nd_grid_nodes(grid: *const NdGrid, x: *mut f64, len: usize) -> NdStatus {
    guarded(|| {
        let g = &get(grid, "grid")?.0;
        check_len(len, g.num_points())?;
        for (dst, v) in slice_mut(x, len, "x")?.iter_mut().zip(g.nodes()) {
            *dst = v;
        }
        Ok(())
    })
}

/// Gaussian `(2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2))` sampled on `grid`.
#[no_mangle]
pub unsafe extern "C" fn nd_wave_gaussian(
    grid: *const NdGrid,
    sigma: f64,
    out: *mut *mut NdWave,
) -> NdStatus {
    guarded(|| {
        let g = get(grid, "grid")?.0;
        put(out, NdWave(WaveFunction::gaussian(g, sigma)?), "out")
    })
}

/// Copies `len` complex samples given as separate real and imaginary arrays.
#[no_mangle]
pub unsafe extern "C" fn nd_wave_from_parts(
    grid: *const NdGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut NdWave,
) -> NdStatus {
    guarded(|| {
        let g = get(grid, "grid")?.0;
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        if im.is_null() {
            return Err(Failure::Null("im"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let im = std::slice::from_raw_parts(im, len);
        let values = re
            .iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(*a, *b))
            .collect();
        put(out, NdWave(WaveFunction::new(g, values)?), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_wave_free(wave: *mut NdWave) {
    if !wave.is_null() {
        drop(Box::from_raw(wave));
    }
}

/// Sample count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nd_wave_len(wave: *const NdWave) -> usize {
    wave.as_ref().map_or(0, |w| w.0.values().len())
}

/// Writes real and imaginary parts into `re[0..len)` and `im[0..len)`.
#[no_mangle]
pub unsafe extern "C" fn nd_wave_values(
    wave: *const NdWave,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NdStatus {
    guarded(|| {
        let w = &get(wave, "wave")?.0;
        check_len(len, w.values().len())?;
        let re = slice_mut(re, len, "re")?;
        let im = slice_mut(im, len, "im")?;
        for (k, z) in w.values().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Discrete L² norm, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nd_wave_l2_norm(wave: *const NdWave) -> f64 {
    wave.as_ref().map_or(f64::NAN, |w| w.0.l2_norm())
}

/// Concentrated Hartree evolution with a Gaussian bump of width `eps`.
#[no_mangle]
pub unsafe extern "C" fn nd_hartree_evolve(
    initial: *const NdWave,
    eps: f64,
    mu: f64,
    dt: f64,
    t_final: f64,
    out: *mut *mut NdWave,
) -> NdStatus {
    guarded(|| {
        let phi = &get(initial, "initial")?.0;
        let run = HartreeRun {
            initial: phi.clone(),
            bump: ScaledBump::gaussian(eps)?,
            mu,
            dt,
            t_final,
            stride: usize::MAX,
        };
        let traj = evolve_hartree(&run)?;
        put(out, NdWave(traj.final_state().clone()), "out")
    })
}

/// Hartree energy `(1/2)||u'||^2 + (mu/4) <w_eps, |u|^2>^2`.
#[no_mangle]
pub unsafe extern "C" fn nd_hartree_energy(
    wave: *const NdWave,
    eps: f64,
    mu: f64,
    out: *mut f64,
) -> NdStatus {
    guarded(|| {
        let u = &get(wave, "wave")?.0;
        let e = energy_hartree(u, &ScaledBump::gaussian(eps)?, mu)?;
        *slice_mut(out, 1, "out")?.first_mut().expect("one slot") = e;
        Ok(())
    })
}

/// Charges `q(k step)` for `k = 0..=n_nodes`; the buffers need `n_nodes + 1` slots.
#[no_mangle]
pub unsafe extern "C" fn nd_delta_charge(
    initial: *const NdWave,
    mu: f64,
    step: f64,
    n_nodes: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NdStatus {
    guarded(|| {
        let phi = &get(initial, "initial")?.0;
        check_len(len, n_nodes.saturating_add(1))?;
        let re = slice_mut(re, len, "re")?;
        let im = slice_mut(im, len, "im")?;
        let traj = solve_charge(phi, mu, step, n_nodes)?;
        for (k, q) in traj.charges().iter().enumerate() {
            re[k] = q.re;
            im[k] = q.im;
        }
        Ok(())
    })
}

/// Delta-NLS state at `t`, which must be a multiple of `step`.
#[no_mangle]
pub unsafe extern "C" fn nd_delta_evolve(
    initial: *const NdWave,
    mu: f64,
    step: f64,
    t: f64,
    out: *mut *mut NdWave,
) -> NdStatus {
    guarded(|| {
        let phi = &get(initial, "initial")?.0;
        if !(step.is_finite() && step > 0.0 && t.is_finite() && t >= 0.0) {
            return Err(Failure::Lib(Error::InvalidParameter {
                name: "step",
                reason: format!("need step > 0 and t >= 0, got step = {step}, t = {t}"),
            }));
        }
        let traj = solve_charge(phi, mu, step, (t / step).round() as usize)?;
        put(out, NdWave(reconstruct(phi, &traj, t)?), "out")
    })
}

/// Delta-NLS energy `(1/2)||phi'||^2 + (mu/4)|phi(0)|^4`.
#[no_mangle]
pub unsafe extern "C" fn nd_delta_energy(wave: *const NdWave, mu: f64, out: *mut f64) -> NdStatus {
    guarded(|| {
        let phi = &get(wave, "wave")?.0;
        *slice_mut(out, 1, "out")?.first_mut().expect("one slot") = energy_delta(phi, mu);
        Ok(())
    })
}
