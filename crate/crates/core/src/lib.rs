//! Dynamics of bosons interacting through a point impurity in one dimension.
//!
//! Three levels of description are implemented on a common periodic grid:
//!
//! - [`manybody`]: exact small-`N` evolution of the linear `N`-body problem
//!   with the impurity-mediated three-body potential, reduced density
//!   matrices and trace distances;
//! - [`hartree`]: the concentrated Hartree equation
//!   `i u_t = -u'' + mu w_eps <w_eps, |u|^2> u`;
//! - [`delta`]: the NLS with a cubic nonlinearity concentrated at the
//!   origin, solved through the Abel-type Volterra equation for the charge
//!   `q(t) = phi_t(0)`.
//!
//! [`experiments`] ties them together in convergence studies.

pub mod cli;
pub mod config;
pub mod delta;
pub mod error;
pub mod experiments;
pub mod hartree;
pub mod io;
pub mod manybody;
pub mod onebody;
pub mod potentials;

pub use error::{Error, ErrorKind, Result};
pub use onebody::{Grid1D, WaveFunction};
pub use potentials::{BumpProfile, ScaledBump};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
