//! Grids, one-body states, the free flow and the one-body functionals.

mod energy;
mod grid;
mod spectral;
mod wave;

pub use energy::{energy_delta, energy_delta_with, h1_norm};
pub use grid::Grid1D;
pub use spectral::{free_kernel, free_step, DispersionConvention, Spectral};
pub use wave::{inner, l2_norm, WaveFunction};
