//! NLS with a cubic nonlinearity concentrated at the origin,
//! `i phi_t = -phi'' + mu |phi(0)|^2 phi(0) delta`.
//!
//! The solution is driven entirely by its value at the origin, so the solver
//! first integrates the scalar Volterra equation for `q(t) = phi_t(0)` and then
//! rebuilds the state on the grid from Duhamel's formula.

mod charge;
mod faddeeva;
mod kernel;
mod reconstruct;

pub use charge::{
    free_at_origin, solve_charge, AbelWeights, ChargeTrajectory, DAMPING, MAX_NODE_ITERATIONS,
    NODE_TOLERANCE,
};
pub use faddeeva::faddeeva_on_diagonal;
pub use kernel::kernel_integrals;
pub use reconstruct::{delta_energy_series, reconstruct, reconstruct_many};
