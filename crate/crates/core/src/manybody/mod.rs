//! Exact small-`N` dynamics of the bosonic `N`-body problem
//!
//! `i Psi_t = -sum_j Psi_{x_j x_j} + (mu/N) sum_{k<l} w_eps(x_k) w_eps(x_l) Psi`
//!
//! on `grid^N`, with reduced density matrices and trace distances.

mod density;
mod propagate;
mod state;

pub use density::{
    defect_reduced_density, factorized_energy_per_particle, reduced_density, trace_distance,
    ReducedDensity,
};
pub use propagate::{
    energy_functional, evolve_manybody, hamiltonian_expectation, manybody_potential,
    ManyBodyPropagator,
};
pub use state::{
    build_defect_state, build_factorized, check_budget, ManyBodyState, MAX_PARTICLES,
    MEMORY_BUDGET, MIN_PARTICLES,
};
