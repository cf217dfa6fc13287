//! Phase-space layer: nonlinear dependent variables derived from character
//! grids, the polynomial Hamiltonians generating their deformation flows, the
//! canonical equations, a certified float integrator, and the classical
//! reductions (sixth Painleve form and the Garnier change of variables).

pub mod flow;
pub mod gvars;
pub mod hamiltonian;
pub mod reductions;

pub use gvars::{
    conservation_residuals, g_system_residuals, kappa_identity_residual, uv_relation_residuals,
    verify_flow_system, SigmaPhase,
};
pub use flow::{
    integrate, integrate_partial, singular_distance, IntegratorOptions, Trajectory,
    TrajectorySample,
};
pub use hamiltonian::{CanonicalChart, HamiltonianSystem, PhasePoly};
pub use reductions::{
    hamiltonian_in_phase_space, pvi_dictionary, pvi_reference, pvi_reports, GarnierPoint,
    GarnierTransform,
};
