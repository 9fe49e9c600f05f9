//! Backward-Euler time stepping toward steady state.
//!
//! The linear system `A dQ = L(Q)` uses the Roe-split block Jacobian with a
//! per-cell `|Omega|/dt` diagonal. It is solved either by left-preconditioned
//! restarted GMRES with block-Jacobi inner iterations or by one symmetric
//! Gauss-Seidel sweep.

mod jacobian;
mod krylov;
mod residual;

pub use jacobian::{
    assemble_jacobian, euler_jacobian, face_window, interface_spectral_radius, linearized_face_flux, local_time_steps,
    BlockJacobian, BlockRow,
};
pub use krylov::{dot, gmres, gmres_solve, jacobi_precondition, lusgs_sweep, norm, GmresOptions, GmresReport, Jacobi};
pub use residual::{
    advance_implicit, frechet_matvec, residual_norms, Discretization, Field, LinearSolver, ResidualEval, StepOutcome,
    StepSettings, TimeStepping,
};

#[cfg(test)]
mod tests;
