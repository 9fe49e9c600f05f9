//! Brute-force references for testing the production paths.

mod linear;
mod moments;
mod quadrature;
mod report;

pub use linear::{dense_solve, fd_jacobian, flatten, unflatten};
pub use moments::{adaptive_integrate, moment_quadrature};
pub use report::{
    dense_suite, flux_suite, jacobian_suite, moments_suite, run_suite, OracleReport, OracleRow, DEFAULT_SEED,
};
pub use quadrature::{cell_average, gauss_legendre, integrate_1d};

use crate::flux::{instantaneous_flux, InterfaceReconstruction};
use crate::Conserved;

/// Time-averaged flux by 64-point Gauss-Legendre in time of the
/// instantaneous moment flux.
pub fn time_quadrature_flux(ir: &InterfaceReconstruction, tau: f64, dt: f64) -> Conserved {
    gauss_legendre(64)
        .iter()
        .fold(Conserved::zeros(), |acc, &(x, w)| acc + instantaneous_flux(ir, tau, x * dt) * w)
}
