//! Implicit high-order gas-kinetic finite-volume solver for 3D compressible
//! flow on unstructured tetrahedral and hexahedral meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: geometry, connectivity, face quadrature and stencils.
//! * [`kinetic`]: Maxwellian moments and micro-slope solves.
//! * [`recon`]: non-compact WENO and compact HWENO reconstruction.
//! * [`flux`]: the gas-kinetic interface solver and the KFVS limit.
//! * [`boundary`]: ghost states for boundary patches.
//! * [`implicit`]: Roe-split block Jacobian with GMRES and LU-SGS solvers.
//! * [`driver`]: case configuration, the steady-state loop and file output.
//! * [`oracles`]: brute-force references used by tests and the `oracle` command.

pub mod boundary;
pub mod driver;
pub mod error;
pub mod flux;
pub mod implicit;
pub mod kinetic;
pub mod mesh;
pub mod oracles;
pub mod recon;

pub use error::{Error, Result};

/// Five conserved variables `(rho, rho U, rho V, rho W, rho E)`.
pub type Conserved = nalgebra::Vector5<f64>;
/// Dense 5x5 block.
pub type Block5 = nalgebra::Matrix5<f64>;
/// Position or direction in 3D.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Cell-averaged Cartesian gradient of the conserved variables; row `j` holds
/// the derivative along axis `j`.
pub type Gradient = nalgebra::SMatrix<f64, 3, 5>;

/// Specific heat ratio used throughout unless configured otherwise.
pub const DEFAULT_GAMMA: f64 = 1.4;
