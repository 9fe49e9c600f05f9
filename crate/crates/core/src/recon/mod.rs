//! Third-order reconstruction of the conserved variables.
//!
//! Every cell gets a quadratic candidate and several linear candidates built
//! by least squares on zero-mean monomials about the cell. Candidates are
//! blended per conserved component with WENO-Z type weights. Because the
//! weights do not depend on the evaluation point, the blend is again a
//! quadratic, stored as a [`CellPoly`].
//!
//! Two stencil families are supported: the non-compact [`Scheme::Weno`] using
//! two neighbor levels, and the compact [`Scheme::Hweno`] using one neighbor
//! level plus cell-averaged gradients.

mod basis;
mod hweno;
mod lsq;
mod weno;

use nalgebra::{Matrix3, SMatrix};
use rayon::prelude::*;

pub use basis::{LocalBasis, NQ};
pub use hweno::gauss_gradients;
pub use lsq::{FitOp, Row, RowKind};

use crate::mesh::Mesh;
use crate::{Conserved, Error, Gradient, Result, Vec3};

/// Polynomial coefficients, one column per conserved component.
pub type Coeffs = SMatrix<f64, NQ, 5>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Weno,
    Hweno,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weno" => Ok(Scheme::Weno),
            "hweno" => Ok(Scheme::Hweno),
            other => Err(Error::Config(format!("unknown reconstruction scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconConfig {
    pub scheme: Scheme,
    /// Linear weight of each low-order candidate.
    pub linear_weight: f64,
    pub epsilon: f64,
    /// Relative eigenvalue threshold of the normal equations.
    pub rank_tol: f64,
    /// When false the linear weights are used as they are.
    pub nonlinear: bool,
}

impl ReconConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            linear_weight: 0.025,
            epsilon: 1e-6,
            rank_tol: 1e-10,
            nonlinear: true,
        }
    }
}

/// Precomputed fits of one cell.
#[derive(Debug, Clone)]
pub enum CellOps {
    /// Quadratic candidate and at least two linear candidates.
    Weno { big: FitOp, subs: Vec<FitOp> },
    /// Plain linear least squares on the big stencil.
    Linear(FitOp),
    /// No usable neighbors.
    Constant,
}

/// Reconstructed polynomial of one cell, in the local coordinates of its
/// [`LocalBasis`].
#[derive(Debug, Clone)]
pub struct CellPoly {
    pub mean: Conserved,
    pub coeffs: Coeffs,
    pub basis: LocalBasis,
}

impl CellPoly {
    pub fn constant(mean: Conserved, basis: LocalBasis) -> Self {
        Self { mean, coeffs: Coeffs::zeros(), basis }
    }

    pub fn value(&self, x: &Vec3) -> Conserved {
        let p = self.basis.values(x);
        self.mean + self.coeffs.transpose() * p
    }

    /// Cartesian gradient at `x`.
    pub fn gradient(&self, x: &Vec3) -> Gradient {
        self.basis.grads(x) * self.coeffs / self.basis.h
    }

    pub fn eval(&self, x: &Vec3) -> (Conserved, Gradient) {
        (self.value(x), self.gradient(x))
    }
}

/// Smoothness indicator of coefficient column `a` (local coordinates), for a
/// cell whose `avg X X^T` is `m2`.
pub fn smoothness_indicator(a: &[f64; NQ], m2: &Matrix3<f64>, quadratic: bool) -> f64 {
    if !quadratic {
        return a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    }
    let h = Matrix3::new(
        2.0 * a[3], a[6], a[7],
        a[6], 2.0 * a[4], a[8],
        a[7], a[8], 2.0 * a[5],
    );
    let mut beta = 0.0;
    for j in 0..3 {
        let row = h.row(j).transpose();
        beta += a[j] * a[j] + (row.transpose() * m2 * row)[0];
    }
    // six distinct second derivatives
    beta + h[(0, 0)].powi(2) + h[(1, 1)].powi(2) + h[(2, 2)].powi(2) + a[6] * a[6] + a[7] * a[7] + a[8] * a[8]
}

/// Normalized nonlinear weights `[w_0, w_1, .., w_M]`.
pub fn nonlinear_weights(betas: &[f64], gammas: &[f64], epsilon: f64) -> Vec<f64> {
    let m = betas.len() - 1;
    let tau = betas[1..].iter().map(|b| (betas[0] - b).abs()).sum::<f64>() / m as f64;
    let w: Vec<f64> = betas.iter().zip(gammas).map(|(b, g)| g * (1.0 + tau / (b + epsilon))).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Linear weights `[gamma_0, gamma, .., gamma]` for `m` candidates.
pub fn linear_weights(m: usize, gamma: f64) -> Vec<f64> {
    let mut g = vec![gamma; m + 1];
    g[0] = 1.0 - gamma * m as f64;
    g
}

/// Blends one component: `(w_0 / g_0) a + sum_m (w_m - w_0 g_m / g_0) b_m`.
pub fn combine(big: &[f64; NQ], subs: &[[f64; NQ]], weights: &[f64], gammas: &[f64]) -> [f64; NQ] {
    let mut out = big.map(|a| a * weights[0] / gammas[0]);
    for (m, b) in subs.iter().enumerate() {
        let c = weights[m + 1] - weights[0] * gammas[m + 1] / gammas[0];
        for d in 0..NQ {
            out[d] += c * b[d];
        }
    }
    out
}

/// Per-mesh reconstruction operator.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    pub config: ReconConfig,
    pub bases: Vec<LocalBasis>,
    pub ops: Vec<CellOps>,
}

impl Reconstructor {
    pub fn new(mesh: &Mesh, config: ReconConfig) -> Self {
        let bases: Vec<LocalBasis> = mesh.cells.iter().map(LocalBasis::for_cell).collect();
        let ops = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| match config.scheme {
                Scheme::Weno => weno::cell_ops(mesh, &bases[c], c, config.rank_tol),
                Scheme::Hweno => hweno::cell_ops(mesh, &bases[c], c, config.rank_tol),
            })
            .collect();
        Self { config, bases, ops }
    }

    pub fn needs_gradients(&self) -> bool {
        self.config.scheme == Scheme::Hweno
    }

    /// Number of cells that fell back to a linear or constant fit.
    pub fn fallback_count(&self) -> usize {
        self.ops.iter().filter(|o| !matches!(o, CellOps::Weno { .. })).count()
    }

    /// Reconstructs every cell. `grads` is required by the compact scheme.
    pub fn reconstruct(&self, q: &[Conserved], grads: Option<&[Gradient]>) -> Result<Vec<CellPoly>> {
        if self.needs_gradients() && grads.is_none() {
            return Err(Error::Config("compact reconstruction needs cell gradients".into()));
        }
        Ok((0..q.len()).into_par_iter().map(|c| self.reconstruct_cell(c, q, grads)).collect())
    }

    pub fn reconstruct_cell(&self, c: usize, q: &[Conserved], grads: Option<&[Gradient]>) -> CellPoly {
        let basis = self.bases[c].clone();
        let coeffs = match &self.ops[c] {
            CellOps::Constant => Coeffs::zeros(),
            CellOps::Linear(op) => op.solve(c, q, grads),
            CellOps::Weno { big, subs } => {
                let a = big.solve(c, q, grads);
                let b: Vec<Coeffs> = subs.iter().map(|s| s.solve(c, q, grads)).collect();
                if self.config.nonlinear {
                    self.blend(&a, &b, &basis.m2)
                } else {
                    a
                }
            }
        };
        CellPoly { mean: q[c], coeffs, basis }
    }

    fn blend(&self, a: &Coeffs, b: &[Coeffs], m2: &Matrix3<f64>) -> Coeffs {
        let gammas = linear_weights(b.len(), self.config.linear_weight);
        let mut out = Coeffs::zeros();
        let mut betas = vec![0.0; b.len() + 1];
        let mut subs = vec![[0.0; NQ]; b.len()];
        for v in 0..5 {
            let col = |m: &Coeffs| -> [f64; NQ] { std::array::from_fn(|d| m[(d, v)]) };
            let av = col(a);
            betas[0] = smoothness_indicator(&av, m2, true);
            for (m, bm) in b.iter().enumerate() {
                subs[m] = col(bm);
                betas[m + 1] = smoothness_indicator(&subs[m], m2, false);
            }
            let w = nonlinear_weights(&betas, &gammas, self.config.epsilon);
            let c = combine(&av, &subs, &w, &gammas);
            for d in 0..NQ {
                out[(d, v)] = c[d];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests;
