use nalgebra::{DMatrix, SymmetricEigen};

use super::{Coeffs, NQ};
use crate::{Conserved, Gradient};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `Q_k - Q_0`.
    Average,
    /// `h_k * dQ_k / dx_j`.
    Derivative(usize),
}

/// One least-squares equation and the data feeding its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub cell: usize,
    pub kind: RowKind,
    pub scale: f64,
}

impl Row {
    fn rhs(&self, target: usize, q: &[Conserved], grads: Option<&[Gradient]>) -> Conserved {
        match self.kind {
            RowKind::Average => q[self.cell] - q[target],
            RowKind::Derivative(j) => {
                let g = grads.expect("derivative rows need gradients");
                g[self.cell].row(j).transpose() * self.scale
            }
        }
    }
}

/// Pseudo-inverse of one overdetermined system, fixed by geometry.
#[derive(Debug, Clone)]
pub struct FitOp {
    /// Unknowns: 3 (linear) or 9 (quadratic).
    pub n: usize,
    pub rows: Vec<Row>,
    /// `n x rows` pseudo-inverse.
    pub pinv: DMatrix<f64>,
}

impl FitOp {
    /// Builds the operator from the design matrix `a` (`rows x n`); `None`
    /// when the normal equations are numerically rank deficient.
    pub fn new(a: DMatrix<f64>, rows: Vec<Row>, rank_tol: f64) -> Option<FitOp> {
        let n = a.ncols();
        debug_assert_eq!(a.nrows(), rows.len());
        if a.nrows() < n {
            return None;
        }
        let ata = a.transpose() * &a;
        let eig = SymmetricEigen::new(ata.clone());
        let max = eig.eigenvalues.amax();
        if !(max > 0.0) || eig.eigenvalues.min() <= rank_tol * max {
            return None;
        }
        let inv = ata.cholesky()?.inverse();
        Some(FitOp { n, rows, pinv: inv * a.transpose() })
    }

    /// Coefficients of the fit around `target`; quadratic slots stay zero for
    /// linear fits.
    pub fn solve(&self, target: usize, q: &[Conserved], grads: Option<&[Gradient]>) -> Coeffs {
        let mut out = Coeffs::zeros();
        for (r, row) in self.rows.iter().enumerate() {
            let b = row.rhs(target, q, grads);
            for d in 0..self.n {
                let p = self.pinv[(d, r)];
                for v in 0..5 {
                    out[(d, v)] += p * b[v];
                }
            }
        }
        debug_assert!(self.n <= NQ);
        out
    }
}
