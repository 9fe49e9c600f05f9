use nalgebra::DMatrix;

use super::lsq::{FitOp, Row, RowKind};
use super::{CellOps, LocalBasis};
use crate::mesh::{Mesh, StencilEntry};

/// Average-only fit with `n` unknowns over the stencil entries after the target.
pub(super) fn average_fit(mesh: &Mesh, basis: &LocalBasis, stencil: &[StencilEntry], n: usize, tol: f64) -> Option<FitOp> {
    let others = &stencil[1..];
    let mut a = DMatrix::zeros(others.len(), n);
    let mut rows = Vec::with_capacity(others.len());
    for (r, e) in others.iter().enumerate() {
        let cell = &mesh.cells[e.cell];
        let avg = basis.cell_average(&(cell.centroid + e.shift), &cell.second_moment);
        for d in 0..n {
            a[(r, d)] = avg[d];
        }
        rows.push(Row { cell: e.cell, kind: RowKind::Average, scale: 1.0 });
    }
    FitOp::new(a, rows, tol)
}

pub(super) fn cell_ops(mesh: &Mesh, basis: &LocalBasis, c: usize, tol: f64) -> CellOps {
    let st = &mesh.stencils[c];
    let big = average_fit(mesh, basis, &st.weno_big, 9, tol);
    let subs: Vec<FitOp> = st.weno_subs.iter().filter_map(|s| average_fit(mesh, basis, s, 3, tol)).collect();
    match big {
        Some(big) if subs.len() >= 2 => CellOps::Weno { big, subs },
        _ => match average_fit(mesh, basis, &st.weno_big, 3, tol) {
            Some(op) => CellOps::Linear(op),
            None => CellOps::Constant,
        },
    }
}
