use nalgebra::DMatrix;
use rayon::prelude::*;

use super::lsq::{FitOp, Row, RowKind};
use super::{CellOps, LocalBasis};
use crate::mesh::{Mesh, StencilEntry};
use crate::{Conserved, Gradient};

/// Hermite fit: averages of the other cells plus scaled gradients of every
/// cell, target included.
fn hermite_fit(mesh: &Mesh, basis: &LocalBasis, stencil: &[StencilEntry], n: usize, tol: f64) -> Option<FitOp> {
    let mut a_rows: Vec<[f64; 9]> = Vec::with_capacity(4 * stencil.len());
    let mut rows = Vec::with_capacity(4 * stencil.len());
    for (i, e) in stencil.iter().enumerate() {
        let cell = &mesh.cells[e.cell];
        let centroid = cell.centroid + e.shift;
        if i > 0 {
            a_rows.push(basis.cell_average(&centroid, &cell.second_moment));
            rows.push(Row { cell: e.cell, kind: RowKind::Average, scale: 1.0 });
        }
        let g = basis.cell_average_grads(&centroid) * (cell.h / basis.h);
        for j in 0..3 {
            a_rows.push(std::array::from_fn(|d| g[(j, d)]));
            rows.push(Row { cell: e.cell, kind: RowKind::Derivative(j), scale: cell.h });
        }
    }
    let a = DMatrix::from_fn(a_rows.len(), n, |r, d| a_rows[r][d]);
    FitOp::new(a, rows, tol)
}

pub(super) fn cell_ops(mesh: &Mesh, basis: &LocalBasis, c: usize, tol: f64) -> CellOps {
    let st = &mesh.stencils[c];
    let big = hermite_fit(mesh, basis, &st.hweno_big, 9, tol);
    let subs: Vec<FitOp> = st.hweno_subs.iter().filter_map(|s| hermite_fit(mesh, basis, s, 3, tol)).collect();
    match big {
        Some(big) if subs.len() >= 2 => CellOps::Weno { big, subs },
        _ => match hermite_fit(mesh, basis, &st.hweno_big, 3, tol) {
            Some(op) => CellOps::Linear(op),
            None => CellOps::Constant,
        },
    }
}

/// Cell-averaged gradients from face point values by the divergence theorem.
/// `face_values[f][g]` is the value at quadrature point `g` of face `f`.
pub fn gauss_gradients(mesh: &Mesh, face_values: &[Vec<Conserved>]) -> Vec<Gradient> {
    mesh.cells
        .par_iter()
        .enumerate()
        .map(|(ci, cell)| {
            let mut g = Gradient::zeros();
            for &f in &cell.faces {
                let face = &mesh.faces[f];
                let sign = mesh.orientation(f, ci);
                for (qp, v) in face.quad.iter().zip(&face_values[f]) {
                    g += qp.area * (sign * v.transpose());
                }
            }
            g / cell.volume
        })
        .collect()
}
