use nalgebra::{Matrix3, SMatrix, SVector};

use crate::mesh::Cell;
use crate::Vec3;

/// Number of non-constant monomials up to degree two.
pub const NQ: usize = 9;

/// Zero-mean monomials about a cell, in coordinates `X = (x - c) / h` with
/// `h = |cell|^(1/3)`. Order: `X, Y, Z, X^2, Y^2, Z^2, XY, XZ, YZ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pub center: Vec3,
    pub h: f64,
    /// `avg X X^T` over the cell.
    pub m2: Matrix3<f64>,
}

impl LocalBasis {
    pub fn for_cell(cell: &Cell) -> Self {
        Self {
            center: cell.centroid,
            h: cell.h,
            m2: cell.second_moment / (cell.h * cell.h),
        }
    }

    #[inline]
    pub fn local(&self, x: &Vec3) -> Vec3 {
        (x - self.center) / self.h
    }

    fn quad_terms(&self, s: &Matrix3<f64>) -> [f64; 6] {
        let m = &self.m2;
        [
            s[(0, 0)] - m[(0, 0)],
            s[(1, 1)] - m[(1, 1)],
            s[(2, 2)] - m[(2, 2)],
            s[(0, 1)] - m[(0, 1)],
            s[(0, 2)] - m[(0, 2)],
            s[(1, 2)] - m[(1, 2)],
        ]
    }

    pub fn values(&self, x: &Vec3) -> SVector<f64, NQ> {
        let p = self.local(x);
        let q = self.quad_terms(&(p * p.transpose()));
        SVector::<f64, NQ>::from_column_slice(&[p.x, p.y, p.z, q[0], q[1], q[2], q[3], q[4], q[5]])
    }

    /// `d p_d / d X_j` at `x`; row `j`, column `d`.
    pub fn grads(&self, x: &Vec3) -> SMatrix<f64, 3, NQ> {
        grad_rows(&self.local(x))
    }

    /// Average of each basis function over a cell with centroid `centroid`
    /// (already shifted) and central second moment `second_moment`.
    pub fn cell_average(&self, centroid: &Vec3, second_moment: &Matrix3<f64>) -> [f64; NQ] {
        let d = self.local(centroid);
        let s = second_moment / (self.h * self.h) + d * d.transpose();
        let q = self.quad_terms(&s);
        [d.x, d.y, d.z, q[0], q[1], q[2], q[3], q[4], q[5]]
    }

    /// Average of `d p_d / d X_j` over a cell with centroid `centroid`.
    pub fn cell_average_grads(&self, centroid: &Vec3) -> SMatrix<f64, 3, NQ> {
        grad_rows(&self.local(centroid))
    }
}

fn grad_rows(p: &Vec3) -> SMatrix<f64, 3, NQ> {
    let (x, y, z) = (p.x, p.y, p.z);
    #[rustfmt::skip]
    let g = SMatrix::<f64, 3, NQ>::from_row_slice(&[
        1.0, 0.0, 0.0, 2.0 * x, 0.0, 0.0, y, z, 0.0,
        0.0, 1.0, 0.0, 0.0, 2.0 * y, 0.0, x, 0.0, z,
        0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * z, 0.0, x, y,
    ]);
    g
}
