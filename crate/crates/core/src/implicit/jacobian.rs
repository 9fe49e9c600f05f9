use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::kinetic::{conserved_to_primitive, pressure};
use crate::mesh::{Mesh, Neighbor};
use crate::{Block5, Conserved, Error, Result, Vec3};

/// Analytic Jacobian of the inviscid flux through a face of unit normal `n`.
pub fn euler_jacobian(q: &Conserved, n: &Vec3, gamma: f64) -> Block5 {
    let rho = q[0];
    let u = Vec3::new(q[1], q[2], q[3]) / rho;
    let un = u.dot(n);
    let gm = gamma - 1.0;
    let phi = 0.5 * gm * u.norm_squared();
    let h = (q[4] + pressure(q, gamma)) / rho;
    let mut j = Block5::zeros();
    for k in 0..3 {
        j[(0, k + 1)] = n[k];
    }
    for m in 0..3 {
        j[(m + 1, 0)] = -u[m] * un + n[m] * phi;
        for k in 0..3 {
            let delta = if m == k { un } else { 0.0 };
            j[(m + 1, k + 1)] = delta + u[m] * n[k] - gm * n[m] * u[k];
        }
        j[(m + 1, 4)] = gm * n[m];
    }
    j[(4, 0)] = un * (phi - h);
    for k in 0..3 {
        j[(4, k + 1)] = h * n[k] - gm * u[k] * un;
    }
    j[(4, 4)] = gamma * un;
    j
}

/// `|u.n| + a` of the arithmetic average of two states.
pub fn interface_spectral_radius(a: &Conserved, b: &Conserved, n: &Vec3, gamma: f64) -> Result<f64> {
    let w = conserved_to_primitive(&((a + b) * 0.5), gamma)?;
    Ok(w.vel.dot(n).abs() + w.sound_speed(gamma))
}

/// Per-cell time step `CFL |Omega| / sum_f (|u.n| + a + nu / d) S`, the
/// viscous term entering only when `mu` is given.
pub fn local_time_steps(mesh: &Mesh, q: &[Conserved], cfl: f64, gamma: f64, mu: Option<f64>) -> Result<Vec<f64>> {
    mesh.cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let w = conserved_to_primitive(&q[i], gamma)?;
            let a = w.sound_speed(gamma);
            let mut sum = 0.0;
            for &f in &cell.faces {
                let face = &mesh.faces[f];
                let mut rate = w.vel.dot(&face.normal).abs() + a;
                if let Some(mu) = mu {
                    rate += mu / w.rho * face.area / cell.volume;
                }
                sum += rate * face.area;
            }
            Ok(cfl * cell.volume / sum)
        })
        .collect()
}

/// Flux integration window of a face: the smaller adjacent time step.
pub fn face_window(mesh: &Mesh, f: usize, dts: &[f64]) -> f64 {
    let face = &mesh.faces[f];
    match face.neighbor {
        Neighbor::Cell { id, .. } => dts[face.owner].min(dts[id]),
        Neighbor::Boundary { .. } => dts[face.owner],
    }
}

/// One block row: the diagonal and one block per distinct face neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub diag: Block5,
    pub off: Vec<(usize, Block5)>,
}

/// Block-sparse matrix with one row per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobian {
    pub rows: Vec<BlockRow>,
}

impl BlockJacobian {
    pub fn num_cells(&self) -> usize {
        self.rows.len()
    }

    pub fn spmv(&self, x: &[Conserved]) -> Vec<Conserved> {
        self.rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| row.off.iter().fold(row.diag * x[i], |acc, (j, b)| acc + b * x[*j]))
            .collect()
    }

    pub fn diag_inverses(&self) -> Result<Vec<Block5>> {
        self.rows
            .par_iter()
            .enumerate()
            .map(|(i, r)| r.diag.try_inverse().ok_or_else(|| Error::Singular(format!("diagonal block of cell {i}"))))
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = 5 * self.rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            m.view_mut((5 * i, 5 * i), (5, 5)).copy_from(&row.diag);
            for (j, b) in &row.off {
                let mut v = m.view_mut((5 * i, 5 * j), (5, 5));
                v += b;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>, pattern: &[Vec<usize>]) -> Self {
        let block = |i: usize, j: usize| Block5::from_fn(|r, c| m[(5 * i + r, 5 * j + c)]);
        BlockJacobian {
            rows: pattern
                .iter()
                .enumerate()
                .map(|(i, nb)| BlockRow { diag: block(i, i), off: nb.iter().map(|&j| (j, block(i, j))).collect() })
                .collect(),
        }
    }
}

/// Roe-split implicit operator. Boundary faces add only to the diagonal with
/// the ghost state frozen; `ghost(f, q)` returns that state for the owner
/// value `q`.
pub fn assemble_jacobian<G>(mesh: &Mesh, q: &[Conserved], dts: &[f64], gamma: f64, ghost: G) -> Result<BlockJacobian>
where
    G: Fn(usize, &Conserved) -> Result<Conserved> + Sync,
{
    let rows = mesh
        .cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut diag = Block5::identity() * (cell.volume / dts[i]);
            let mut off: Vec<(usize, Block5)> = Vec::with_capacity(cell.faces.len());
            for &f in &cell.faces {
                let face = &mesh.faces[f];
                let n = face.normal * mesh.orientation(f, i);
                let s = face.area;
                match mesh.across(f, i) {
                    Some(nb) => {
                        let j = nb.cell;
                        let lam = interface_spectral_radius(&q[i], &q[j], &n, gamma)?;
                        diag += (euler_jacobian(&q[i], &n, gamma) + Block5::identity() * lam) * (0.5 * s);
                        let b = (euler_jacobian(&q[j], &n, gamma) - Block5::identity() * lam) * (0.5 * s);
                        if j == i {
                            diag += b;
                        } else if let Some(e) = off.iter_mut().find(|e| e.0 == j) {
                            e.1 += b;
                        } else {
                            off.push((j, b));
                        }
                    }
                    None => {
                        let g = ghost(f, &q[i])?;
                        let lam = interface_spectral_radius(&q[i], &g, &n, gamma)?;
                        diag += (euler_jacobian(&q[i], &n, gamma) + Block5::identity() * lam) * (0.5 * s);
                    }
                }
            }
            off.sort_by_key(|e| e.0);
            Ok(BlockRow { diag, off })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockJacobian { rows })
}

/// Face contribution of the linearised Roe-split flux for an increment,
/// oriented out of `i`: `1/2 (J_i + |l|) dq_i + 1/2 (J_j - |l|) dq_j`, times area.
pub fn linearized_face_flux(
    qi: &Conserved,
    qj: &Conserved,
    dqi: &Conserved,
    dqj: &Conserved,
    n: &Vec3,
    area: f64,
    gamma: f64,
) -> Result<Conserved> {
    let lam = interface_spectral_radius(qi, qj, n, gamma)?;
    let a = euler_jacobian(qi, n, gamma) * dqi + dqi * lam;
    let b = euler_jacobian(qj, n, gamma) * dqj - dqj * lam;
    Ok((a + b) * (0.5 * area))
}
