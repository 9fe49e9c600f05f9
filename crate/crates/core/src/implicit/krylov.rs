use rayon::prelude::*;

use super::jacobian::BlockJacobian;
use crate::{Block5, Conserved, Error, Result};

const CHUNK: usize = 512;

/// Dot product with a fixed reduction order.
pub fn dot(a: &[Conserved], b: &[Conserved]) -> f64 {
    let partial: Vec<f64> =
        a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.dot(q)).sum()).collect();
    partial.iter().sum()
}

pub fn norm(a: &[Conserved]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [Conserved], alpha: f64, x: &[Conserved]) {
    y.par_iter_mut().zip(x).for_each(|(y, x)| *y += x * alpha);
}

fn scaled(x: &[Conserved], alpha: f64) -> Vec<Conserved> {
    x.par_iter().map(|v| v * alpha).collect()
}

/// Block-Jacobi iterations `z_k = D^-1 (b - (L + U) z_{k-1})` seeded with
/// `z_0 = D^-1 b`.
pub struct Jacobi<'a> {
    a: &'a BlockJacobian,
    dinv: Vec<Block5>,
    iters: usize,
}

impl<'a> Jacobi<'a> {
    pub fn new(a: &'a BlockJacobian, iters: usize) -> Result<Self> {
        Ok(Jacobi { a, dinv: a.diag_inverses()?, iters })
    }

    pub fn apply(&self, b: &[Conserved]) -> Vec<Conserved> {
        let mut z: Vec<Conserved> = self.dinv.par_iter().zip(b).map(|(d, b)| d * b).collect();
        for _ in 0..self.iters {
            z = self
                .a
                .rows
                .par_iter()
                .enumerate()
                .map(|(i, row)| {
                    let r = row.off.iter().fold(b[i], |acc, (j, m)| acc - m * z[*j]);
                    self.dinv[i] * r
                })
                .collect();
        }
        z
    }
}

pub fn jacobi_precondition(a: &BlockJacobian, b: &[Conserved], k_max: usize) -> Result<Vec<Conserved>> {
    Ok(Jacobi::new(a, k_max)?.apply(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub krylov_dim: usize,
    pub restarts: usize,
    pub jacobi_iters: usize,
    /// Stop once the preconditioned residual falls below this fraction of
    /// its initial value.
    pub rtol: f64,
    /// Measure basis orthogonality each cycle.
    pub check_orthogonality: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { krylov_dim: 10, restarts: 3, jacobi_iters: 2, rtol: 1e-12, check_orthogonality: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresReport {
    pub x: Vec<Conserved>,
    /// Preconditioned residual norms per cycle, starting with the cycle's
    /// initial residual.
    pub cycles: Vec<Vec<f64>>,
    /// Largest `|<v_i, v_j>|`, `i != j`, over all cycles (zero if unchecked).
    pub orthogonality: f64,
    pub iterations: usize,
}

impl GmresReport {
    pub fn final_residual(&self) -> f64 {
        self.cycles.last().and_then(|c| c.last()).copied().unwrap_or(0.0)
    }
}

/// Left-preconditioned restarted GMRES from a zero initial guess, with
/// modified Gram-Schmidt Arnoldi and Givens rotations.
pub fn gmres<A, P>(apply_a: A, precond: P, b: &[Conserved], opts: &GmresOptions) -> Result<GmresReport>
where
    A: Fn(&[Conserved]) -> Vec<Conserved>,
    P: Fn(&[Conserved]) -> Vec<Conserved>,
{
    let n = b.len();
    let m = opts.krylov_dim.max(1);
    let mut x = vec![Conserved::zeros(); n];
    let mut report = GmresReport { x: Vec::new(), cycles: Vec::new(), orthogonality: 0.0, iterations: 0 };
    let mut beta0 = None;
    for _ in 0..opts.restarts.max(1) {
        let r = if report.iterations == 0 {
            precond(b)
        } else {
            let ax = apply_a(&x);
            let res: Vec<Conserved> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            precond(&res)
        };
        let beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::Divergence("non-finite residual in GMRES".into()));
        }
        let beta0 = *beta0.get_or_insert(beta);
        let mut hist = vec![beta];
        if beta == 0.0 || beta <= opts.rtol * beta0 && report.iterations > 0 {
            report.cycles.push(hist);
            break;
        }
        let mut v: Vec<Vec<Conserved>> = vec![scaled(&r, 1.0 / beta)];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        for j in 0..m {
            let mut w = precond(&apply_a(&v[j]));
            let wnorm0 = norm(&w);
            // modified Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[i][j] += c;
                    axpy(&mut w, -c, vi);
                }
            }
            let hn = norm(&w);
            if !hn.is_finite() {
                return Err(Error::Divergence("non-finite Krylov basis vector".into()));
            }
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k = j + 1;
            report.iterations += 1;
            hist.push(g[j + 1].abs());
            let happy = hn <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE);
            if happy || g[j + 1].abs() <= opts.rtol * beta0 {
                break;
            }
            v.push(scaled(&w, 1.0 / hn));
        }
        if opts.check_orthogonality {
            for i in 0..v.len() {
                for l in 0..i {
                    report.orthogonality = report.orthogonality.max(dot(&v[i], &v[l]).abs());
                }
            }
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            axpy(&mut x, *yi, &v[i]);
        }
        let done = hist.last().is_some_and(|&r| r <= opts.rtol * beta0);
        report.cycles.push(hist);
        if done {
            break;
        }
    }
    if x.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return Err(Error::Divergence("non-finite GMRES solution".into()));
    }
    report.x = x;
    Ok(report)
}

/// GMRES on the block matrix with the Jacobi preconditioner.
pub fn gmres_solve(a: &BlockJacobian, b: &[Conserved], opts: &GmresOptions) -> Result<GmresReport> {
    let p = Jacobi::new(a, opts.jacobi_iters)?;
    gmres(|x| a.spmv(x), |x| p.apply(x), b, opts)
}

/// One forward and one backward block Gauss-Seidel sweep in cell order.
pub fn lusgs_sweep(a: &BlockJacobian, r: &[Conserved]) -> Result<Vec<Conserved>> {
    let dinv = a.diag_inverses()?;
    let n = a.num_cells();
    let mut x = vec![Conserved::zeros(); n];
    for i in 0..n {
        let s = a.rows[i].off.iter().filter(|(j, _)| *j < i).fold(r[i], |acc, (j, b)| acc - b * x[*j]);
        x[i] = dinv[i] * s;
    }
    for i in (0..n).rev() {
        let s = a.rows[i].off.iter().filter(|(j, _)| *j > i).fold(Conserved::zeros(), |acc, (j, b)| acc + b * x[*j]);
        x[i] -= dinv[i] * s;
    }
    Ok(x)
}
