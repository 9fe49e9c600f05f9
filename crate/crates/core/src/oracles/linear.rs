use nalgebra::{DMatrix, DVector};

use crate::{Block5, Conserved, Error, Result};

/// Central-difference Jacobian with step `h (1 + |Q_k|)` in component `k`.
pub fn fd_jacobian(f: impl Fn(&Conserved) -> Conserved, q: &Conserved, h: f64) -> Block5 {
    let mut j = Block5::zeros();
    for k in 0..5 {
        let dk = h * (1.0 + q[k].abs());
        let mut qp = *q;
        let mut qm = *q;
        qp[k] += dk;
        qm[k] -= dk;
        j.set_column(k, &((f(&qp) - f(&qm)) / (2.0 * dk)));
    }
    j
}

/// Direct LU solve, refusing singular systems and checking the residual.
pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::Config("dense solve: dimension mismatch".into()));
    }
    let scale = a.amax();
    let lu = a.clone().lu();
    let u = lu.u();
    let pivot = u.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if !(pivot > 1e-14 * scale) {
        return Err(Error::Singular(format!("dense solve: pivot {pivot:e}")));
    }
    let x = lu.solve(b).ok_or_else(|| Error::Singular("dense solve".into()))?;
    let r = (a * &x - b).amax();
    let tol = 1e-12 * (scale * x.amax()).max(b.amax()).max(f64::MIN_POSITIVE);
    if !(r <= tol * 1e2) {
        return Err(Error::Singular(format!("dense solve residual {r:e}")));
    }
    Ok(x)
}

/// Flattens per-cell 5-vectors into one dense vector.
pub fn flatten(v: &[Conserved]) -> DVector<f64> {
    DVector::from_iterator(5 * v.len(), v.iter().flat_map(|x| x.iter().copied()))
}

pub fn unflatten(v: &DVector<f64>) -> Vec<Conserved> {
    v.as_slice().chunks(5).map(Conserved::from_column_slice).collect()
}
