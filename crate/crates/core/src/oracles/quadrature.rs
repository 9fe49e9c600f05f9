use crate::mesh::{Cell, CellKind};
use crate::Vec3;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `integral of f over [a, b]` with `n` Gauss points.
pub fn integrate_1d(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    gauss_legendre(n).iter().map(|&(x, w)| w * f(a + (b - a) * x)).sum::<f64>() * (b - a)
}

/// Cell average of `f` by a collapsed (tet) or tensor (hex) Gauss product
/// rule with `n` points per direction.
pub fn cell_average(nodes: &[Vec3], cell: &Cell, n: usize, f: impl Fn(&Vec3) -> f64) -> f64 {
    let gl = gauss_legendre(n);
    let p: Vec<Vec3> = cell.nodes.iter().map(|&i| nodes[i]).collect();
    let (mut sum, mut vol) = (0.0, 0.0);
    match cell.kind {
        CellKind::Tetrahedron => {
            let (e1, e2, e3) = (p[1] - p[0], p[2] - p[0], p[3] - p[0]);
            let det = e1.dot(&e2.cross(&e3));
            for &(u, wu) in &gl {
                for &(v, wv) in &gl {
                    for &(w, ww) in &gl {
                        let a = u;
                        let b = (1.0 - u) * v;
                        let c = (1.0 - u) * (1.0 - v) * w;
                        let jac = det * (1.0 - u).powi(2) * (1.0 - v) * wu * wv * ww;
                        let x = p[0] + e1 * a + e2 * b + e3 * c;
                        sum += jac * f(&x);
                        vol += jac;
                    }
                }
            }
        }
        CellKind::Hexahedron => {
            let at = |r: f64, s: f64, t: f64| -> Vec3 {
                let sh = [
                    (1.0 - r) * (1.0 - s) * (1.0 - t),
                    r * (1.0 - s) * (1.0 - t),
                    r * s * (1.0 - t),
                    (1.0 - r) * s * (1.0 - t),
                    (1.0 - r) * (1.0 - s) * t,
                    r * (1.0 - s) * t,
                    r * s * t,
                    (1.0 - r) * s * t,
                ];
                (0..8).fold(Vec3::zeros(), |acc, a| acc + p[a] * sh[a])
            };
            for &(r, wr) in &gl {
                for &(s, ws) in &gl {
                    for &(t, wt) in &gl {
                        // the map is linear along each axis, so these differences are exact
                        let jr = at(r + 0.5, s, t) - at(r - 0.5, s, t);
                        let js = at(r, s + 0.5, t) - at(r, s - 0.5, t);
                        let jt = at(r, s, t + 0.5) - at(r, s, t - 0.5);
                        let jac = jr.dot(&js.cross(&jt)) * wr * ws * wt;
                        sum += jac * f(&at(r, s, t));
                        vol += jac;
                    }
                }
            }
        }
    }
    sum / vol
}
