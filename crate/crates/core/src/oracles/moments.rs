use crate::kinetic::{internal_dof, Half, PrimitiveState};
use crate::{Error, Result};

use super::quadrature::gauss_legendre;

const GL_POINTS: usize = 20;

/// Adaptive Gauss-Legendre: bisects until one panel and its two halves agree.
pub fn adaptive_integrate(a: f64, b: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let gl = gauss_legendre(GL_POINTS);
    let panel = |lo: f64, hi: f64| gl.iter().map(|&(x, w)| w * f(lo + (hi - lo) * x)).sum::<f64>() * (hi - lo);
    let mut stack = vec![(a, b, panel(a, b), 0u32)];
    let mut total = 0.0;
    let scale = gl.iter().map(|&(x, w)| w * f(a + (b - a) * x).abs()).sum::<f64>() * (b - a);
    let scale = scale.max(f64::MIN_POSITIVE);
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (l, r) = (panel(lo, mid), panel(mid, hi));
        if (l + r - whole).abs() <= tol * scale {
            total += l + r;
        } else if depth > 40 {
            return Err(Error::Divergence(format!("adaptive quadrature did not converge on [{lo}, {hi}]")));
        } else {
            stack.push((lo, mid, l, depth + 1));
            stack.push((mid, hi, r, depth + 1));
        }
    }
    Ok(total)
}

/// One-dimensional normalized Maxwellian moment `<c^p>` of mean `m`.
fn moment_1d(m: f64, lambda: f64, p: usize, half: Half, tol: f64) -> Result<f64> {
    let norm = (lambda / std::f64::consts::PI).sqrt();
    let f = move |c: f64| norm * c.powi(p as i32) * (-lambda * (c - m) * (c - m)).exp();
    let width = 14.0 / lambda.sqrt();
    let (lo, hi) = (m - width, m + width);
    match half {
        Half::Full => {
            // integrate on each side of zero so odd powers are resolved
            let mut s = 0.0;
            if lo < 0.0 {
                s += adaptive_integrate(lo, hi.min(0.0), tol, &f)?;
            }
            if hi > 0.0 {
                s += adaptive_integrate(lo.max(0.0), hi, tol, &f)?;
            }
            Ok(s)
        }
        Half::Positive => if hi > 0.0 { adaptive_integrate(lo.max(0.0), hi, tol, &f) } else { Ok(0.0) },
        Half::Negative => if lo < 0.0 { adaptive_integrate(lo, hi.min(0.0), tol, &f) } else { Ok(0.0) },
    }
}

/// `<xi^(2s)>` over the `N` internal degrees of freedom, integrated radially.
fn moment_xi(lambda: f64, s: usize, gamma: f64, tol: f64) -> Result<f64> {
    let n = internal_dof(gamma);
    if s == 0 {
        return Ok(1.0);
    }
    if n <= 0.0 {
        return Ok(0.0);
    }
    let pi = std::f64::consts::PI;
    let surface = 2.0 * pi.powf(0.5 * n) / libm::tgamma(0.5 * n);
    let norm = (lambda / pi).powf(0.5 * n) * surface;
    let f = move |r: f64| norm * r.powf(2.0 * s as f64 + n - 1.0) * (-lambda * r * r).exp();
    adaptive_integrate(0.0, 14.0 / lambda.sqrt(), tol, &f)
}

/// Brute-force `<u^p v^q w^r xi^(2s)>` of the Maxwellian of `w`.
pub fn moment_quadrature(
    w: &PrimitiveState,
    p: usize,
    q: usize,
    r: usize,
    s: usize,
    half: Half,
    gamma: f64,
) -> Result<f64> {
    let tol = 1e-13;
    Ok(moment_1d(w.vel.x, w.lambda, p, half, tol)?
        * moment_1d(w.vel.y, w.lambda, q, Half::Full, tol)?
        * moment_1d(w.vel.z, w.lambda, r, Half::Full, tol)?
        * moment_xi(w.lambda, s, gamma, tol)?)
}
