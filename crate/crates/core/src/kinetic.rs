//! Maxwellian moment engine.
//!
//! All moments are normalised by density: `<(...)>` denotes
//! `(1/rho) * integral of g * (...) dXi` over the full velocity space or over
//! one half space `u > 0` / `u < 0`. The collision invariants are
//! `psi = (1, u, v, w, (u^2 + v^2 + w^2 + xi^2) / 2)`.

use crate::{Conserved, Error, Result, Vec3};

/// Highest tabulated power of the normal velocity `u`.
pub const U_ORDER: usize = 7;
/// Highest tabulated power of each tangential velocity.
pub const VW_ORDER: usize = 6;
/// Highest tabulated power of `xi^2`.
pub const XI_ORDER: usize = 2;

/// Internal degrees of freedom `N = (5 - 3 gamma) / (gamma - 1)`.
#[inline]
pub fn internal_dof(gamma: f64) -> f64 {
    (5.0 - 3.0 * gamma) / (gamma - 1.0)
}

/// Density, velocity and inverse temperature `lambda = rho / (2 p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vel: Vec3,
    pub lambda: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, vel: Vec3, lambda: f64) -> Self {
        Self { rho, vel, lambda }
    }

    /// Builds a state from density, velocity and pressure.
    pub fn from_pressure(rho: f64, vel: Vec3, p: f64) -> Self {
        Self {
            rho,
            vel,
            lambda: rho / (2.0 * p),
        }
    }

    #[inline]
    pub fn pressure(&self) -> f64 {
        self.rho / (2.0 * self.lambda)
    }

    #[inline]
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma / (2.0 * self.lambda)).sqrt()
    }

    pub fn to_conserved(&self, gamma: f64) -> Conserved {
        let n = internal_dof(gamma);
        let ke = 0.5 * self.vel.norm_squared();
        let e = ke + (n + 3.0) / (4.0 * self.lambda);
        Conserved::new(
            self.rho,
            self.rho * self.vel.x,
            self.rho * self.vel.y,
            self.rho * self.vel.z,
            self.rho * e,
        )
    }

    pub fn is_valid(&self) -> bool {
        self.rho.is_finite()
            && self.rho > 0.0
            && self.lambda.is_finite()
            && self.lambda > 0.0
            && self.vel.iter().all(|c| c.is_finite())
    }
}

/// Converts conserved variables to `(rho, U, V, W, lambda)`.
pub fn conserved_to_primitive(q: &Conserved, gamma: f64) -> Result<PrimitiveState> {
    let rho = q[0];
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Unphysical(format!("density {rho}")));
    }
    let vel = Vec3::new(q[1] / rho, q[2] / rho, q[3] / rho);
    let internal = q[4] - 0.5 * rho * vel.norm_squared();
    if !(internal.is_finite() && internal > 0.0) {
        return Err(Error::Unphysical(format!("internal energy {internal}")));
    }
    let n = internal_dof(gamma);
    let lambda = (n + 3.0) * rho / (4.0 * internal);
    Ok(PrimitiveState { rho, vel, lambda })
}

#[inline]
pub fn pressure(q: &Conserved, gamma: f64) -> f64 {
    (gamma - 1.0) * (q[4] - 0.5 * (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) / q[0])
}

/// Restriction of the `u` integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Full,
    Positive,
    Negative,
}

/// Tabulated Maxwellian moments of one primitive state.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub u_full: [f64; U_ORDER + 1],
    pub u_pos: [f64; U_ORDER + 1],
    pub u_neg: [f64; U_ORDER + 1],
    pub v: [f64; VW_ORDER + 1],
    pub w: [f64; VW_ORDER + 1],
    /// `<xi^(2s)>` for `s = 0..=XI_ORDER`.
    pub xi: [f64; XI_ORDER + 1],
}

fn fill_recurrence<const K: usize>(m: &mut [f64; K], mean: f64, lambda: f64) {
    for p in 0..K - 2 {
        m[p + 2] = mean * m[p + 1] + (p as f64 + 1.0) / (2.0 * lambda) * m[p];
    }
}

/// Tabulates full, half and internal moments of the Maxwellian of `w`.
pub fn build_moments(w: &PrimitiveState, gamma: f64) -> Result<MomentTable> {
    if !w.is_valid() {
        return Err(Error::Unphysical(format!("{w:?}")));
    }
    let lam = w.lambda;
    let (u0, v0, w0) = (w.vel.x, w.vel.y, w.vel.z);

    let mut u_full = [0.0; U_ORDER + 1];
    u_full[0] = 1.0;
    u_full[1] = u0;
    fill_recurrence(&mut u_full, u0, lam);

    let s = lam.sqrt() * u0;
    let bump = 0.5 * (-lam * u0 * u0).exp() / (std::f64::consts::PI * lam).sqrt();
    let mut u_pos = [0.0; U_ORDER + 1];
    u_pos[0] = 0.5 * libm::erfc(-s);
    u_pos[1] = u0 * u_pos[0] + bump;
    fill_recurrence(&mut u_pos, u0, lam);
    let mut u_neg = [0.0; U_ORDER + 1];
    u_neg[0] = 0.5 * libm::erfc(s);
    u_neg[1] = u0 * u_neg[0] - bump;
    fill_recurrence(&mut u_neg, u0, lam);

    let mut v = [0.0; VW_ORDER + 1];
    v[0] = 1.0;
    v[1] = v0;
    fill_recurrence(&mut v, v0, lam);
    let mut ww = [0.0; VW_ORDER + 1];
    ww[0] = 1.0;
    ww[1] = w0;
    fill_recurrence(&mut ww, w0, lam);

    let n = internal_dof(gamma);
    let xi = [1.0, n / (2.0 * lam), n * (n + 2.0) / (4.0 * lam * lam)];

    let table = MomentTable {
        u_full,
        u_pos,
        u_neg,
        v,
        w: ww,
        xi,
    };
    let finite = table
        .u_full
        .iter()
        .chain(&table.u_pos)
        .chain(&table.u_neg)
        .chain(&table.v)
        .chain(&table.w)
        .all(|x| x.is_finite());
    if !finite {
        return Err(Error::Unphysical(format!("moment overflow for {w:?}")));
    }
    Ok(table)
}

impl MomentTable {
    #[inline]
    pub fn u(&self, half: Half) -> &[f64; U_ORDER + 1] {
        match half {
            Half::Full => &self.u_full,
            Half::Positive => &self.u_pos,
            Half::Negative => &self.u_neg,
        }
    }

    /// `<u^p v^q w^r xi^(2s)>`.
    #[inline]
    pub fn scalar(&self, half: Half, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.u(half)[p] * self.v[q] * self.w[r] * self.xi[s]
    }

    /// `<u^p v^q w^r xi^(2s) psi>`.
    #[inline]
    pub fn psi(&self, half: Half, p: usize, q: usize, r: usize, s: usize) -> [f64; 5] {
        let u = self.u(half);
        let (v, w, xi) = (&self.v, &self.w, &self.xi);
        let base = v[q] * w[r];
        let m = u[p] * base * xi[s];
        [
            m,
            u[p + 1] * base * xi[s],
            u[p] * v[q + 1] * w[r] * xi[s],
            u[p] * v[q] * w[r + 1] * xi[s],
            0.5 * ((u[p + 2] * base + u[p] * (v[q + 2] * w[r] + v[q] * w[r + 2])) * xi[s]
                + u[p] * base * xi[s + 1]),
        ]
    }

    /// `<a psi u^p v^q w^r>` for a micro-slope `a`.
    #[inline]
    pub fn slope_psi(&self, half: Half, a: &MicroSlope, p: usize, q: usize, r: usize) -> [f64; 5] {
        let c = &a.0;
        let t0 = self.psi(half, p, q, r, 0);
        let tu = self.psi(half, p + 1, q, r, 0);
        let tv = self.psi(half, p, q + 1, r, 0);
        let tw = self.psi(half, p, q, r + 1, 0);
        let tuu = self.psi(half, p + 2, q, r, 0);
        let tvv = self.psi(half, p, q + 2, r, 0);
        let tww = self.psi(half, p, q, r + 2, 0);
        let txi = self.psi(half, p, q, r, 1);
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = c[0] * t0[k]
                + c[1] * tu[k]
                + c[2] * tv[k]
                + c[3] * tw[k]
                + 0.5 * c[4] * (tuu[k] + tvv[k] + tww[k] + txi[k]);
        }
        out
    }

    /// `<(a1 u + a2 v + a3 w) psi u^p>`: the transport of the three spatial slopes.
    #[inline]
    pub fn transport_psi(&self, half: Half, slopes: &[MicroSlope; 3], p: usize) -> [f64; 5] {
        let x = self.slope_psi(half, &slopes[0], p + 1, 0, 0);
        let y = self.slope_psi(half, &slopes[1], p, 1, 0);
        let z = self.slope_psi(half, &slopes[2], p, 0, 1);
        [
            x[0] + y[0] + z[0],
            x[1] + y[1] + z[1],
            x[2] + y[2] + z[2],
            x[3] + y[3] + z[3],
            x[4] + y[4] + z[4],
        ]
    }
}

/// Expansion coefficients of a derivative of the Maxwellian in the `psi`
/// basis: `a = a1 + a2 u + a3 v + a4 w + a5 (u^2 + v^2 + w^2 + xi^2) / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MicroSlope(pub [f64; 5]);

/// Solves `<a psi> = d` where `d` is already divided by density.
pub fn solve_normalized(w: &PrimitiveState, d: &[f64; 5], gamma: f64) -> MicroSlope {
    let n = internal_dof(gamma);
    let lam = w.lambda;
    let (u, v, ww) = (w.vel.x, w.vel.y, w.vel.z);
    let q2 = u * u + v * v + ww * ww;
    let r1 = d[1] - u * d[0];
    let r2 = d[2] - v * d[0];
    let r3 = d[3] - ww * d[0];
    let r4 = 2.0 * d[4] - (q2 + (n + 3.0) / (2.0 * lam)) * d[0];
    let a5 = 4.0 * lam * lam / (n + 3.0) * (r4 - 2.0 * u * r1 - 2.0 * v * r2 - 2.0 * ww * r3);
    let a4 = 2.0 * lam * r3 - ww * a5;
    let a3 = 2.0 * lam * r2 - v * a5;
    let a2 = 2.0 * lam * r1 - u * a5;
    let a1 = d[0] - u * a2 - v * a3 - ww * a4 - 0.5 * a5 * (q2 + (n + 3.0) / (2.0 * lam));
    MicroSlope([a1, a2, a3, a4, a5])
}

/// Micro-slope whose moments reproduce the conserved-variable derivative `dq`.
pub fn solve_micro_slope(w: &PrimitiveState, dq: &Conserved, gamma: f64) -> MicroSlope {
    let inv = 1.0 / w.rho;
    let d = [dq[0] * inv, dq[1] * inv, dq[2] * inv, dq[3] * inv, dq[4] * inv];
    solve_normalized(w, &d, gamma)
}

/// Time slope `A` from the compatibility condition
/// `<(a1 u + a2 v + a3 w + A) psi> = 0`.
pub fn solve_time_slope(
    w: &PrimitiveState,
    table: &MomentTable,
    slopes: &[MicroSlope; 3],
    gamma: f64,
) -> MicroSlope {
    let t = table.transport_psi(Half::Full, slopes, 0);
    solve_normalized(w, &[-t[0], -t[1], -t[2], -t[3], -t[4]], gamma)
}
