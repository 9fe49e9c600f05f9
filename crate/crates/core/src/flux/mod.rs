//! Gas-kinetic interface solver.
//!
//! At each face quadrature point the left and right reconstructed states are
//! rotated into the face frame, where the second-order BGK solution is
//! integrated analytically in time. All quantities in this module other than
//! [`solve_point`] are in the face-local frame.

use crate::kinetic::{
    build_moments, conserved_to_primitive, solve_micro_slope, solve_time_slope, Half, MicroSlope, MomentTable,
    PrimitiveState,
};
use crate::mesh::Frame;
use crate::{Conserved, Error, Gradient, Result};

/// Rotates the momentum components into the frame.
#[inline]
pub fn rotate_to_local(q: &Conserved, frame: &Frame) -> Conserved {
    let m = crate::Vec3::new(q[1], q[2], q[3]);
    let l = frame.to_local(&m);
    Conserved::new(q[0], l.x, l.y, l.z, q[4])
}

#[inline]
pub fn rotate_to_global(q: &Conserved, frame: &Frame) -> Conserved {
    let l = crate::Vec3::new(q[1], q[2], q[3]);
    let m = frame.to_global(&l);
    Conserved::new(q[0], m.x, m.y, m.z, q[4])
}

/// Derivatives along the three frame axes, rotated into the frame.
pub fn local_derivatives(grad: &Gradient, frame: &Frame) -> [Conserved; 3] {
    [frame.nx, frame.ny, frame.nz].map(|n| rotate_to_local(&(grad.transpose() * n), frame))
}

/// One side of the interface (or the equilibrium state) with its Maxwellian
/// moments, spatial micro-slopes and time slope.
#[derive(Debug, Clone)]
pub struct SideState {
    pub w: PrimitiveState,
    pub table: MomentTable,
    pub slopes: [MicroSlope; 3],
    pub time_slope: MicroSlope,
}

impl SideState {
    pub fn new(q: &Conserved, dq: &[Conserved; 3], gamma: f64) -> Result<Self> {
        let w = conserved_to_primitive(q, gamma)?;
        Self::from_primitive(w, dq, gamma)
    }

    pub fn from_primitive(w: PrimitiveState, dq: &[Conserved; 3], gamma: f64) -> Result<Self> {
        let table = build_moments(&w, gamma)?;
        let slopes = dq.map(|d| solve_micro_slope(&w, &d, gamma));
        let time_slope = solve_time_slope(&w, &table, &slopes, gamma);
        Ok(Self { w, table, slopes, time_slope })
    }

    /// `rho <u^p psi>`, `rho <u^p (a.u) psi>`, `rho <u^p A psi>` over `half`.
    fn moments(&self, half: Half, p: usize) -> [[f64; 5]; 3] {
        let r = self.w.rho;
        let base = self.table.psi(half, p, 0, 0, 0);
        let tr = self.table.transport_psi(half, &self.slopes, p);
        let ts = self.table.slope_psi(half, &self.time_slope, p, 0, 0);
        [base.map(|x| x * r), tr.map(|x| x * r), ts.map(|x| x * r)]
    }
}

/// Left, right and equilibrium states at one quadrature point.
#[derive(Debug, Clone)]
pub struct InterfaceReconstruction {
    pub left: SideState,
    pub right: SideState,
    pub eq: SideState,
}

fn add(a: [f64; 5], b: [f64; 5]) -> Conserved {
    Conserved::new(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4])
}

impl InterfaceReconstruction {
    /// Builds from local-frame values and derivatives. The equilibrium state
    /// and its slopes are the half-space blends of the two sides.
    pub fn new(ql: &Conserved, dql: &[Conserved; 3], qr: &Conserved, dqr: &[Conserved; 3], gamma: f64) -> Result<Self> {
        let left = SideState::new(ql, dql, gamma)?;
        let right = SideState::new(qr, dqr, gamma)?;
        let (rl, rr) = (left.w.rho, right.w.rho);
        let q0 = add(
            left.table.psi(Half::Positive, 0, 0, 0, 0).map(|x| x * rl),
            right.table.psi(Half::Negative, 0, 0, 0, 0).map(|x| x * rr),
        );
        let dq0 = [0, 1, 2].map(|k| {
            add(
                left.table.slope_psi(Half::Positive, &left.slopes[k], 0, 0, 0).map(|x| x * rl),
                right.table.slope_psi(Half::Negative, &right.slopes[k], 0, 0, 0).map(|x| x * rr),
            )
        });
        let eq = SideState::new(&q0, &dq0, gamma)?;
        Ok(Self { left, right, eq })
    }

    /// Builds from global-frame values and Cartesian gradients.
    pub fn from_global(
        ql: &Conserved,
        gl: &Gradient,
        qr: &Conserved,
        gr: &Gradient,
        frame: &Frame,
        gamma: f64,
    ) -> Result<Self> {
        Self::new(
            &rotate_to_local(ql, frame),
            &local_derivatives(gl, frame),
            &rotate_to_local(qr, frame),
            &local_derivatives(gr, frame),
            gamma,
        )
    }

    pub fn equilibrium_conserved(&self, gamma: f64) -> Conserved {
        self.eq.w.to_conserved(gamma)
    }

    /// `sum of c_k times the moment families`, with `u^p` weighting.
    fn assemble(&self, c: &[f64; 6], p: usize) -> Conserved {
        let e = self.eq.moments(Half::Full, p);
        let l = self.left.moments(Half::Positive, p);
        let r = self.right.moments(Half::Negative, p);
        let mut out = Conserved::zeros();
        for k in 0..5 {
            out[k] = c[0] * e[0][k]
                + c[1] * e[1][k]
                + c[2] * e[2][k]
                + c[3] * (l[0][k] + r[0][k])
                + c[4] * (l[1][k] + r[1][k])
                + c[5] * (l[2][k] + r[2][k]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionModel {
    Inviscid,
    /// Constant dynamic viscosity.
    Viscous { mu: f64 },
}

const TAU_EPS: f64 = 0.1;
const TAU_C: f64 = 1.0;

/// Collision time from the face pressures and the equilibrium pressure `p0`.
pub fn collision_time(model: CollisionModel, dt: f64, pl: f64, pr: f64, p0: f64) -> f64 {
    let jump = TAU_C * (pl - pr).abs() / (pl + pr) * dt;
    match model {
        CollisionModel::Inviscid => TAU_EPS * dt + jump,
        CollisionModel::Viscous { mu } => mu / p0 + jump,
    }
}

/// Sums `sum_{n >= start} coef(n) x^n` until the terms vanish.
fn series(x: f64, start: i32, coef: impl Fn(i32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut xn = x.powi(start);
    let mut fact: f64 = (1..=start).map(f64::from).product();
    for n in start..start + 40 {
        let term = coef(n) * xn / fact;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        xn *= x;
        fact *= f64::from(n + 1);
    }
    sum
}

fn sign(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

const SERIES_LIMIT: f64 = 0.25;

/// Integrals over `[0, t]` of the six time coefficients:
/// `1 - e`, `(s + tau) e - tau`, `s - tau + tau e`, `e`, `-(tau + s) e`,
/// `-tau e`, with `e = exp(-s / tau)`.
pub fn integrated_coefficients(tau: f64, t: f64) -> [f64; 6] {
    if tau <= 0.0 {
        return [t, 0.0, 0.5 * t * t, 0.0, 0.0, 0.0];
    }
    let x = t / tau;
    let om = -(-x).exp_m1();
    let e = 1.0 - om;
    let t2 = tau * tau;
    if x < SERIES_LIMIT {
        [
            tau * series(x, 2, sign),
            t2 * series(x, 3, |n| sign(n) * f64::from(n - 2)),
            t2 * series(x, 3, |n| -sign(n)),
            tau * om,
            -2.0 * t2 * om + tau * t * e,
            -t2 * om,
        ]
    } else {
        [
            t - tau * om,
            2.0 * t2 * om - tau * t * e - tau * t,
            0.5 * t * t - tau * t + t2 * om,
            tau * om,
            -2.0 * t2 * om + tau * t * e,
            -t2 * om,
        ]
    }
}

/// The same six coefficients evaluated at the instant `t`.
pub fn point_coefficients(tau: f64, t: f64) -> [f64; 6] {
    if t <= 0.0 {
        return [0.0, 0.0, 0.0, 1.0, -tau, -tau];
    }
    if tau <= 0.0 {
        return [1.0, 0.0, t, 0.0, 0.0, 0.0];
    }
    let x = t / tau;
    let om = -(-x).exp_m1();
    let e = 1.0 - om;
    if x < SERIES_LIMIT {
        [
            om,
            tau * series(x, 2, |n| sign(n) * f64::from(1 - n)),
            tau * series(x, 2, sign),
            e,
            -(tau + t) * e,
            -tau * e,
        ]
    } else {
        [om, (t + tau) * e - tau, t - tau + tau * e, e, -(tau + t) * e, -tau * e]
    }
}

/// Time-averaged flux `(1/dt) int_0^dt int u psi f dXi dt`.
pub fn evolve_flux(ir: &InterfaceReconstruction, tau: f64, dt: f64) -> Conserved {
    ir.assemble(&integrated_coefficients(tau, dt), 1) / dt
}

/// Flux `int u psi f dXi` at the instant `t`.
pub fn instantaneous_flux(ir: &InterfaceReconstruction, tau: f64, t: f64) -> Conserved {
    ir.assemble(&point_coefficients(tau, t), 1)
}

/// Conserved variables `int psi f dXi` at the instant `t`.
pub fn point_value(ir: &InterfaceReconstruction, tau: f64, t: f64) -> Conserved {
    ir.assemble(&point_coefficients(tau, t), 0)
}

/// Collisionless split flux of two Maxwellians.
pub fn kfvs_flux(wl: &PrimitiveState, wr: &PrimitiveState, gamma: f64) -> Result<Conserved> {
    let tl = build_moments(wl, gamma)?;
    let tr = build_moments(wr, gamma)?;
    Ok(add(
        tl.psi(Half::Positive, 1, 0, 0, 0).map(|x| x * wl.rho),
        tr.psi(Half::Negative, 1, 0, 0, 0).map(|x| x * wr.rho),
    ))
}

/// Inviscid Euler flux of a state along the first local axis.
pub fn euler_flux(w: &PrimitiveState, gamma: f64) -> Conserved {
    let q = w.to_conserved(gamma);
    let p = w.pressure();
    let u = w.vel.x;
    Conserved::new(q[1], q[1] * u + p, q[2] * u, q[3] * u, (q[4] + p) * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxKind {
    /// Second-order gas-kinetic flux.
    Gks,
    /// First-order collisionless flux of the point values.
    Kfvs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxConfig {
    pub gamma: f64,
    pub model: CollisionModel,
    pub kind: FluxKind,
}

/// Flux and end-of-step point value at one quadrature point, in global
/// components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution {
    pub flux: Conserved,
    pub value: Conserved,
}

pub fn solve_point(
    cfg: &FluxConfig,
    frame: &Frame,
    left: (&Conserved, &Gradient),
    right: (&Conserved, &Gradient),
    dt: f64,
) -> Result<PointSolution> {
    match cfg.kind {
        FluxKind::Kfvs => {
            let wl = conserved_to_primitive(&rotate_to_local(left.0, frame), cfg.gamma)?;
            let wr = conserved_to_primitive(&rotate_to_local(right.0, frame), cfg.gamma)?;
            let f = kfvs_flux(&wl, &wr, cfg.gamma)?;
            let tl = build_moments(&wl, cfg.gamma)?;
            let tr = build_moments(&wr, cfg.gamma)?;
            let v = add(
                tl.psi(Half::Positive, 0, 0, 0, 0).map(|x| x * wl.rho),
                tr.psi(Half::Negative, 0, 0, 0, 0).map(|x| x * wr.rho),
            );
            Ok(PointSolution { flux: rotate_to_global(&f, frame), value: rotate_to_global(&v, frame) })
        }
        FluxKind::Gks => {
            let ir = InterfaceReconstruction::from_global(left.0, left.1, right.0, right.1, frame, cfg.gamma)?;
            let tau = collision_time(cfg.model, dt, ir.left.w.pressure(), ir.right.w.pressure(), ir.eq.w.pressure());
            let f = evolve_flux(&ir, tau, dt);
            let v = point_value(&ir, tau, dt);
            if !(f.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
                return Err(Error::Unphysical("non-finite interface flux".into()));
            }
            Ok(PointSolution { flux: rotate_to_global(&f, frame), value: rotate_to_global(&v, frame) })
        }
    }
}
