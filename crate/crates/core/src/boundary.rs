//! Ghost states for boundary faces.
//!
//! A boundary face is closed by a ghost state built from the interior value at
//! each quadrature point. The interior and ghost states then go through the
//! same interface solver as an interior face.

use std::fmt;
use std::str::FromStr;

use crate::kinetic::{conserved_to_primitive, PrimitiveState};
use crate::mesh::Frame;
use nalgebra::Matrix3;

use crate::{Conserved, Error, Gradient, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    FarfieldRiemann,
    SupersonicInlet,
    SupersonicOutlet,
    WallNoslipIsothermal,
    WallNoslipAdiabatic,
    WallSlipAdiabatic,
    Periodic,
}

impl PatchKind {
    pub const ALL: [PatchKind; 7] = [
        PatchKind::FarfieldRiemann,
        PatchKind::SupersonicInlet,
        PatchKind::SupersonicOutlet,
        PatchKind::WallNoslipIsothermal,
        PatchKind::WallNoslipAdiabatic,
        PatchKind::WallSlipAdiabatic,
        PatchKind::Periodic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatchKind::FarfieldRiemann => "farfield_riemann",
            PatchKind::SupersonicInlet => "supersonic_inlet",
            PatchKind::SupersonicOutlet => "supersonic_outlet",
            PatchKind::WallNoslipIsothermal => "wall_noslip_isothermal",
            PatchKind::WallNoslipAdiabatic => "wall_noslip_adiabatic",
            PatchKind::WallSlipAdiabatic => "wall_slip_adiabatic",
            PatchKind::Periodic => "periodic",
        }
    }

    pub fn is_wall(self) -> bool {
        matches!(
            self,
            PatchKind::WallNoslipIsothermal | PatchKind::WallNoslipAdiabatic | PatchKind::WallSlipAdiabatic
        )
    }

    pub fn needs_reference(self) -> bool {
        matches!(self, PatchKind::FarfieldRiemann | PatchKind::SupersonicInlet)
    }
}

impl fmt::Display for PatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PatchKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown patch kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub name: String,
    pub kind: PatchKind,
    /// Far-field or inflow state.
    pub reference: Option<PrimitiveState>,
    /// Wall inverse temperature for isothermal walls.
    pub lambda_wall: Option<f64>,
    /// Tangential wall velocity of no-slip walls.
    pub wall_velocity: Vec3,
}

impl PatchSpec {
    pub fn new(name: impl Into<String>, kind: PatchKind) -> Self {
        PatchSpec { name: name.into(), kind, reference: None, lambda_wall: None, wall_velocity: Vec3::zeros() }
    }

    pub fn with_reference(mut self, w: PrimitiveState) -> Self {
        self.reference = Some(w);
        self
    }

    pub fn with_lambda_wall(mut self, lambda: f64) -> Self {
        self.lambda_wall = Some(lambda);
        self
    }

    pub fn with_wall_velocity(mut self, v: Vec3) -> Self {
        self.wall_velocity = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.needs_reference() {
            match &self.reference {
                Some(w) if w.is_valid() => {}
                Some(_) => return Err(Error::Config(format!("patch '{}': invalid reference state", self.name))),
                None => return Err(Error::Config(format!("patch '{}': reference state required", self.name))),
            }
        }
        if self.kind == PatchKind::WallNoslipIsothermal {
            match self.lambda_wall {
                Some(l) if l.is_finite() && l > 0.0 => {}
                _ => return Err(Error::Config(format!("patch '{}': positive wall lambda required", self.name))),
            }
        }
        if !self.wall_velocity.iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!("patch '{}': non-finite wall velocity", self.name)));
        }
        Ok(())
    }

    fn reference(&self) -> Result<&PrimitiveState> {
        self.reference
            .as_ref()
            .ok_or_else(|| Error::Config(format!("patch '{}': reference state required", self.name)))
    }
}

/// Exterior state and gradient at one boundary quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghost {
    pub q: Conserved,
    pub grad: Gradient,
}

/// Gradients of density, velocity (`du[(j, i)] = d u_i / d x_j`) and pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PrimitiveGradient {
    rho: Vec3,
    vel: Matrix3<f64>,
    p: Vec3,
}

impl PrimitiveGradient {
    fn from_conserved(w: &PrimitiveState, grad: &Gradient, gamma: f64) -> Self {
        let drho: Vec3 = grad.column(0).into();
        let vel = Matrix3::from_fn(|j, i| (grad[(j, 1 + i)] - w.vel[i] * drho[j]) / w.rho);
        let p = (grad.column(4) - drho * (0.5 * w.vel.norm_squared()) - vel * w.vel * w.rho) * (gamma - 1.0);
        PrimitiveGradient { rho: drho, vel, p }
    }

    fn to_conserved(self, w: &PrimitiveState, gamma: f64) -> Gradient {
        let mut g = Gradient::zeros();
        g.set_column(0, &self.rho);
        for i in 0..3 {
            g.set_column(1 + i, &(self.rho * w.vel[i] + self.vel.column(i) * w.rho));
        }
        let de = self.p / (gamma - 1.0) + self.rho * (0.5 * w.vel.norm_squared()) + self.vel * w.vel * w.rho;
        g.set_column(4, &de);
        g
    }
}

/// Ghost gradient of a wall. The geometry is mirrored in every variable;
/// velocity is reflected (slip) or reversed (no slip); an isothermal ghost has
/// a uniform temperature and a density tied to the interior one.
fn wall_gradient(kind: PatchKind, w: &PrimitiveState, ghost: &PrimitiveState, grad: &Gradient, n: &Vec3, gamma: f64) -> Gradient {
    let r = Matrix3::identity() - n * n.transpose() * 2.0;
    let pg = PrimitiveGradient::from_conserved(w, grad, gamma);
    let mut m = PrimitiveGradient { rho: r * pg.rho, vel: r * pg.vel, p: r * pg.p };
    match kind {
        PatchKind::WallSlipAdiabatic => m.vel *= r,
        PatchKind::WallNoslipIsothermal => {
            m.vel = -m.vel;
            let p = w.pressure();
            let dlam = (m.rho - m.p * (w.rho / p)) / (2.0 * p);
            m.rho = (m.rho / w.lambda.sqrt() - dlam * (0.5 * w.rho / w.lambda.powf(1.5))) * ghost.lambda.sqrt();
            m.p = m.rho / (2.0 * ghost.lambda);
        }
        _ => m.vel = -m.vel,
    }
    m.to_conserved(ghost, gamma)
}

fn riemann_state(w: &PrimitiveState, r: &PrimitiveState, n: &Vec3, gamma: f64) -> PrimitiveState {
    let (ai, ar) = (w.sound_speed(gamma), r.sound_speed(gamma));
    let (uni, unr) = (w.vel.dot(n), r.vel.dot(n));
    if uni.abs() >= ai {
        return if uni > 0.0 { *w } else { *r };
    }
    let gm = gamma - 1.0;
    let rp = uni + 2.0 * ai / gm;
    let rm = unr - 2.0 * ar / gm;
    let un = 0.5 * (rp + rm);
    let a = 0.25 * gm * (rp - rm);
    // entropy and tangential velocity come from the upwind side
    let up = if un > 0.0 { w } else { r };
    let s = up.pressure() / up.rho.powf(gamma);
    let rho = (a * a / (gamma * s)).powf(1.0 / gm);
    let p = rho * a * a / gamma;
    let vt = up.vel - n * up.vel.dot(n);
    PrimitiveState::from_pressure(rho, vt + n * un, p)
}

/// Builds the ghost state across a boundary face. `frame.nx` points out of
/// the domain; `q` and `grad` are the interior values at the point.
pub fn ghost_state(spec: &PatchSpec, q: &Conserved, grad: &Gradient, frame: &Frame, gamma: f64) -> Result<Ghost> {
    let n = frame.nx;
    let w = conserved_to_primitive(q, gamma)?;
    let (gw, ggrad) = match spec.kind {
        PatchKind::Periodic => {
            return Err(Error::Config(format!("patch '{}': periodic faces have no ghost state", spec.name)))
        }
        PatchKind::FarfieldRiemann => (riemann_state(&w, spec.reference()?, &n, gamma), *grad),
        PatchKind::SupersonicInlet | PatchKind::SupersonicOutlet => {
            if w.vel.dot(&n) < 0.0 {
                (*spec.reference()?, Gradient::zeros())
            } else {
                (w, *grad)
            }
        }
        PatchKind::WallSlipAdiabatic => {
            let vel = w.vel - n * (2.0 * w.vel.dot(&n));
            let g = PrimitiveState::new(w.rho, vel, w.lambda);
            (g, wall_gradient(spec.kind, &w, &g, grad, &n, gamma))
        }
        PatchKind::WallNoslipAdiabatic => {
            let vel = spec.wall_velocity * 2.0 - w.vel;
            let g = PrimitiveState::new(w.rho, vel, w.lambda);
            (g, wall_gradient(spec.kind, &w, &g, grad, &n, gamma))
        }
        PatchKind::WallNoslipIsothermal => {
            let lw = spec
                .lambda_wall
                .ok_or_else(|| Error::Config(format!("patch '{}': wall lambda required", spec.name)))?;
            let vel = spec.wall_velocity * 2.0 - w.vel;
            // zero net half-space mass flux at rest
            let rho = w.rho * (lw / w.lambda).sqrt();
            let g = PrimitiveState::new(rho, vel, lw);
            (g, wall_gradient(spec.kind, &w, &g, grad, &n, gamma))
        }
    };
    Ok(Ghost { q: gw.to_conserved(gamma), grad: ggrad })
}
