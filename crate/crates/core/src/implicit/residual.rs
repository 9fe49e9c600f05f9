use rayon::prelude::*;

use super::jacobian::{assemble_jacobian, euler_jacobian, face_window, interface_spectral_radius, linearized_face_flux};
use super::jacobian::{local_time_steps, BlockJacobian};
use super::krylov::{gmres_solve, lusgs_sweep, norm, GmresOptions, GmresReport};
use crate::boundary::{ghost_state, Ghost, PatchKind, PatchSpec};
use crate::flux::{solve_point, CollisionModel, FluxConfig};
use crate::kinetic::conserved_to_primitive;
use crate::mesh::{Mesh, Neighbor};
use crate::recon::{gauss_gradients, CellPoly, ReconConfig, Reconstructor};
use crate::{Block5, Conserved, Error, Gradient, Result};

/// Cell averages and, for the compact scheme, cell-averaged gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub q: Vec<Conserved>,
    pub grads: Option<Vec<Gradient>>,
}

impl Field {
    pub fn uniform(n: usize, q: Conserved, with_grads: bool) -> Self {
        Field { q: vec![q; n], grads: with_grads.then(|| vec![Gradient::zeros(); n]) }
    }

    /// `sum_i |Omega_i| Q_i`.
    pub fn totals(&self, mesh: &Mesh) -> Conserved {
        mesh.cells.iter().zip(&self.q).fold(Conserved::zeros(), |acc, (c, q)| acc + q * c.volume)
    }
}

#[derive(Debug, Clone)]
pub struct ResidualEval {
    /// `L_i = -sum_f sum_G w_G F_G S`.
    pub residual: Vec<Conserved>,
    /// Area-weighted time-averaged flux of each face, out of its owner.
    pub face_flux: Vec<Conserved>,
    /// Evolved point values at the end of each face window.
    pub face_values: Vec<Vec<Conserved>>,
}

/// `(sum |L^rho| / N, sqrt(sum |L|^2 / N))`.
pub fn residual_norms(r: &[Conserved]) -> (f64, f64) {
    let n = r.len().max(1) as f64;
    let l1: f64 = r.iter().map(|x| x[0].abs()).sum::<f64>() / n;
    let l2 = r.iter().map(|x| x.norm_squared()).sum::<f64>() / n;
    (l1, l2.sqrt())
}

/// Spatial discretization on one mesh: reconstruction, interface fluxes and
/// boundary closures.
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub recon: Reconstructor,
    pub flux: FluxConfig,
    /// Spec of each mesh patch, by patch id.
    pub patches: Vec<PatchSpec>,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh, recon: ReconConfig, flux: FluxConfig, specs: &[PatchSpec]) -> Result<Self> {
        for s in specs {
            s.validate()?;
            if s.kind != PatchKind::Periodic && mesh.patch_id(&s.name).is_none() {
                return Err(Error::Config(format!("patch '{}' does not exist in the mesh", s.name)));
            }
        }
        let patches = mesh
            .patches
            .iter()
            .map(|p| {
                let s = specs
                    .iter()
                    .find(|s| s.name == p.name)
                    .ok_or_else(|| Error::Config(format!("no boundary condition for patch '{}'", p.name)))?;
                if s.kind == PatchKind::Periodic {
                    return Err(Error::Config(format!("patch '{}' is periodic but was not paired", p.name)));
                }
                Ok(s.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization { mesh, recon: Reconstructor::new(mesh, recon), flux, patches })
    }

    pub fn gamma(&self) -> f64 {
        self.flux.gamma
    }

    pub fn needs_gradients(&self) -> bool {
        self.recon.needs_gradients()
    }

    fn viscosity(&self) -> Option<f64> {
        match self.flux.model {
            CollisionModel::Viscous { mu } => Some(mu),
            CollisionModel::Inviscid => None,
        }
    }

    pub fn time_steps(&self, field: &Field, cfl: f64) -> Result<Vec<f64>> {
        local_time_steps(self.mesh, &field.q, cfl, self.gamma(), self.viscosity())
    }

    fn patch_of(&self, f: usize) -> &PatchSpec {
        match self.mesh.faces[f].neighbor {
            Neighbor::Boundary { patch } => &self.patches[patch],
            Neighbor::Cell { .. } => unreachable!("interior face has no patch"),
        }
    }

    /// Ghost state at face `f` for the interior point value `q`.
    pub fn ghost(&self, f: usize, q: &Conserved, grad: &Gradient) -> Result<Ghost> {
        ghost_state(self.patch_of(f), q, grad, &self.mesh.faces[f].frame, self.gamma())
    }

    fn face_solution(&self, f: usize, polys: &[CellPoly], dt: f64) -> Result<(Conserved, Vec<Conserved>)> {
        let face = &self.mesh.faces[f];
        let mut flux = Conserved::zeros();
        let mut values = Vec::with_capacity(face.quad.len());
        for qp in &face.quad {
            let (ql, gl) = polys[face.owner].eval(&qp.pos);
            let (qr, gr) = match face.neighbor {
                Neighbor::Cell { id, shift } => polys[id].eval(&(qp.pos - shift)),
                Neighbor::Boundary { .. } => {
                    let g = self.ghost(f, &ql, &gl)?;
                    (g.q, g.grad)
                }
            };
            let s = solve_point(&self.flux, &face.frame, (&ql, &gl), (&qr, &gr), dt)?;
            flux += s.flux * qp.weight;
            values.push(s.value);
        }
        if matches!(face.neighbor, Neighbor::Boundary { .. }) && self.patch_of(f).kind.is_wall() {
            // impermeable
            flux[0] = 0.0;
        }
        Ok((flux * face.area, values))
    }

    /// Residual of every cell with face windows from the per-cell steps.
    pub fn residual(&self, field: &Field, dts: &[f64]) -> Result<ResidualEval> {
        let mesh = self.mesh;
        let polys = self.recon.reconstruct(&field.q, field.grads.as_deref())?;
        let faces: Vec<(Conserved, Vec<Conserved>)> = (0..mesh.faces.len())
            .into_par_iter()
            .map(|f| {
                self.face_solution(f, &polys, face_window(mesh, f, dts)).map_err(|e| Error::StepFailure {
                    step: 0,
                    cell: mesh.faces[f].owner,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        let (face_flux, face_values): (Vec<_>, Vec<_>) = faces.into_iter().unzip();
        let residual = gather(mesh, |f, c| -face_flux[f] * mesh.orientation(f, c));
        Ok(ResidualEval { residual, face_flux, face_values })
    }

    /// Implicit operator at the cell averages.
    pub fn jacobian(&self, field: &Field, dts: &[f64]) -> Result<BlockJacobian> {
        assemble_jacobian(self.mesh, &field.q, dts, self.gamma(), |f, q| Ok(self.ghost(f, q, &Gradient::zeros())?.q))
    }

    /// Flux-form increment `dt_i / |Omega_i| (L_i - sum_f G_f(dQ))`, with
    /// `G_f` the linearised face flux of the increment. It equals the solved
    /// increment when the linear solve is exact and, with a uniform time step,
    /// conserves the totals exactly whatever the solver accuracy.
    pub fn conservative_update(
        &self,
        field: &Field,
        eval: &ResidualEval,
        dq: &[Conserved],
        dts: &[f64],
    ) -> Result<Vec<Conserved>> {
        let mesh = self.mesh;
        let g = self.gamma();
        let q = &field.q;
        let lin: Vec<Conserved> = (0..mesh.faces.len())
            .into_par_iter()
            .map(|f| {
                let face = &mesh.faces[f];
                let o = face.owner;
                match face.neighbor {
                    Neighbor::Cell { id, .. } => {
                        linearized_face_flux(&q[o], &q[id], &dq[o], &dq[id], &face.normal, face.area, g)
                    }
                    Neighbor::Boundary { .. } => {
                        let gq = self.ghost(f, &q[o], &Gradient::zeros())?.q;
                        let lam = interface_spectral_radius(&q[o], &gq, &face.normal, g)?;
                        Ok((euler_jacobian(&q[o], &face.normal, g) + Block5::identity() * lam) * dq[o] * (0.5 * face.area))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let net = gather(mesh, |f, c| -lin[f] * mesh.orientation(f, c));
        Ok((0..q.len()).map(|i| (eval.residual[i] + net[i]) * (dts[i] / mesh.cells[i].volume)).collect())
    }

    /// Evolved gradients from the end-of-window point values.
    pub fn updated_gradients(&self, eval: &ResidualEval) -> Vec<Gradient> {
        gauss_gradients(self.mesh, &eval.face_values)
    }
}

fn gather(mesh: &Mesh, term: impl Fn(usize, usize) -> Conserved + Sync) -> Vec<Conserved> {
    mesh.cells
        .par_iter()
        .enumerate()
        .map(|(c, cell)| cell.faces.iter().fold(Conserved::zeros(), |acc, &f| acc + term(f, c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    Gmres(GmresOptions),
    Lusgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeStepping {
    /// Per-cell steps; the solved increment is applied as is.
    Local,
    /// The smallest cell step everywhere; the increment is applied in flux
    /// form so the totals are conserved.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSettings {
    pub cfl: f64,
    pub solver: LinearSolver,
    pub time_stepping: TimeStepping,
}

impl StepSettings {
    pub fn new(cfl: f64, solver: LinearSolver) -> Self {
        StepSettings { cfl, solver, time_stepping: TimeStepping::Local }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Residual at the start of the step.
    pub residual: Vec<Conserved>,
    pub increment_norm: f64,
    pub linear: Option<GmresReport>,
    /// Cells whose step had to be halved.
    pub halved: Vec<usize>,
}

fn is_physical(q: &Conserved, gamma: f64) -> bool {
    q.iter().all(|v| v.is_finite()) && conserved_to_primitive(q, gamma).is_ok_and(|w| w.is_valid())
}

/// One backward-Euler step. A cell whose update is unphysical gets its time
/// step halved and the step is retried once.
pub fn advance_implicit(disc: &Discretization, field: &mut Field, settings: &StepSettings, step: usize) -> Result<StepOutcome> {
    let with_step = |e: Error| match e {
        Error::StepFailure { cell, msg, .. } => Error::StepFailure { step, cell, msg },
        other => Error::StepFailure { step, cell: 0, msg: other.to_string() },
    };
    let g = disc.gamma();
    let mut dts = disc.time_steps(field, settings.cfl).map_err(with_step)?;
    let global = settings.time_stepping == TimeStepping::Global;
    if global {
        let m = dts.iter().copied().fold(f64::INFINITY, f64::min);
        dts.iter_mut().for_each(|d| *d = m);
    }
    let mut halved = Vec::new();
    for attempt in 0..2 {
        let eval = disc.residual(field, &dts).map_err(with_step)?;
        let a = disc.jacobian(field, &dts).map_err(with_step)?;
        let (dq, linear) = match settings.solver {
            LinearSolver::Gmres(opts) => {
                let rep = gmres_solve(&a, &eval.residual, &opts).map_err(with_step)?;
                (rep.x.clone(), Some(rep))
            }
            LinearSolver::Lusgs => (lusgs_sweep(&a, &eval.residual).map_err(with_step)?, None),
        };
        let dqc = if global { disc.conservative_update(field, &eval, &dq, &dts).map_err(with_step)? } else { dq };
        let next: Vec<Conserved> = field.q.iter().zip(&dqc).map(|(q, d)| q + d).collect();
        let bad: Vec<usize> = (0..next.len()).filter(|&i| !is_physical(&next[i], g)).collect();
        if bad.is_empty() {
            if disc.needs_gradients() {
                field.grads = Some(disc.updated_gradients(&eval));
            }
            field.q = next;
            return Ok(StepOutcome { residual: eval.residual, increment_norm: norm(&dqc), linear, halved });
        }
        if attempt == 1 {
            return Err(Error::StepFailure { step, cell: bad[0], msg: "unphysical update after halving the time step".into() });
        }
        if global {
            dts.iter_mut().for_each(|d| *d *= 0.5);
        } else {
            for &c in &bad {
                dts[c] *= 0.5;
            }
        }
        halved = bad;
    }
    unreachable!()
}

/// `(L(Q + s v) - L(Q)) / s` with `s = sqrt(eps) (1 + |Q|) / |v|`.
pub fn frechet_matvec<L>(l: L, q: &[Conserved], v: &[Conserved]) -> Result<Vec<Conserved>>
where
    L: Fn(&[Conserved]) -> Result<Vec<Conserved>>,
{
    let vn = norm(v);
    if vn == 0.0 {
        return Ok(vec![Conserved::zeros(); q.len()]);
    }
    let s = f64::EPSILON.sqrt() * (1.0 + norm(q)) / vn;
    let base = l(q)?;
    let shifted: Vec<Conserved> = q.iter().zip(v).map(|(a, b)| a + b * s).collect();
    let moved = l(&shifted)?;
    Ok(moved.iter().zip(&base).map(|(a, b)| (a - b) / s).collect())
}
