//! Case configuration, the steady-state loop and file output.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{CaseConfig, MeshSource, Method, OutputConfig, PatchEntry, Physics, SolverConfig, Viscosity};
pub use output::{write_vtk, ResidualEntry, ResidualHistory};

use crate::implicit::{advance_implicit, residual_norms, Discretization, Field};
use crate::mesh::Mesh;
use crate::Result;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: Field,
    pub history: ResidualHistory,
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

/// Uniform initial state of the case.
pub fn initial_field(cfg: &CaseConfig, mesh: &Mesh) -> Field {
    let q = cfg.physics.initial().to_conserved(cfg.physics.gamma);
    Field::uniform(mesh.num_cells(), q, cfg.method.scheme() == crate::recon::Scheme::Hweno)
}

/// Builds the mesh and runs the case from the uniform initial state.
pub fn run_case(cfg: &CaseConfig) -> Result<RunOutcome> {
    let mesh = cfg.build_mesh()?;
    let field = initial_field(cfg, &mesh);
    run_on_mesh(cfg, &mesh, field, |_, _| {})
}

/// Steps until both residual norms reach the threshold or the step limit.
/// `observer` sees every history entry with the updated field.
pub fn run_on_mesh<F>(cfg: &CaseConfig, mesh: &Mesh, mut field: Field, mut observer: F) -> Result<RunOutcome>
where
    F: FnMut(&ResidualEntry, &Field),
{
    cfg.validate()?;
    let disc = Discretization::new(mesh, cfg.recon_config(), cfg.flux_config(), &cfg.patch_specs()?)?;
    if disc.recon.fallback_count() > 0 {
        log::info!("{} of {} cells use a reduced reconstruction", disc.recon.fallback_count(), mesh.num_cells());
    }
    let settings = cfg.step_settings();
    let out = &cfg.output;
    if let Some(dir) = &out.directory {
        std::fs::create_dir_all(dir)?;
    }
    let gamma = cfg.physics.gamma;
    let mut history = ResidualHistory::default();
    let mut files = Vec::new();
    let mut converged = false;
    let start = Instant::now();
    for step in 0..cfg.solver.max_steps {
        let o = advance_implicit(&disc, &mut field, &settings, step)?;
        let (l1, l2) = residual_norms(&o.residual);
        let entry = ResidualEntry { step, time_s: start.elapsed().as_secs_f64(), res_rho_l1: l1, res_l2: l2 };
        history.push(entry);
        observer(&entry, &field);
        if !o.halved.is_empty() {
            log::warn!("step {step}: halved the time step in {} cells", o.halved.len());
        }
        if step % 50 == 0 {
            log::info!("step {step}: rho L1 {l1:.3e}, L2 {l2:.3e}");
        }
        if let Some(dir) = &out.directory {
            if out.every > 0 && step > 0 && step % out.every == 0 {
                let p = dir.join(format!("{}_{step:06}.vtk", out.prefix));
                write_vtk(mesh, &field, gamma, &p, out.gradients)?;
                files.push(p);
            }
        }
        if entry.below(cfg.solver.threshold) {
            converged = true;
            break;
        }
    }
    if let Some(dir) = &out.directory {
        let p = dir.join(format!("{}_final.vtk", out.prefix));
        write_vtk(mesh, &field, gamma, &p, out.gradients)?;
        files.push(p);
        let p = dir.join(format!("{}_residuals.csv", out.prefix));
        history.write_csv(&p)?;
        files.push(p);
    }
    Ok(RunOutcome { field, history, converged, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    const FREE: &str = "
[mesh]
n = 2
split = tet
perturb = 0.2
seed = 3
[scheme]
method = hweno_gmres
[physics]
mach = 0.5
direction = 1 0.3 0
[solver]
max_steps = 10
threshold = 0
[patches]
xmin = farfield_riemann
xmax = farfield_riemann
ymin = supersonic_inlet
ymax = supersonic_outlet
zmin = wall_slip_adiabatic
zmax = farfield_riemann
[output]
directory = out
every = 5
";

    #[test]
    fn free_stream_case_stays_uniform() {
        let dir = tempfile::tempdir().unwrap();
        // z walls only see tangential flow
        let cfg = CaseConfig::parse(FREE, dir.path()).unwrap();
        let run = run_case(&cfg).unwrap();
        assert!(!run.converged);
        assert_eq!(run.history.entries.len(), 10);
        assert!(run.history.entries.iter().all(|e| e.res_rho_l1 <= 1e-12 && e.res_l2 <= 1e-12));
        let q0 = cfg.physics.reference().to_conserved(1.4);
        assert!(run.field.q.iter().all(|q| (q - q0).amax() < 1e-12));
        let names: Vec<String> =
            run.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["case_000005.vtk", "case_final.vtk", "case_residuals.csv"]);
        let h = ResidualHistory::read_csv(&dir.path().join("out/case_residuals.csv")).unwrap();
        assert_eq!(h.entries.len(), 10);
    }

    #[test]
    fn missing_patch_is_named() {
        let text = FREE.replace("zmax = farfield_riemann\n", "");
        let cfg = CaseConfig::parse(&text, Path::new(".")).unwrap();
        let e = run_case(&cfg).unwrap_err();
        assert!(e.to_string().contains("zmax"), "{e}");
        let text = FREE.replace("zmax = farfield_riemann", "zmax = farfield_riemann\ntop = farfield_riemann");
        let cfg = CaseConfig::parse(&text, Path::new(".")).unwrap();
        assert!(run_case(&cfg).unwrap_err().to_string().contains("top"));
    }

    #[test]
    fn runs_are_deterministic() {
        let text = "
[mesh]
n = 3
split = hex
periodic = x y z
[scheme]
method = weno_gmres
[physics]
mach = 0.3
[solver]
max_steps = 4
threshold = 0
";
        let cfg = CaseConfig::parse(text, Path::new(".")).unwrap();
        let mesh = cfg.build_mesh().unwrap();
        let bump = |mesh: &Mesh| {
            let mut f = initial_field(&cfg, mesh);
            for (q, c) in f.q.iter_mut().zip(&mesh.cells) {
                let s = 1.0 + 0.1 * (std::f64::consts::TAU * c.centroid.x).sin();
                *q *= s;
            }
            f
        };
        let a = run_on_mesh(&cfg, &mesh, bump(&mesh), |_, _| {}).unwrap();
        let b = run_on_mesh(&cfg, &mesh, bump(&mesh), |_, _| {}).unwrap();
        for (x, y) in a.history.entries.iter().zip(&b.history.entries) {
            assert_eq!(x.res_rho_l1, y.res_rho_l1);
            assert_eq!(x.res_l2, y.res_l2);
        }
        assert_eq!(a.field, b.field);
    }
}
