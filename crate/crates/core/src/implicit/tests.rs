use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::boundary::{PatchKind, PatchSpec};
use crate::flux::{CollisionModel, FluxConfig, FluxKind};
use crate::kinetic::{pressure, PrimitiveState};
use crate::mesh::{generate_box_mesh, BoxSpec, Mesh, Split};
use crate::oracles::{dense_solve, fd_jacobian, flatten, unflatten};
use crate::recon::{ReconConfig, Scheme};
use crate::{Block5, Conserved, Vec3};

const G: f64 = 1.4;

fn normal_flux(q: &Conserved, n: &Vec3) -> Conserved {
    let p = pressure(q, G);
    let un = (q[1] * n.x + q[2] * n.y + q[3] * n.z) / q[0];
    Conserved::new(q[0] * un, q[1] * un + p * n.x, q[2] * un + p * n.y, q[3] * un + p * n.z, (q[4] + p) * un)
}

fn random_state(rng: &mut ChaCha8Rng) -> Conserved {
    PrimitiveState::from_pressure(
        rng.gen_range(0.5..2.0),
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        rng.gen_range(0.5..2.0),
    )
    .to_conserved(G)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize()
}

fn random_blocks(n: usize, degree: usize, dominance: f64, seed: u64) -> BlockJacobian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            let mut nb: Vec<usize> = (0..degree).map(|_| rng.gen_range(0..n)).filter(|&j| j != i).collect();
            nb.sort_unstable();
            nb.dedup();
            let off: Vec<(usize, Block5)> =
                nb.into_iter().map(|j| (j, Block5::from_fn(|_, _| rng.gen_range(-1.0..1.0)))).collect();
            let diag = Block5::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + Block5::identity() * dominance;
            BlockRow { diag, off }
        })
        .collect();
    BlockJacobian { rows }
}

fn random_vec(n: usize, seed: u64) -> Vec<Conserved> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Conserved::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect()
}

fn rel_dense(x: &[Conserved], y: &DVector<f64>) -> f64 {
    (flatten(x) - y).amax() / y.amax()
}

fn box_mesh(n: usize, split: Split, periodic: bool, perturb: f64) -> Mesh {
    let mut spec = BoxSpec::new([1.0; 3], [n; 3], split);
    spec.periodic = [periodic; 3];
    spec.perturb = perturb;
    spec.seed = 7;
    generate_box_mesh(&spec).unwrap()
}

fn farfield_specs(w: PrimitiveState) -> Vec<PatchSpec> {
    ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"]
        .iter()
        .map(|n| PatchSpec::new(*n, PatchKind::FarfieldRiemann).with_reference(w))
        .collect()
}

fn flux_cfg() -> FluxConfig {
    FluxConfig { gamma: G, model: CollisionModel::Inviscid, kind: FluxKind::Gks }
}

#[test]
fn euler_jacobian_eigenvalues() {
    let w = PrimitiveState::from_pressure(1.2, Vec3::new(0.4, 0.0, 0.0), 0.9);
    let j = euler_jacobian(&w.to_conserved(G), &Vec3::x(), G);
    let mut ev: Vec<f64> = j.complex_eigenvalues().iter().map(|c| c.re).collect();
    ev.sort_by(f64::total_cmp);
    let a = w.sound_speed(G);
    let expect = [0.4 - a, 0.4, 0.4, 0.4, 0.4 + a];
    for (e, x) in ev.iter().zip(expect) {
        assert!((e - x).abs() < 1e-10, "{ev:?}");
    }
}

#[test]
fn euler_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let q = random_state(&mut rng);
        let n = random_unit(&mut rng);
        let fd = fd_jacobian(|x| normal_flux(x, &n), &q, 1e-6);
        let j = euler_jacobian(&q, &n, G);
        assert!((fd - j).amax() <= 1e-5 * j.amax(), "{}", (fd - j).amax());
    }
}

#[test]
fn single_cube_time_step() {
    let mesh = box_mesh(1, Split::Hex, false, 0.0);
    let w = PrimitiveState::from_pressure(1.0, Vec3::new(0.3, -0.2, 0.1), 1.0);
    let q = vec![w.to_conserved(G)];
    let dt = local_time_steps(&mesh, &q, 2.0, G, None).unwrap()[0];
    let expect = 2.0 / (2.0 * (0.3 + 0.2 + 0.1) + 6.0 * w.sound_speed(G));
    assert!((dt - expect).abs() < 1e-14);
    let dt4 = local_time_steps(&mesh, &q, 4.0, G, None).unwrap()[0];
    assert!((dt4 - 2.0 * dt).abs() < 1e-14);
    let rest = vec![PrimitiveState::from_pressure(1.0, Vec3::zeros(), 1.0).to_conserved(G)];
    let dt0 = local_time_steps(&mesh, &rest, 2.0, G, None).unwrap()[0];
    assert!((dt0 - 2.0 / (6.0 * G.sqrt())).abs() < 1e-14);
    let dtv = local_time_steps(&mesh, &rest, 2.0, G, Some(0.1)).unwrap()[0];
    assert!((dtv - 2.0 / (6.0 * (G.sqrt() + 0.1))).abs() < 1e-14);
}

#[test]
fn isolated_cell_has_diagonal_only() {
    let mesh = box_mesh(1, Split::Hex, false, 0.0);
    let w = PrimitiveState::from_pressure(1.0, Vec3::new(0.3, 0.0, 0.0), 1.0);
    let a = assemble_jacobian(&mesh, &[w.to_conserved(G)], &[0.1], G, |_, q| Ok(*q)).unwrap();
    assert_eq!(a.num_cells(), 1);
    assert!(a.rows[0].off.is_empty());
}

#[test]
fn jacobian_pattern_is_adjacency_and_blocks_match_split_flux() {
    let mesh = box_mesh(2, Split::Tet, false, 0.15);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q: Vec<Conserved> = (0..mesh.num_cells()).map(|_| random_state(&mut rng)).collect();
    let dts: Vec<f64> = (0..mesh.num_cells()).map(|_| rng.gen_range(0.01..0.1)).collect();
    let a = assemble_jacobian(&mesh, &q, &dts, G, |_, q| Ok(*q)).unwrap();
    for (i, row) in a.rows.iter().enumerate() {
        let mut nb: Vec<usize> = mesh.neighbors(i).into_iter().flatten().map(|e| e.cell).collect();
        nb.sort_unstable();
        nb.dedup();
        let pattern: Vec<usize> = row.off.iter().map(|e| e.0).collect();
        assert_eq!(pattern, nb);
        // off-diagonal blocks from finite differences of the split flux
        for &(j, b) in &row.off {
            let mut fd = Block5::zeros();
            for &f in &mesh.cells[i].faces {
                if mesh.across(f, i).map(|e| e.cell) != Some(j) {
                    continue;
                }
                let n = mesh.faces[f].normal * mesh.orientation(f, i);
                let lam = interface_spectral_radius(&q[i], &q[j], &n, G).unwrap();
                let split = |x: &Conserved| (normal_flux(x, &n) - x * lam) * 0.5;
                fd += fd_jacobian(split, &q[j], 1e-6) * mesh.faces[f].area;
            }
            assert!((fd - b).amax() <= 1e-5 * b.amax());
        }
    }
}

#[test]
fn spmv_cases() {
    let id = BlockJacobian { rows: (0..4).map(|_| BlockRow { diag: Block5::identity(), off: vec![] }).collect() };
    let x = random_vec(4, 1);
    assert_eq!(id.spmv(&x), x);
    let a = random_blocks(20, 4, 3.0, 9);
    let x = random_vec(20, 2);
    let dense = a.to_dense() * flatten(&x);
    assert!((flatten(&a.spmv(&x)) - dense).amax() < 1e-13);
    assert!(a.spmv(&vec![Conserved::zeros(); 20]).iter().all(|v| v.amax() == 0.0));
}

#[test]
fn jacobi_cases() {
    let mut diag_only = random_blocks(6, 0, 4.0, 3);
    diag_only.rows.iter_mut().for_each(|r| r.off.clear());
    let b = random_vec(6, 4);
    let exact = dense_solve(&diag_only.to_dense(), &flatten(&b)).unwrap();
    for k in [0, 1, 5] {
        assert!(rel_dense(&jacobi_precondition(&diag_only, &b, k).unwrap(), &exact) < 1e-13);
    }
    let a = random_blocks(10, 3, 12.0, 5);
    let b = random_vec(10, 6);
    let z0 = jacobi_precondition(&a, &b, 0).unwrap();
    let dinv = a.diag_inverses().unwrap();
    for i in 0..10 {
        assert!((z0[i] - dinv[i] * b[i]).amax() < 1e-15);
    }
    let exact = dense_solve(&a.to_dense(), &flatten(&b)).unwrap();
    assert!(rel_dense(&jacobi_precondition(&a, &b, 50).unwrap(), &exact) < 1e-8);
}

#[test]
fn gmres_identity_and_zero() {
    let id = BlockJacobian { rows: (0..5).map(|_| BlockRow { diag: Block5::identity(), off: vec![] }).collect() };
    let b = random_vec(5, 8);
    let rep = gmres_solve(&id, &b, &GmresOptions::default()).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(rel_dense(&rep.x, &flatten(&b)) < 1e-15);
    let rep = gmres_solve(&id, &vec![Conserved::zeros(); 5], &GmresOptions::default()).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(rep.x.iter().all(|v| v.amax() == 0.0));
}

#[test]
fn gmres_matches_dense_solve() {
    let a = random_blocks(25, 4, 4.0, 11);
    let b = random_vec(25, 12);
    let opts = GmresOptions { krylov_dim: 30, restarts: 10, check_orthogonality: true, ..Default::default() };
    let rep = gmres_solve(&a, &b, &opts).unwrap();
    let exact = dense_solve(&a.to_dense(), &flatten(&b)).unwrap();
    assert!(rel_dense(&rep.x, &exact) < 1e-9, "{}", rel_dense(&rep.x, &exact));
    assert!(rep.orthogonality <= 1e-10, "{} {:?}", rep.orthogonality, rep.cycles);
    for c in &rep.cycles {
        assert!(c.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}

#[test]
fn gmres_on_generic_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = DMatrix::from_fn(40, 40, |i, j| if i == j { 6.0 } else { rng.gen_range(-0.5..0.5) });
    let b = random_vec(8, 22);
    let apply = |x: &[Conserved]| unflatten(&(&m * flatten(x)));
    let opts = GmresOptions { krylov_dim: 40, restarts: 2, ..Default::default() };
    let rep = gmres(apply, |x| x.to_vec(), &b, &opts).unwrap();
    let exact = dense_solve(&m, &flatten(&b)).unwrap();
    assert!(rel_dense(&rep.x, &exact) < 1e-10);
}

#[test]
fn lusgs_cases() {
    let mut diag_only = random_blocks(6, 0, 4.0, 31);
    diag_only.rows.iter_mut().for_each(|r| r.off.clear());
    let r = random_vec(6, 32);
    let exact = dense_solve(&diag_only.to_dense(), &flatten(&r)).unwrap();
    assert!(rel_dense(&lusgs_sweep(&diag_only, &r).unwrap(), &exact) < 1e-13);

    let mut lower = random_blocks(12, 4, 4.0, 33);
    lower.rows.iter_mut().enumerate().for_each(|(i, row)| row.off.retain(|e| e.0 < i));
    let r = random_vec(12, 34);
    let exact = dense_solve(&lower.to_dense(), &flatten(&r)).unwrap();
    assert!(rel_dense(&lusgs_sweep(&lower, &r).unwrap(), &exact) < 1e-12);

    // symmetric, diagonally dominant
    let base = random_blocks(15, 3, 0.0, 35);
    let mut dense = base.to_dense();
    dense = &dense + dense.transpose() + DMatrix::identity(75, 75) * 40.0;
    let pattern: Vec<Vec<usize>> = (0..15)
        .map(|i| (0..15).filter(|&j| j != i && dense.view((5 * i, 5 * j), (5, 5)).amax() > 0.0).collect())
        .collect();
    let sym = BlockJacobian::from_dense(&dense, &pattern);
    let r = random_vec(15, 36);
    let x = lusgs_sweep(&sym, &r).unwrap();
    let res = (&dense * flatten(&x) - flatten(&r)).norm();
    assert!(res < flatten(&r).norm());
}

#[test]
fn free_stream_residual_vanishes() {
    let mesh = box_mesh(3, Split::Tet, false, 0.2);
    let w = PrimitiveState::from_pressure(1.0, Vec3::new(0.5, 0.2, -0.1), 1.0 / G);
    for scheme in [Scheme::Weno, Scheme::Hweno] {
        let disc = Discretization::new(&mesh, ReconConfig::new(scheme), flux_cfg(), &farfield_specs(w)).unwrap();
        let field = Field::uniform(mesh.num_cells(), w.to_conserved(G), scheme == Scheme::Hweno);
        let dts = disc.time_steps(&field, 2.0).unwrap();
        let eval = disc.residual(&field, &dts).unwrap();
        let m = eval.residual.iter().fold(0.0f64, |m, r| m.max(r.amax()));
        assert!(m <= 1e-12, "{scheme:?}: {m}");
    }
}

fn sine_field(mesh: &Mesh) -> Field {
    let q = mesh
        .cells
        .iter()
        .map(|c| {
            let x = c.centroid;
            let rho = 1.0 + 0.2 * (2.0 * std::f64::consts::PI * (x.x + x.y)).sin();
            PrimitiveState::from_pressure(rho, Vec3::zeros(), 1.0).to_conserved(G)
        })
        .collect();
    Field { q, grads: None }
}

#[test]
fn periodic_residual_sums_to_zero() {
    let mesh = box_mesh(4, Split::Hex, true, 0.0);
    let disc = Discretization::new(&mesh, ReconConfig::new(Scheme::Weno), flux_cfg(), &[]).unwrap();
    let field = sine_field(&mesh);
    let dts = disc.time_steps(&field, 2.0).unwrap();
    let eval = disc.residual(&field, &dts).unwrap();
    let total = eval.residual.iter().fold(Conserved::zeros(), |a, r| a + r);
    assert!(total.amax() < 1e-12, "{total}");
    assert!(eval.residual.iter().any(|r| r.amax() > 1e-6));
}

#[test]
fn implicit_steps_conserve_on_periodic_box() {
    let mesh = box_mesh(4, Split::Hex, true, 0.0);
    for solver in [LinearSolver::Gmres(GmresOptions::default()), LinearSolver::Lusgs] {
        let disc = Discretization::new(&mesh, ReconConfig::new(Scheme::Weno), flux_cfg(), &[]).unwrap();
        let mut field = sine_field(&mesh);
        let before = field.totals(&mesh);
        let settings = StepSettings { cfl: 2.0, solver, time_stepping: TimeStepping::Global };
        for step in 0..5 {
            advance_implicit(&disc, &mut field, &settings, step).unwrap();
        }
        let after = field.totals(&mesh);
        assert!((after - before).amax() < 1e-13, "{}", (after - before).amax());
        let changed = field.q.iter().zip(&sine_field(&mesh).q).any(|(a, b)| (a - b).amax() > 1e-6);
        assert!(changed);
    }
}

#[test]
fn converged_field_is_fixed_point() {
    let mesh = box_mesh(2, Split::Tet, false, 0.1);
    let w = PrimitiveState::from_pressure(1.0, Vec3::new(0.3, 0.0, 0.1), 1.0 / G);
    let disc = Discretization::new(&mesh, ReconConfig::new(Scheme::Hweno), flux_cfg(), &farfield_specs(w)).unwrap();
    let mut field = Field::uniform(mesh.num_cells(), w.to_conserved(G), true);
    let settings = StepSettings::new(2.0, LinearSolver::Gmres(GmresOptions::default()));
    for step in 0..3 {
        let out = advance_implicit(&disc, &mut field, &settings, step).unwrap();
        assert!(out.increment_norm < 1e-12, "{}", out.increment_norm);
    }
    assert!(field.q.iter().all(|q| (q - w.to_conserved(G)).amax() < 1e-13));
    assert!(field.grads.unwrap().iter().all(|g| g.amax() < 1e-11));
}

#[test]
fn frechet_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let m = DMatrix::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
    let lin = |x: &[Conserved]| Ok(unflatten(&(&m * flatten(x))));
    let v = random_vec(4, 42);
    let zero = vec![Conserved::zeros(); 4];
    let d = frechet_matvec(lin, &zero, &v).unwrap();
    let exact = &m * flatten(&v);
    assert!(rel_dense(&d, &exact) < 1e-10);
    assert!(frechet_matvec(lin, &v, &zero).unwrap().iter().all(|x| x.amax() == 0.0));
    let q = random_vec(4, 43);
    assert!(rel_dense(&frechet_matvec(lin, &q, &v).unwrap(), &exact) < 1e-6);
}

#[test]
fn frechet_of_gks_residual_is_finite() {
    let mesh = box_mesh(3, Split::Hex, true, 0.0);
    let disc = Discretization::new(&mesh, ReconConfig::new(Scheme::Weno), flux_cfg(), &[]).unwrap();
    let field = sine_field(&mesh);
    let dts = disc.time_steps(&field, 2.0).unwrap();
    let l = |q: &[Conserved]| Ok(disc.residual(&Field { q: q.to_vec(), grads: None }, &dts)?.residual);
    let v = random_vec(mesh.num_cells(), 44);
    let d = frechet_matvec(l, &field.q, &v).unwrap();
    assert!(d.iter().all(|x| x.iter().all(|c| c.is_finite())));
    // the approximate operator points the same way as the true derivative
    let a = disc.jacobian(&field, &vec![f64::INFINITY; mesh.num_cells()]).unwrap();
    let av = a.spmv(&v);
    let c = dot(&av, &d) / (norm(&av) * norm(&d));
    assert!(c < -0.3, "{c}");
}

#[test]
fn discretization_validates_patches() {
    let mesh = box_mesh(1, Split::Hex, false, 0.0);
    let w = PrimitiveState::from_pressure(1.0, Vec3::zeros(), 1.0);
    let mut specs = farfield_specs(w);
    specs.pop();
    let err = Discretization::new(&mesh, ReconConfig::new(Scheme::Weno), flux_cfg(), &specs).err().unwrap();
    assert!(err.to_string().contains("zmax"));
    let mut specs = farfield_specs(w);
    specs.push(PatchSpec::new("nowhere", PatchKind::WallSlipAdiabatic));
    let err = Discretization::new(&mesh, ReconConfig::new(Scheme::Weno), flux_cfg(), &specs).err().unwrap();
    assert!(err.to_string().contains("nowhere"));
}

#[test]
fn residual_norm_definitions() {
    let r = vec![Conserved::new(1.0, 0.0, 0.0, 0.0, 0.0), Conserved::new(-3.0, 4.0, 0.0, 0.0, 0.0)];
    let (l1, l2) = residual_norms(&r);
    assert!((l1 - 2.0).abs() < 1e-15);
    assert!((l2 - (26.0f64 / 2.0).sqrt()).abs() < 1e-14);
}
