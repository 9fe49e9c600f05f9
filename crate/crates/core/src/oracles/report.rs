use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dense_solve, fd_jacobian, flatten, moment_quadrature, time_quadrature_flux};
use crate::flux::{evolve_flux, kfvs_flux, InterfaceReconstruction};
use crate::implicit::{euler_jacobian, gmres_solve, interface_spectral_radius, BlockJacobian, BlockRow, GmresOptions};
use crate::kinetic::{build_moments, pressure, Half, PrimitiveState, U_ORDER, VW_ORDER, XI_ORDER};
use crate::{Block5, Conserved, Error, Result, Vec3};

pub const DEFAULT_SEED: u64 = 20240917;
const GAMMA: f64 = 1.4;

/// One comparison: the worst case of a group of production values against
/// their references.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub oracle: String,
    pub case: String,
    pub value: f64,
    pub reference: f64,
    pub relerr: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_relerr(&self, oracle: &str) -> f64 {
        self.rows.iter().filter(|r| r.oracle == oracle).map(|r| r.relerr).fold(0.0, f64::max)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "oracle,case,value,reference,relerr,pass")?;
        for r in &self.rows {
            writeln!(f, "{},{},{:.16e},{:.16e},{:.3e},{}", r.oracle, r.case, r.value, r.reference, r.relerr, r.pass)?;
        }
        Ok(())
    }
}

/// Tracks the worst relative error of a group.
struct Worst {
    oracle: &'static str,
    case: String,
    tolerance: f64,
    floor: f64,
    row: Option<(f64, f64, f64)>,
}

impl Worst {
    fn new(oracle: &'static str, case: impl Into<String>, tolerance: f64, floor: f64) -> Self {
        Worst { oracle, case: case.into(), tolerance, floor, row: None }
    }

    fn add(&mut self, value: f64, reference: f64) {
        let e = (value - reference).abs() / reference.abs().max(self.floor);
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if self.row.is_none_or(|r| e > r.2) {
            self.row = Some((value, reference, e));
        }
    }

    fn finish(self) -> OracleRow {
        let (value, reference, relerr) = self.row.unwrap_or((0.0, 0.0, 0.0));
        OracleRow {
            oracle: self.oracle.into(),
            case: self.case,
            value,
            reference,
            relerr,
            tolerance: self.tolerance,
            pass: relerr <= self.tolerance,
        }
    }
}

fn random_primitive(rng: &mut ChaCha8Rng) -> PrimitiveState {
    PrimitiveState::from_pressure(
        rng.gen_range(0.3..3.0),
        Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        rng.gen_range(0.2..3.0),
    )
}

/// Tabulated moments against direct quadrature over `states` random states.
pub fn moments_suite(seed: u64, states: usize) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<Worst> = Vec::new();
    let mut full = Worst::new("moments", format!("u full p<={U_ORDER}"), 1e-9, 1e-3);
    let mut pos = Worst::new("moments", format!("u positive p<={U_ORDER}"), 1e-9, 1e-3);
    let mut neg = Worst::new("moments", format!("u negative p<={U_ORDER}"), 1e-9, 1e-3);
    let mut vw = Worst::new("moments", format!("v w q<={VW_ORDER}"), 1e-9, 1e-3);
    let mut xi = Worst::new("moments", format!("xi s<={XI_ORDER}"), 1e-9, 1e-3);
    for _ in 0..states {
        let w = random_primitive(&mut rng);
        let t = build_moments(&w, GAMMA)?;
        for p in 0..=U_ORDER {
            full.add(t.scalar(Half::Full, p, 0, 0, 0), moment_quadrature(&w, p, 0, 0, 0, Half::Full, GAMMA)?);
            pos.add(t.scalar(Half::Positive, p, 0, 0, 0), moment_quadrature(&w, p, 0, 0, 0, Half::Positive, GAMMA)?);
            neg.add(t.scalar(Half::Negative, p, 0, 0, 0), moment_quadrature(&w, p, 0, 0, 0, Half::Negative, GAMMA)?);
        }
        for q in 0..=VW_ORDER {
            vw.add(t.scalar(Half::Full, 0, q, 0, 0), moment_quadrature(&w, 0, q, 0, 0, Half::Full, GAMMA)?);
            vw.add(t.scalar(Half::Full, 0, 0, q, 0), moment_quadrature(&w, 0, 0, q, 0, Half::Full, GAMMA)?);
        }
        for s in 0..=XI_ORDER {
            xi.add(t.scalar(Half::Full, 0, 0, 0, s), moment_quadrature(&w, 0, 0, 0, s, Half::Full, GAMMA)?);
        }
    }
    groups.extend([full, pos, neg, vw, xi]);
    Ok(OracleReport { rows: groups.into_iter().map(Worst::finish).collect() })
}

fn random_interface(rng: &mut ChaCha8Rng) -> Result<InterfaceReconstruction> {
    let mut side = || {
        let q = PrimitiveState::from_pressure(
            rng.gen_range(0.5..2.0),
            Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.4..2.0),
        )
        .to_conserved(GAMMA);
        let dq = [0, 1, 2].map(|_| Conserved::from_fn(|k, _| rng.gen_range(-0.3..0.3) * q[k].abs().max(0.2)));
        (q, dq)
    };
    let (ql, dl) = side();
    let (qr, dr) = side();
    InterfaceReconstruction::new(&ql, &dl, &qr, &dr, GAMMA)
}

/// Analytic time integration against time quadrature, and the
/// collisionless limit against the KFVS flux.
pub fn flux_suite(seed: u64, configs: usize) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quad = Worst::new("time_quadrature_flux", format!("{configs} random interfaces"), 1e-8, 1.0);
    let mut kfvs = Worst::new("kfvs_limit", format!("{configs} random states tau/dt=1e6"), 1e-6, 1.0);
    for i in 0..configs {
        let ir = random_interface(&mut rng)?;
        let dt: f64 = rng.gen_range(1e-3..0.1);
        let tau = dt * [1e-3, 0.1, 0.5, 2.0, 50.0][i % 5];
        let f = evolve_flux(&ir, tau, dt);
        let o = time_quadrature_flux(&ir, tau, dt);
        let scale = o.amax();
        for k in 0..5 {
            // component errors relative to the flux magnitude
            quad.add(f[k] / scale, o[k] / scale);
        }
        let mut moderate = || {
            PrimitiveState::from_pressure(
                rng.gen_range(0.5..2.0),
                Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
                rng.gen_range(0.5..2.0),
            )
        };
        let wl = moderate();
        let wr = moderate();
        let zero = [Conserved::zeros(); 3];
        let ir = InterfaceReconstruction::new(&wl.to_conserved(GAMMA), &zero, &wr.to_conserved(GAMMA), &zero, GAMMA)?;
        let f = evolve_flux(&ir, 1e6 * dt, dt);
        let k = kfvs_flux(&wl, &wr, GAMMA)?;
        let scale = k.amax();
        for c in 0..5 {
            kfvs.add(f[c] / scale, k[c] / scale);
        }
    }
    Ok(OracleReport { rows: vec![quad.finish(), kfvs.finish()] })
}

fn normal_flux(q: &Conserved, n: &Vec3) -> Conserved {
    let p = pressure(q, GAMMA);
    let un = (q[1] * n.x + q[2] * n.y + q[3] * n.z) / q[0];
    Conserved::new(q[0] * un, q[1] * un + p * n.x, q[2] * un + p * n.y, q[3] * un + p * n.z, (q[4] + p) * un)
}

fn block_err(w: &mut Worst, a: &Block5, b: &Block5) {
    let scale = b.amax();
    for (x, y) in a.iter().zip(b.iter()) {
        w.add(x / scale, y / scale);
    }
}

/// Analytic and Roe-split Jacobian blocks against central differences.
pub fn jacobian_suite(seed: u64, states: usize) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut euler = Worst::new("fd_jacobian", format!("euler normal flux, {states} states"), 1e-5, 1.0);
    let mut diag = Worst::new("fd_jacobian", format!("roe split own block, {states} states"), 1e-5, 1.0);
    let mut off = Worst::new("fd_jacobian", format!("roe split neighbour block, {states} states"), 1e-5, 1.0);
    let mut sum = Worst::new("fd_jacobian", "split halves sum to J".to_string(), 1e-12, 1.0);
    let mut linear = Worst::new("fd_jacobian", "linear map".to_string(), 1e-8, 1.0);
    for _ in 0..states {
        let qi = random_primitive(&mut rng).to_conserved(GAMMA);
        let qj = random_primitive(&mut rng).to_conserved(GAMMA);
        let n = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
        let s = rng.gen_range(0.1..2.0);
        let j = euler_jacobian(&qi, &n, GAMMA);
        block_err(&mut euler, &fd_jacobian(|q| normal_flux(q, &n), &qi, h), &j);
        let lam = interface_spectral_radius(&qi, &qj, &n, GAMMA)?;
        let d = (j + Block5::identity() * lam) * (0.5 * s);
        let b = (euler_jacobian(&qj, &n, GAMMA) - Block5::identity() * lam) * (0.5 * s);
        block_err(&mut diag, &d, &fd_jacobian(|q| (normal_flux(q, &n) + q * lam) * (0.5 * s), &qi, h));
        block_err(&mut off, &b, &fd_jacobian(|q| (normal_flux(q, &n) - q * lam) * (0.5 * s), &qj, h));
        let lam_ii = interface_spectral_radius(&qi, &qi, &n, GAMMA)?;
        let halves = (j + Block5::identity() * lam_ii) * 0.5 + (j - Block5::identity() * lam_ii) * 0.5;
        block_err(&mut sum, &halves, &j);
        let m = Block5::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        block_err(&mut linear, &fd_jacobian(|q| m * q, &qi, h), &m);
    }
    Ok(OracleReport { rows: vec![euler.finish(), diag.finish(), off.finish(), sum.finish(), linear.finish()] })
}

/// Dense direct solves, and GMRES against them.
pub fn dense_suite(seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let b = DVector::from_fn(10, |_, _| rng.gen_range(-1.0..1.0));
    let x = dense_solve(&DMatrix::identity(10, 10), &b)?;
    let mut w = Worst::new("dense_solve", "identity", 1e-15, 1e-12);
    x.iter().zip(b.iter()).for_each(|(a, r)| w.add(*a, *r));
    rows.push(w.finish());

    let r = DMatrix::from_fn(200, 200, |_, _| rng.gen_range(-1.0..1.0));
    let spd = &r * r.transpose() + DMatrix::identity(200, 200);
    let b = DVector::from_fn(200, |_, _| rng.gen_range(-1.0..1.0));
    let x = dense_solve(&spd, &b)?;
    let res = (&spd * &x - &b).amax();
    rows.push(OracleRow {
        oracle: "dense_solve".into(),
        case: "random spd 200 residual".into(),
        value: res,
        reference: 0.0,
        relerr: res,
        tolerance: 1e-12,
        pass: res <= 1e-12,
    });

    let mut sing = DMatrix::identity(5, 5);
    sing[(2, 2)] = 0.0;
    let refused = matches!(dense_solve(&sing, &DVector::from_element(5, 1.0)), Err(Error::Singular(_)));
    rows.push(OracleRow {
        oracle: "dense_solve".into(),
        case: "singular refused".into(),
        value: if refused { 1.0 } else { 0.0 },
        reference: 1.0,
        relerr: if refused { 0.0 } else { 1.0 },
        tolerance: 0.0,
        pass: refused,
    });

    // GMRES on a random 50-cell nonsymmetric block system
    let n = 50;
    let a = BlockJacobian {
        rows: (0..n)
            .map(|i| {
                let mut nb: Vec<usize> = (0..4).map(|_| rng.gen_range(0..n)).filter(|&j| j != i).collect();
                nb.sort_unstable();
                nb.dedup();
                BlockRow {
                    diag: Block5::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + Block5::identity() * 4.0,
                    off: nb.into_iter().map(|j| (j, Block5::from_fn(|_, _| rng.gen_range(-1.0..1.0)))).collect(),
                }
            })
            .collect(),
    };
    let b: Vec<Conserved> = (0..n).map(|_| Conserved::from_fn(|_, _| rng.gen_range(-1.0..1.0))).collect();
    let opts = GmresOptions { krylov_dim: 30, restarts: 10, jacobi_iters: 2, rtol: 1e-14, check_orthogonality: true };
    let rep = gmres_solve(&a, &b, &opts)?;
    let exact = dense_solve(&a.to_dense(), &flatten(&b))?;
    let scale = exact.amax();
    let mut w = Worst::new("gmres_vs_dense", "50-cell block system m=30", 1e-8, 1e-12);
    flatten(&rep.x).iter().zip(exact.iter()).for_each(|(x, y)| w.add(x / scale, y / scale));
    rows.push(w.finish());
    rows.push(OracleRow {
        oracle: "gmres_vs_dense".into(),
        case: "arnoldi orthogonality".into(),
        value: rep.orthogonality,
        reference: 0.0,
        relerr: rep.orthogonality,
        tolerance: 1e-10,
        pass: rep.orthogonality <= 1e-10,
    });
    Ok(OracleReport { rows })
}

/// Runs a named suite: `moments`, `flux`, `jacobian`, `dense` or `all`.
pub fn run_suite(name: &str, seed: u64) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    let mut add = |r: OracleReport| report.rows.extend(r.rows);
    match name {
        "moments" => add(moments_suite(seed, 200)?),
        "flux" => add(flux_suite(seed, 50)?),
        "jacobian" => add(jacobian_suite(seed, 20)?),
        "dense" => add(dense_suite(seed)?),
        "all" => {
            add(moments_suite(seed, 200)?);
            add(flux_suite(seed, 50)?);
            add(jacobian_suite(seed, 20)?);
            add(dense_suite(seed)?);
        }
        _ => return Err(Error::Config(format!("unknown oracle suite '{name}' (moments, flux, jacobian, dense, all)"))),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass_and_are_reproducible() {
        let a = moments_suite(3, 5).unwrap();
        assert!(a.all_pass(), "{a}");
        assert_eq!(a, moments_suite(3, 5).unwrap());
        let f = flux_suite(3, 10).unwrap();
        assert!(f.all_pass(), "{f}");
        let j = jacobian_suite(3, 5).unwrap();
        assert!(j.all_pass(), "{j}");
        let d = dense_suite(3).unwrap();
        assert!(d.all_pass(), "{d}");
        let text = d.to_string();
        assert!(text.starts_with("oracle,case,value,reference,relerr,pass\n"));
        assert!(run_suite("nope", 1).is_err());
    }
}
