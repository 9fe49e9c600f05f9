use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::mesh::{generate_box_mesh, BoxSpec, Split};
use crate::oracles::cell_average;

fn tet_mesh(n: usize, perturb: f64) -> Mesh {
    generate_box_mesh(&BoxSpec { perturb, seed: 11, ..BoxSpec::new([1.0; 3], [n; 3], Split::Tet) }).unwrap()
}

fn hex_mesh(n: usize) -> Mesh {
    generate_box_mesh(&BoxSpec::new([1.0; 3], [n; 3], Split::Hex)).unwrap()
}

/// Cell averages of a scalar field placed in every component.
fn averages(mesh: &Mesh, f: impl Fn(&Vec3) -> f64 + Copy) -> Vec<Conserved> {
    mesh.cells
        .iter()
        .map(|c| {
            let v = cell_average(&mesh.nodes, c, 5, f);
            Conserved::from_element(v)
        })
        .collect()
}

fn gradients(mesh: &Mesh, g: impl Fn(&Vec3) -> Vec3 + Copy) -> Vec<Gradient> {
    mesh.cells
        .iter()
        .map(|c| {
            let mut out = Gradient::zeros();
            for j in 0..3 {
                let v = cell_average(&mesh.nodes, c, 5, |x| g(x)[j]);
                for k in 0..5 {
                    out[(j, k)] = v;
                }
            }
            out
        })
        .collect()
}

fn interior(mesh: &Mesh, r: &Reconstructor) -> Vec<usize> {
    (0..mesh.num_cells()).filter(|&c| matches!(r.ops[c], CellOps::Weno { .. })).collect()
}

#[test]
fn free_stream_is_exact() {
    let q0 = Conserved::new(1.3, 0.2, -0.4, 0.1, 2.9);
    for mesh in [tet_mesh(3, 0.2), hex_mesh(3)] {
        for scheme in [Scheme::Weno, Scheme::Hweno] {
            let r = Reconstructor::new(&mesh, ReconConfig::new(scheme));
            let q = vec![q0; mesh.num_cells()];
            let g = vec![Gradient::zeros(); mesh.num_cells()];
            let polys = r.reconstruct(&q, Some(&g)).unwrap();
            for f in &mesh.faces {
                for qp in &f.quad {
                    let (v, d) = polys[f.owner].eval(&qp.pos);
                    assert_eq!(v, q0);
                    assert!(d.amax() == 0.0);
                }
            }
        }
    }
}

#[test]
fn weno_quadratic_exact_on_interior_hex() {
    let mesh = hex_mesh(4);
    let f = |x: &Vec3| x.x * x.x + x.y;
    let q = averages(&mesh, f);
    let mut cfg = ReconConfig::new(Scheme::Weno);
    cfg.nonlinear = false;
    let r = Reconstructor::new(&mesh, cfg);
    let cells = interior(&mesh, &r);
    assert!(!cells.is_empty());
    for &c in &cells {
        let p = r.reconstruct_cell(c, &q, None);
        for &fi in &mesh.cells[c].faces {
            for qp in &mesh.faces[fi].quad {
                assert!((p.value(&qp.pos)[0] - f(&qp.pos)).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn weno_quadratic_exact_on_perturbed_tets() {
    let mesh = tet_mesh(4, 0.2);
    let f = |x: &Vec3| 0.5 * x.x * x.z - x.y * x.y + 2.0 * x.z + 1.0;
    let q = averages(&mesh, f);
    let mut cfg = ReconConfig::new(Scheme::Weno);
    cfg.nonlinear = false;
    let r = Reconstructor::new(&mesh, cfg);
    let cells = interior(&mesh, &r);
    assert!(cells.len() > 10);
    for &c in &cells {
        let p = r.reconstruct_cell(c, &q, None);
        let x = mesh.cells[c].centroid + Vec3::new(0.01, -0.02, 0.015);
        assert!((p.value(&x)[0] - f(&x)).abs() < 1e-11);
    }
}

#[test]
fn hweno_quadratic_exact() {
    let f = |x: &Vec3| x.x * x.x + x.y * x.z;
    let g = |x: &Vec3| Vec3::new(2.0 * x.x, x.z, x.y);
    for mesh in [hex_mesh(3), tet_mesh(3, 0.2)] {
        let q = averages(&mesh, f);
        let gr = gradients(&mesh, g);
        let mut cfg = ReconConfig::new(Scheme::Hweno);
        cfg.nonlinear = false;
        let r = Reconstructor::new(&mesh, cfg);
        let cells = interior(&mesh, &r);
        assert!(!cells.is_empty());
        for &c in &cells {
            let p = r.reconstruct_cell(c, &q, Some(&gr));
            for &fi in &mesh.cells[c].faces {
                for qp in &mesh.faces[fi].quad {
                    assert!((p.value(&qp.pos)[0] - f(&qp.pos)).abs() < 1e-11);
                    let d = p.gradient(&qp.pos);
                    assert!((d[(0, 0)] - g(&qp.pos).x).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn candidates_keep_the_cell_mean() {
    let mesh = tet_mesh(3, 0.2);
    let f = |x: &Vec3| (3.0 * x.x).sin() + x.y * x.z;
    let q = averages(&mesh, f);
    let mut gr = gradients(&mesh, |x| Vec3::new(3.0 * (3.0 * x.x).cos(), x.z, x.y));
    for scheme in [Scheme::Weno, Scheme::Hweno] {
        let r = Reconstructor::new(&mesh, ReconConfig::new(scheme));
        for c in 0..mesh.num_cells() {
            let p = r.reconstruct_cell(c, &q, Some(&gr));
            let avg = cell_average(&mesh.nodes, &mesh.cells[c], 4, |x| p.value(x)[0]);
            assert!((avg - q[c][0]).abs() < 1e-13, "cell {c}");
        }
    }
    // perturbing a neighbor's gradient leaves the target mean intact
    let r = Reconstructor::new(&mesh, ReconConfig::new(Scheme::Hweno));
    let c = interior(&mesh, &r)[0];
    let nb = mesh.neighbors(c).into_iter().flatten().next().unwrap().cell;
    gr[nb][(1, 0)] += 0.7;
    let p = r.reconstruct_cell(c, &q, Some(&gr));
    let avg = cell_average(&mesh.nodes, &mesh.cells[c], 4, |x| p.value(x)[0]);
    assert!((avg - q[c][0]).abs() < 1e-13);
}

#[test]
fn linear_candidates_recover_gradient() {
    let mesh = tet_mesh(4, 0.2);
    let grad = Vec3::new(1.0, 2.0, 3.0);
    let q = averages(&mesh, |x| 0.3 + grad.dot(x));
    let gr = gradients(&mesh, |_| grad);
    for scheme in [Scheme::Weno, Scheme::Hweno] {
        let r = Reconstructor::new(&mesh, ReconConfig::new(scheme));
        for c in interior(&mesh, &r) {
            let CellOps::Weno { subs, .. } = &r.ops[c] else { unreachable!() };
            for s in subs {
                let b = s.solve(c, &q, Some(&gr));
                for j in 0..3 {
                    assert!((b[(j, 0)] / r.bases[c].h - grad[j]).abs() < 1e-11);
                }
                assert!(b.rows(3, 6).amax() == 0.0);
            }
        }
    }
}

#[test]
fn hweno_pair_matches_dense_least_squares() {
    let mesh = tet_mesh(2, 0.1);
    let r = Reconstructor::new(&mesh, ReconConfig::new(Scheme::Hweno));
    let c = (0..mesh.num_cells()).find(|&c| mesh.neighbors(c).iter().flatten().count() >= 2).unwrap();
    let mut q = vec![Conserved::from_element(1.0); mesh.num_cells()];
    let nb = mesh.neighbors(c).into_iter().flatten().next().unwrap().cell;
    q[nb] = Conserved::from_element(1.5);
    let gr = vec![Gradient::zeros(); mesh.num_cells()];

    // brute force: minimise the residual of all seven equations directly
    let (c0, h0) = (mesh.cells[c].centroid, mesh.cells[c].h);
    let (ck, hk) = (mesh.cells[nb].centroid, mesh.cells[nb].h);
    let mut a = DMatrix::<f64>::zeros(7, 3);
    let mut rhs = nalgebra::DVector::<f64>::zeros(7);
    for j in 0..3 {
        a[(j, j)] = h0;
        a[(3 + j, j)] = hk;
        a[(6, j)] = ck[j] - c0[j];
    }
    rhs[6] = 0.5;
    let g = a.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();

    let basis = &r.bases[c];
    let sub = match &r.ops[c] {
        CellOps::Weno { subs, .. } => subs.iter().find(|s| s.rows.iter().any(|row| row.cell == nb)).unwrap().clone(),
        _ => panic!("expected nonlinear ops"),
    };
    let b = sub.solve(c, &q, Some(&gr));
    for j in 0..3 {
        assert!((b[(j, 0)] / basis.h - g[j]).abs() < 1e-12, "{} vs {}", b[(j, 0)] / basis.h, g[j]);
    }
}

#[test]
fn smoothness_of_linear_polynomial() {
    let mesh = tet_mesh(2, 0.0);
    let cell = &mesh.cells[5];
    let basis = LocalBasis::for_cell(cell);
    let g = Vec3::new(0.3, -1.0, 2.0);
    let a: [f64; NQ] = std::array::from_fn(|d| if d < 3 { g[d] * basis.h } else { 0.0 });
    let beta = smoothness_indicator(&a, &basis.m2, false);
    let expect = cell.volume.powf(2.0 / 3.0) * g.norm_squared();
    assert!((beta - expect).abs() < 1e-14 * expect);
    assert_eq!(smoothness_indicator(&[0.0; NQ], &basis.m2, true), 0.0);
}

#[test]
fn smoothness_of_quadratic_matches_quadrature() {
    let mesh = tet_mesh(2, 0.2);
    for c in [0, 7, 30] {
        let cell = &mesh.cells[c];
        let basis = LocalBasis::for_cell(cell);
        let a = [0.3, -0.2, 0.5, 1.1, -0.7, 0.4, 0.9, -1.3, 0.6];
        let mut coeffs = Coeffs::zeros();
        for d in 0..NQ {
            coeffs[(d, 0)] = a[d];
        }
        let p = CellPoly { mean: Conserved::zeros(), coeffs, basis: basis.clone() };
        let vol = cell.volume;
        // definition in physical coordinates, second derivatives by differencing
        let mut beta = 0.0;
        for j in 0..3 {
            beta += vol.powf(-1.0 / 3.0) * vol * cell_average(&mesh.nodes, cell, 4, |x| p.gradient(x)[(j, 0)].powi(2));
        }
        let e = 1e-3;
        let x0 = cell.centroid;
        for (j, k) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
            let mut dx = Vec3::zeros();
            dx[k] = e;
            let d2 = (p.gradient(&(x0 + dx))[(j, 0)] - p.gradient(&(x0 - dx))[(j, 0)]) / (2.0 * e);
            beta += vol.powf(1.0 / 3.0) * vol * d2 * d2;
        }
        let got = smoothness_indicator(&a, &basis.m2, true);
        assert!((got - beta).abs() < 1e-9 * beta, "{got} vs {beta}");
    }
}

#[test]
fn combine_with_linear_weights_returns_big_polynomial() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let subs = vec![[0.5, -1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]; 4];
    let g = linear_weights(4, 0.025);
    assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    let out = combine(&a, &subs, &g, &g);
    for d in 0..NQ {
        assert!((out[d] - a[d]).abs() < 1e-13);
    }
    let mut w = vec![0.0; 5];
    w[0] = 1.0;
    let out = combine(&a, &subs, &w, &g);
    for d in 0..3 {
        let expect = a[d] / g[0] - subs.iter().map(|b| g[1] / g[0] * b[d]).sum::<f64>();
        assert!((out[d] - expect).abs() < 1e-12);
    }
}

#[test]
fn step_data_stays_within_candidates() {
    let mesh = hex_mesh(6);
    let q: Vec<Conserved> = mesh
        .cells
        .iter()
        .map(|c| Conserved::from_element(if c.centroid.x < 0.5 { 1.0 } else { 0.1 }))
        .collect();
    let r = Reconstructor::new(&mesh, ReconConfig::new(Scheme::Weno));
    for c in interior(&mesh, &r) {
        let CellOps::Weno { big, subs } = &r.ops[c] else { unreachable!() };
        let p = r.reconstruct_cell(c, &q, None);
        let a = big.solve(c, &q, None);
        let cands: Vec<CellPoly> = std::iter::once(a)
            .chain(subs.iter().map(|s| s.solve(c, &q, None)))
            .map(|k| CellPoly { mean: q[c], coeffs: k, basis: r.bases[c].clone() })
            .collect();
        for &fi in &mesh.cells[c].faces {
            for qp in &mesh.faces[fi].quad {
                let v = p.value(&qp.pos)[0];
                let lo = cands.iter().map(|k| k.value(&qp.pos)[0]).fold(f64::INFINITY, f64::min);
                let hi = cands.iter().map(|k| k.value(&qp.pos)[0]).fold(f64::NEG_INFINITY, f64::max);
                assert!(v >= lo - 1e-3 && v <= hi + 1e-3, "cell {c}: {v} not in [{lo}, {hi}]");
                assert!(v > 0.05 && v < 1.05, "cell {c}: overshoot {v}");
            }
        }
    }
}

#[test]
fn gauss_gradient_is_exact_for_linear_fields() {
    let g = Vec3::new(-0.4, 1.7, 0.25);
    let warped = generate_box_mesh(&BoxSpec { perturb: 0.3, seed: 4, ..BoxSpec::new([1.0; 3], [3; 3], Split::Hex) }).unwrap();
    for mesh in [tet_mesh(3, 0.25), hex_mesh(2), warped] {
        let fv: Vec<Vec<Conserved>> = mesh
            .faces
            .iter()
            .map(|f| f.quad.iter().map(|qp| Conserved::from_element(2.0 + g.dot(&qp.pos))).collect())
            .collect();
        let grads = gauss_gradients(&mesh, &fv);
        for gr in &grads {
            for j in 0..3 {
                assert!((gr[(j, 3)] - g[j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn weno_face_values_converge_at_third_order() {
    let f = |x: &Vec3| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x.x).sin();
    let mut errs = Vec::new();
    for n in [8, 16] {
        let spec = BoxSpec { periodic: [true; 3], ..BoxSpec::new([1.0; 3], [n; 3], Split::Hex) };
        let mesh = generate_box_mesh(&spec).unwrap();
        let q = averages(&mesh, f);
        let r = Reconstructor::new(&mesh, ReconConfig::new(Scheme::Weno));
        let polys = r.reconstruct(&q, None).unwrap();
        let (mut e, mut w) = (0.0, 0.0);
        for face in &mesh.faces {
            for qp in &face.quad {
                e += (polys[face.owner].value(&qp.pos)[0] - f(&qp.pos)).abs() * qp.weight * face.area;
                w += qp.weight * face.area;
            }
        }
        errs.push(e / w);
    }
    let order = (errs[0] / errs[1]).log2();
    assert!(order >= 2.5, "observed order {order} from {errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weights_are_a_partition(betas in prop::collection::vec(0.0..10.0f64, 2..9)) {
        let g = linear_weights(betas.len() - 1, 0.025);
        let w = nonlinear_weights(&betas, &g, 1e-6);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn random_linear_field_is_reproduced(gx in -2.0..2.0f64, gy in -2.0..2.0f64, gz in -2.0..2.0f64, seed in 0u64..1000) {
        let mesh = generate_box_mesh(&BoxSpec { perturb: 0.2, seed, ..BoxSpec::new([1.0; 3], [3; 3], Split::Tet) }).unwrap();
        let g = Vec3::new(gx, gy, gz);
        let q: Vec<Conserved> = mesh.cells.iter().map(|c| Conserved::from_element(1.0 + g.dot(&c.centroid))).collect();
        let gr: Vec<Gradient> = vec![Gradient::from_fn(|j, _| g[j]); mesh.num_cells()];
        for scheme in [Scheme::Weno, Scheme::Hweno] {
            let r = Reconstructor::new(&mesh, ReconConfig::new(scheme));
            for c in 0..mesh.num_cells() {
                if matches!(r.ops[c], CellOps::Constant) { continue; }
                let p = r.reconstruct_cell(c, &q, Some(&gr));
                let x = mesh.faces[mesh.cells[c].faces[0]].centroid;
                prop_assert!((p.value(&x)[2] - 1.0 - g.dot(&x)).abs() < 1e-11);
            }
        }
    }
}
