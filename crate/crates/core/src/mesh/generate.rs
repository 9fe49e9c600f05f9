use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mesh, RawMesh};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Hex,
    /// Six tetrahedra per box cell, sharing the main diagonal.
    Tet,
}

/// Axis-aligned box `[0, extent]` divided into `divisions` cells per axis.
///
/// Boundary patches are named `xmin`, `xmax`, `ymin`, `ymax`, `zmin`, `zmax`.
/// Periodic axes have their two patches paired. `perturb` moves interior
/// nodes by up to that fraction of the local spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub extent: [f64; 3],
    pub divisions: [usize; 3],
    pub split: Split,
    pub perturb: f64,
    pub seed: u64,
    pub periodic: [bool; 3],
}

impl BoxSpec {
    pub fn new(extent: [f64; 3], divisions: [usize; 3], split: Split) -> Self {
        Self {
            extent,
            divisions,
            split,
            perturb: 0.0,
            seed: 0,
            periodic: [false; 3],
        }
    }

    pub fn periodic_pairs(&self) -> Vec<(String, String)> {
        ["x", "y", "z"]
            .iter()
            .zip(self.periodic)
            .filter(|(_, p)| *p)
            .map(|(a, _)| (format!("{a}min"), format!("{a}max")))
            .collect()
    }
}

pub fn generate_box_raw(spec: &BoxSpec) -> Result<RawMesh> {
    if spec.extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Mesh(format!("box extent must be positive, got {:?}", spec.extent)));
    }
    if spec.divisions.iter().any(|&d| d == 0) {
        return Err(Error::Mesh(format!("box divisions must be >= 1, got {:?}", spec.divisions)));
    }
    if !(0.0..0.5).contains(&spec.perturb) {
        return Err(Error::Mesh(format!("perturbation {} outside [0, 0.5)", spec.perturb)));
    }
    let [nx, ny, nz] = spec.divisions;
    let h = [0, 1, 2].map(|i| spec.extent[i] / spec.divisions[i] as f64);
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let mut p = Vec3::new(i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]);
                let interior = i > 0 && i < nx && j > 0 && j < ny && k > 0 && k < nz;
                if spec.perturb > 0.0 && interior {
                    for a in 0..3 {
                        p[a] += rng.gen_range(-spec.perturb..spec.perturb) * h[a];
                    }
                }
                nodes.push(p);
            }
        }
    }

    let mut raw = RawMesh {
        nodes,
        ..Default::default()
    };
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let c = [
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ];
                match spec.split {
                    Split::Hex => raw.hexes.push(c),
                    Split::Tet => {
                        let corner = |a: usize, b: usize, d: usize| id(i + a, j + b, k + d);
                        let unit = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
                        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                            let e1 = unit[perm[0]];
                            let e2 = [e1[0] + unit[perm[1]][0], e1[1] + unit[perm[1]][1], e1[2] + unit[perm[1]][2]];
                            let mut t = [corner(0, 0, 0), corner(e1[0], e1[1], e1[2]), corner(e2[0], e2[1], e2[2]), corner(1, 1, 1)];
                            let p = t.map(|n| raw.nodes[n]);
                            if (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0]))) < 0.0 {
                                t.swap(1, 2);
                            }
                            raw.tets.push(t);
                        }
                    }
                }
            }
        }
    }

    // Boundary patches; node order does not matter for matching.
    let mut patch = |name: &str, faces: Vec<Vec<usize>>| raw.patches.push((name.to_string(), faces));
    let quad = |a, b, c, d| vec![a, b, c, d];
    let tri_split = |q: Vec<usize>| -> Vec<Vec<usize>> {
        // the diagonal through the lowest-index corner matches the Kuhn split
        let lo = (0..4).min_by_key(|&a| q[a]).unwrap();
        let r = |o: usize| q[(lo + o) % 4];
        vec![vec![r(0), r(1), r(2)], vec![r(0), r(2), r(3)]]
    };
    let faces_of = |f: &dyn Fn(usize, usize) -> Vec<usize>, n1: usize, n2: usize| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for b in 0..n2 {
            for a in 0..n1 {
                let q = f(a, b);
                match spec.split {
                    Split::Hex => out.push(q),
                    Split::Tet => out.extend(tri_split(q)),
                }
            }
        }
        out
    };
    let xmin = faces_of(&|a, b| quad(id(0, a, b), id(0, a + 1, b), id(0, a + 1, b + 1), id(0, a, b + 1)), ny, nz);
    let xmax = faces_of(&|a, b| quad(id(nx, a, b), id(nx, a + 1, b), id(nx, a + 1, b + 1), id(nx, a, b + 1)), ny, nz);
    let ymin = faces_of(&|a, b| quad(id(a, 0, b), id(a + 1, 0, b), id(a + 1, 0, b + 1), id(a, 0, b + 1)), nx, nz);
    let ymax = faces_of(&|a, b| quad(id(a, ny, b), id(a + 1, ny, b), id(a + 1, ny, b + 1), id(a, ny, b + 1)), nx, nz);
    let zmin = faces_of(&|a, b| quad(id(a, b, 0), id(a + 1, b, 0), id(a + 1, b + 1, 0), id(a, b + 1, 0)), nx, ny);
    let zmax = faces_of(&|a, b| quad(id(a, b, nz), id(a + 1, b, nz), id(a + 1, b + 1, nz), id(a, b + 1, nz)), nx, ny);
    patch("xmin", xmin);
    patch("xmax", xmax);
    patch("ymin", ymin);
    patch("ymax", ymax);
    patch("zmin", zmin);
    patch("zmax", zmax);
    Ok(raw)
}

/// Builds the box mesh described by `spec`.
pub fn generate_box_mesh(spec: &BoxSpec) -> Result<Mesh> {
    let raw = generate_box_raw(spec)?;
    Mesh::from_raw(&raw, &spec.periodic_pairs())
}
