//! Unstructured tetrahedral/hexahedral meshes.
//!
//! A [`Mesh`] is immutable once built and carries everything reconstruction
//! and flux quadrature need: cell volumes and moments, oriented faces with
//! local frames and quadrature points, boundary patches, periodic pairings
//! and the WENO/HWENO stencil table.

mod generate;
pub mod geometry;
mod io;
pub mod stencil;

use std::collections::HashMap;

use nalgebra::Matrix3;

pub use generate::{generate_box_mesh, generate_box_raw, BoxSpec, Split};
pub use geometry::{face_quadrature, Frame, QuadPoint};
pub use io::{format_raw, load_mesh, load_raw, parse_raw, write_mesh, write_raw};
pub use stencil::{build_stencils, CellStencils, StencilEntry, StencilTable};

use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Tetrahedron,
    Hexahedron,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub kind: CellKind,
    pub nodes: Vec<usize>,
    pub volume: f64,
    pub centroid: Vec3,
    /// `avg over the cell of (x - c)(x - c)^T`.
    pub second_moment: Matrix3<f64>,
    /// Faces in local order (see [`TET_FACES`] and [`HEX_FACES`]).
    pub faces: Vec<usize>,
    /// `volume^(1/3)`.
    pub h: f64,
}

/// Local tetrahedron faces, outward for positively oriented cells.
pub const TET_FACES: [[usize; 3]; 4] = [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];

/// Local hexahedron faces in VTK node order: bottom, the four sides as a
/// ring, then top. Opposite faces are 0/5, 1/3 and 2/4.
pub const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
    [4, 5, 6, 7],
];

/// What lies across a face from its owner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    /// Another cell; `shift` translates that cell's geometry next to the owner
    /// (zero except across periodic boundaries).
    Cell { id: usize, shift: Vec3 },
    Boundary { patch: usize },
}

#[derive(Debug, Clone)]
pub struct Face {
    pub nodes: Vec<usize>,
    pub owner: usize,
    pub neighbor: Neighbor,
    pub area: f64,
    /// Unit normal pointing out of the owner.
    pub normal: Vec3,
    pub frame: Frame,
    pub centroid: Vec3,
    pub quad: Vec<QuadPoint>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.neighbor, Neighbor::Boundary { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub name: String,
    pub faces: Vec<usize>,
}

/// Connectivity as read from or written to a mesh file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawMesh {
    pub nodes: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
    pub hexes: Vec<[usize; 8]>,
    pub patches: Vec<(String, Vec<Vec<usize>>)>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Vec3>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub patches: Vec<Patch>,
    pub stencils: StencilTable,
}

/// Name of the patch collecting boundary faces not listed in the input.
pub const DEFAULT_PATCH: &str = "default";

fn face_key(nodes: &[usize]) -> [usize; 4] {
    let mut k = [usize::MAX; 4];
    k[..nodes.len()].copy_from_slice(nodes);
    k.sort_unstable();
    k
}

fn quantize(v: &Vec3, scale: f64) -> [i64; 3] {
    [0, 1, 2].map(|i| (v[i] / scale * 1e7).round() as i64)
}

impl Mesh {
    /// Builds a mesh, pairing the named patches periodically.
    pub fn from_raw(raw: &RawMesh, periodic: &[(String, String)]) -> Result<Mesh> {
        let n_nodes = raw.nodes.len();
        if raw.nodes.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Mesh("non-finite node coordinate".into()));
        }
        let check = |ids: &[usize]| -> Result<()> {
            match ids.iter().find(|&&i| i >= n_nodes) {
                Some(i) => Err(Error::Mesh(format!("node id {i} out of range ({n_nodes} nodes)"))),
                None => Ok(()),
            }
        };

        let mut cells = Vec::with_capacity(raw.tets.len() + raw.hexes.len());
        for t in &raw.tets {
            check(t)?;
            let p = t.map(|i| raw.nodes[i]);
            let g = geometry::tet_geometry(&p)
                .map_err(|e| Error::Mesh(format!("cell {}: {e}", cells.len())))?;
            cells.push(Cell {
                kind: CellKind::Tetrahedron,
                nodes: t.to_vec(),
                volume: g.volume,
                centroid: g.centroid,
                second_moment: g.second_moment,
                faces: Vec::with_capacity(4),
                h: g.volume.cbrt(),
            });
        }
        for hx in &raw.hexes {
            check(hx)?;
            let p = hx.map(|i| raw.nodes[i]);
            let g = geometry::hex_geometry(&p)
                .map_err(|e| Error::Mesh(format!("cell {}: {e}", cells.len())))?;
            cells.push(Cell {
                kind: CellKind::Hexahedron,
                nodes: hx.to_vec(),
                volume: g.volume,
                centroid: g.centroid,
                second_moment: g.second_moment,
                faces: Vec::with_capacity(6),
                h: g.volume.cbrt(),
            });
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<[usize; 4], usize> = HashMap::new();
        for ci in 0..cells.len() {
            let local: Vec<Vec<usize>> = match cells[ci].kind {
                CellKind::Tetrahedron => TET_FACES
                    .iter()
                    .map(|f| f.iter().map(|&a| cells[ci].nodes[a]).collect())
                    .collect(),
                CellKind::Hexahedron => HEX_FACES
                    .iter()
                    .map(|f| f.iter().map(|&a| cells[ci].nodes[a]).collect())
                    .collect(),
            };
            for fnodes in local {
                let key = face_key(&fnodes);
                match lookup.get(&key) {
                    Some(&fi) => {
                        let f = &mut faces[fi];
                        if !f.is_boundary() {
                            return Err(Error::Mesh(format!(
                                "non-conforming face {fnodes:?} shared by more than two cells"
                            )));
                        }
                        if f.owner == ci {
                            return Err(Error::Mesh(format!("cell {ci} repeats face {fnodes:?}")));
                        }
                        f.neighbor = Neighbor::Cell { id: ci, shift: Vec3::zeros() };
                        cells[ci].faces.push(fi);
                    }
                    None => {
                        let pts: Vec<Vec3> = fnodes.iter().map(|&i| raw.nodes[i]).collect();
                        let g = geometry::face_geometry(&pts)?;
                        lookup.insert(key, faces.len());
                        cells[ci].faces.push(faces.len());
                        faces.push(Face {
                            nodes: fnodes,
                            owner: ci,
                            neighbor: Neighbor::Boundary { patch: usize::MAX },
                            area: g.area,
                            normal: g.normal,
                            frame: Frame::from_normal(g.normal),
                            centroid: g.centroid,
                            quad: g.quad,
                        });
                    }
                }
            }
        }

        // Boundary patches.
        let mut patches: Vec<Patch> = Vec::new();
        for (name, list) in &raw.patches {
            if patches.iter().any(|p| &p.name == name) {
                return Err(Error::Mesh(format!("duplicate patch name {name:?}")));
            }
            let pid = patches.len();
            let mut ids = Vec::with_capacity(list.len());
            for fnodes in list {
                check(fnodes)?;
                if !(3..=4).contains(&fnodes.len()) {
                    return Err(Error::Mesh(format!("patch {name:?}: face with {} nodes", fnodes.len())));
                }
                let fi = *lookup.get(&face_key(fnodes)).ok_or_else(|| {
                    Error::Mesh(format!("patch {name:?}: face {fnodes:?} is not a cell face"))
                })?;
                match faces[fi].neighbor {
                    Neighbor::Boundary { patch } if patch == usize::MAX => {
                        faces[fi].neighbor = Neighbor::Boundary { patch: pid };
                        ids.push(fi);
                    }
                    Neighbor::Boundary { .. } => {
                        return Err(Error::Mesh(format!("face {fnodes:?} listed in two patches")))
                    }
                    Neighbor::Cell { .. } => {
                        return Err(Error::Mesh(format!(
                            "patch {name:?}: face {fnodes:?} is interior"
                        )))
                    }
                }
            }
            patches.push(Patch { name: name.clone(), faces: ids });
        }
        let unassigned: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.neighbor == Neighbor::Boundary { patch: usize::MAX })
            .map(|(i, _)| i)
            .collect();
        if !unassigned.is_empty() {
            let pid = match patches.iter().position(|p| p.name == DEFAULT_PATCH) {
                Some(p) => p,
                None => {
                    patches.push(Patch { name: DEFAULT_PATCH.into(), faces: vec![] });
                    patches.len() - 1
                }
            };
            for &fi in &unassigned {
                faces[fi].neighbor = Neighbor::Boundary { patch: pid };
            }
            patches[pid].faces.extend(unassigned);
        }

        let mut mesh = Mesh {
            nodes: raw.nodes.clone(),
            cells,
            faces,
            patches,
            stencils: StencilTable::default(),
        };
        for (a, b) in periodic {
            mesh.pair_periodic(a, b)?;
        }
        mesh.stencils = build_stencils(&mesh);
        Ok(mesh)
    }

    /// Turns the faces of patch `a` and patch `b` into interior faces joined by
    /// a translation, then drops both patches.
    fn pair_periodic(&mut self, a: &str, b: &str) -> Result<()> {
        let pa = self.patch_id(a).ok_or_else(|| Error::Mesh(format!("unknown patch {a:?}")))?;
        let pb = self.patch_id(b).ok_or_else(|| Error::Mesh(format!("unknown patch {b:?}")))?;
        if pa == pb {
            return Err(Error::Mesh(format!("patch {a:?} cannot be periodic with itself")));
        }
        let fa = self.patches[pa].faces.clone();
        let fb = self.patches[pb].faces.clone();
        if fa.len() != fb.len() || fa.is_empty() {
            return Err(Error::Mesh(format!(
                "periodic patches {a:?} and {b:?} have {} and {} faces",
                fa.len(),
                fb.len()
            )));
        }
        let mean = |ids: &[usize]| {
            ids.iter().fold(Vec3::zeros(), |c, &i| c + self.faces[i].centroid) / ids.len() as f64
        };
        let shift = mean(&fa) - mean(&fb);
        let scale = fa.iter().map(|&i| self.faces[i].area.sqrt()).fold(f64::INFINITY, f64::min);
        let mut by_pos: HashMap<[i64; 3], usize> = HashMap::new();
        for &j in &fb {
            by_pos.insert(quantize(&(self.faces[j].centroid + shift), scale), j);
        }
        for &i in &fa {
            let j = by_pos
                .remove(&quantize(&self.faces[i].centroid, scale))
                .ok_or_else(|| Error::Mesh(format!("periodic face {i} of {a:?} has no partner in {b:?}")))?;
            if (self.faces[i].area - self.faces[j].area).abs() > 1e-9 * self.faces[i].area {
                return Err(Error::Mesh(format!("periodic faces {i}/{j} differ in area")));
            }
            let ob = self.faces[j].owner;
            self.faces[i].neighbor = Neighbor::Cell { id: ob, shift };
            for f in self.cells[ob].faces.iter_mut() {
                if *f == j {
                    *f = i;
                }
            }
        }
        // Drop the partner faces and both patches, renumbering the rest.
        let dead: std::collections::HashSet<usize> = fb.iter().copied().collect();
        let mut remap = vec![usize::MAX; self.faces.len()];
        let mut kept = Vec::with_capacity(self.faces.len() - dead.len());
        for (i, f) in std::mem::take(&mut self.faces).into_iter().enumerate() {
            if !dead.contains(&i) {
                remap[i] = kept.len();
                kept.push(f);
            }
        }
        self.faces = kept;
        for c in &mut self.cells {
            for f in c.faces.iter_mut() {
                *f = remap[*f];
            }
        }
        let mut patch_remap = vec![usize::MAX; self.patches.len()];
        let mut patches = Vec::new();
        for (i, mut p) in std::mem::take(&mut self.patches).into_iter().enumerate() {
            if i != pa && i != pb {
                patch_remap[i] = patches.len();
                for f in p.faces.iter_mut() {
                    *f = remap[*f];
                }
                patches.push(p);
            }
        }
        self.patches = patches;
        for f in &mut self.faces {
            if let Neighbor::Boundary { patch } = &mut f.neighbor {
                *patch = patch_remap[*patch];
            }
        }
        Ok(())
    }

    pub fn patch_id(&self, name: &str) -> Option<usize> {
        self.patches.iter().position(|p| p.name == name)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Outward normal of face `f` as seen from cell `c` (sign of the face normal).
    #[inline]
    pub fn orientation(&self, f: usize, c: usize) -> f64 {
        if self.faces[f].owner == c {
            1.0
        } else {
            -1.0
        }
    }

    /// Cell across face `f` from cell `c`, with the translation that places it
    /// next to `c`; `None` on boundary faces.
    #[inline]
    pub fn across(&self, f: usize, c: usize) -> Option<StencilEntry> {
        let face = &self.faces[f];
        match face.neighbor {
            Neighbor::Boundary { .. } => None,
            Neighbor::Cell { id, shift } => {
                if face.owner == c {
                    Some(StencilEntry { cell: id, shift })
                } else {
                    Some(StencilEntry { cell: face.owner, shift: -shift })
                }
            }
        }
    }

    /// Face neighbors of `c` in local face order (`None` for boundary faces).
    pub fn neighbors(&self, c: usize) -> Vec<Option<StencilEntry>> {
        self.cells[c].faces.iter().map(|&f| self.across(f, c)).collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Converts back to file connectivity (periodic pairs are not recorded).
    pub fn to_raw(&self) -> RawMesh {
        let mut raw = RawMesh {
            nodes: self.nodes.clone(),
            ..Default::default()
        };
        for c in &self.cells {
            match c.kind {
                CellKind::Tetrahedron => raw.tets.push([c.nodes[0], c.nodes[1], c.nodes[2], c.nodes[3]]),
                CellKind::Hexahedron => {
                    let mut h = [0; 8];
                    h.copy_from_slice(&c.nodes);
                    raw.hexes.push(h);
                }
            }
        }
        for p in &self.patches {
            raw.patches.push((p.name.clone(), p.faces.iter().map(|&f| self.faces[f].nodes.clone()).collect()));
        }
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tet() -> RawMesh {
        RawMesh {
            nodes: vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            tets: vec![[0, 1, 2, 3]],
            ..Default::default()
        }
    }

    #[test]
    fn single_tet_has_four_boundary_faces() {
        let m = Mesh::from_raw(&single_tet(), &[]).unwrap();
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.faces.len(), 4);
        assert!(m.faces.iter().all(|f| f.is_boundary()));
        assert_eq!(m.patches[0].name, DEFAULT_PATCH);
    }

    #[test]
    fn two_tets_share_a_face() {
        let mut raw = single_tet();
        raw.nodes.push(Vec3::new(1.0, 1.0, 1.0));
        raw.tets.push([1, 2, 3, 4]);
        let m = Mesh::from_raw(&raw, &[]).unwrap();
        let interior: Vec<_> = m.faces.iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].owner, 0);
        assert_eq!(interior[0].neighbor, Neighbor::Cell { id: 1, shift: Vec3::zeros() });
        // normal points from owner to neighbor
        let d = m.cells[1].centroid - m.cells[0].centroid;
        assert!(interior[0].normal.dot(&d) > 0.0);
    }

    #[test]
    fn inverted_tet_rejected() {
        let mut raw = single_tet();
        raw.tets[0] = [0, 2, 1, 3];
        assert!(matches!(Mesh::from_raw(&raw, &[]), Err(Error::Mesh(_))));
    }

    #[test]
    fn closed_cells() {
        let spec = BoxSpec {
            perturb: 0.15,
            ..BoxSpec::new([1.0, 1.0, 1.0], [3, 3, 3], Split::Tet)
        };
        for m in [
            generate_box_mesh(&spec).unwrap(),
            generate_box_mesh(&BoxSpec::new([1.0, 2.0, 0.5], [3, 2, 2], Split::Hex)).unwrap(),
        ] {
            for (ci, c) in m.cells.iter().enumerate() {
                let s = c
                    .faces
                    .iter()
                    .fold(Vec3::zeros(), |s, &f| s + m.faces[f].normal * m.faces[f].area * m.orientation(f, ci));
                assert!(s.norm() < 1e-12, "cell {ci}: {s:?}");
            }
            for f in &m.faces {
                let w: f64 = f.quad.iter().map(|q| q.weight).sum();
                assert!((w - 1.0).abs() < 1e-14);
                for q in &f.quad {
                    assert!((q.pos - f.centroid).dot(&f.normal).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn periodic_pairing_is_involution() {
        let spec = BoxSpec {
            periodic: [true, true, false],
            ..BoxSpec::new([1.0, 1.0, 1.0], [4, 4, 2], Split::Hex)
        };
        let m = generate_box_mesh(&spec).unwrap();
        assert!(m.patch_id("xmin").is_none());
        assert!(m.patch_id("zmin").is_some());
        for (ci, c) in m.cells.iter().enumerate() {
            for &f in &c.faces {
                if let Some(e) = m.across(f, ci) {
                    let back = m.across(f, e.cell).unwrap();
                    assert_eq!(back.cell, ci);
                    assert!((back.shift + e.shift).norm() < 1e-14);
                    // the translated neighbor sits next to the cell
                    let d = m.cells[e.cell].centroid + e.shift - c.centroid;
                    assert!(d.norm() < 0.6);
                }
            }
        }
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 2 * 16);
    }
}
