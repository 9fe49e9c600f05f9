//! Reconstruction stencils.
//!
//! Every stencil lists the target cell first (zero shift). Sub-stencils that
//! would need a cell across a boundary are left out.

use std::collections::HashSet;

use super::{CellKind, Mesh};
use crate::Vec3;

/// A cell together with the translation placing it next to the target cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEntry {
    pub cell: usize,
    pub shift: Vec3,
}

impl StencilEntry {
    pub fn new(cell: usize) -> Self {
        Self { cell, shift: Vec3::zeros() }
    }

    fn key(&self, scale: f64) -> (usize, [i64; 3]) {
        (self.cell, [0, 1, 2].map(|i| (self.shift[i] / scale * 1e6).round() as i64))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CellStencils {
    /// Target, face neighbors, and their face neighbors.
    pub weno_big: Vec<StencilEntry>,
    /// Target and face neighbors.
    pub hweno_big: Vec<StencilEntry>,
    pub weno_subs: Vec<Vec<StencilEntry>>,
    pub hweno_subs: Vec<Vec<StencilEntry>>,
}

#[derive(Debug, Clone, Default)]
pub struct StencilTable {
    pub cells: Vec<CellStencils>,
}

impl std::ops::Index<usize> for StencilTable {
    type Output = CellStencils;
    fn index(&self, c: usize) -> &CellStencils {
        &self.cells[c]
    }
}

/// Hexahedron sub-stencils as local face triples (faces 0 and 5 are opposite,
/// 1..=4 form the ring).
const HEX_SUBS: [[usize; 3]; 8] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 1],
    [5, 1, 2],
    [5, 2, 3],
    [5, 3, 4],
    [5, 4, 1],
];

/// Tetrahedron sub-stencils: three face neighbors plus the neighbors of the
/// enlarged one.
const TET_SUBS: [([usize; 3], usize); 4] = [([0, 1, 2], 0), ([0, 1, 3], 1), ([1, 2, 3], 2), ([2, 0, 3], 3)];

fn dedup(entries: Vec<StencilEntry>, scale: f64) -> Vec<StencilEntry> {
    let mut seen = HashSet::new();
    entries.into_iter().filter(|e| seen.insert(e.key(scale))).collect()
}

fn shifted(e: StencilEntry, by: Vec3) -> StencilEntry {
    StencilEntry { cell: e.cell, shift: e.shift + by }
}

pub fn build_stencils(mesh: &Mesh) -> StencilTable {
    let cells = (0..mesh.num_cells()).map(|c| cell_stencils(mesh, c)).collect();
    StencilTable { cells }
}

fn cell_stencils(mesh: &Mesh, c: usize) -> CellStencils {
    let scale = mesh.cells[c].h;
    let me = StencilEntry::new(c);
    let nbrs = mesh.neighbors(c);
    // neighbors of neighbor p, excluding the target, ascending cell id
    let second = |p: usize| -> Option<Vec<StencilEntry>> {
        let n = nbrs[p]?;
        let mut out: Vec<StencilEntry> = mesh
            .neighbors(n.cell)
            .into_iter()
            .flatten()
            .map(|e| shifted(e, n.shift))
            .filter(|e| e.key(scale) != me.key(scale))
            .collect();
        out.sort_by_key(|e| e.cell);
        Some(out)
    };

    let mut hweno_big = vec![me];
    hweno_big.extend(nbrs.iter().flatten().copied());
    let hweno_big = dedup(hweno_big, scale);

    let mut weno_big = hweno_big.clone();
    for p in 0..nbrs.len() {
        if let Some(s) = second(p) {
            weno_big.extend(s);
        }
    }
    let weno_big = dedup(weno_big, scale);

    let hweno_subs = nbrs.iter().flatten().map(|&n| vec![me, n]).collect();

    let mut weno_subs = Vec::new();
    match mesh.cells[c].kind {
        CellKind::Hexahedron => {
            for tri in HEX_SUBS {
                if let Some(v) = tri.iter().map(|&p| nbrs[p]).collect::<Option<Vec<_>>>() {
                    let mut s = vec![me];
                    s.extend(v);
                    weno_subs.push(dedup(s, scale));
                }
            }
        }
        CellKind::Tetrahedron => {
            for (tri, grow) in TET_SUBS {
                let base = tri.iter().map(|&p| nbrs[p]).collect::<Option<Vec<_>>>();
                if let (Some(v), Some(extra)) = (base, second(grow)) {
                    if extra.len() < 3 {
                        continue;
                    }
                    let mut s = vec![me];
                    s.extend(v);
                    s.extend(extra);
                    weno_subs.push(dedup(s, scale));
                }
            }
        }
    }

    CellStencils { weno_big, hweno_big, weno_subs, hweno_subs }
}

#[cfg(test)]
mod tests {
    use crate::mesh::{generate_box_mesh, BoxSpec, Split};

    #[test]
    fn interior_hex_stencils() {
        let m = generate_box_mesh(&BoxSpec::new([1.0; 3], [3, 3, 3], Split::Hex)).unwrap();
        let c = 13; // center cell
        let s = &m.stencils[c];
        assert_eq!(s.weno_subs.len(), 8);
        assert!(s.weno_subs.iter().all(|v| v.len() == 4 && v[0].cell == c));
        assert_eq!(s.hweno_big.len(), 7);
        assert_eq!(s.hweno_subs.len(), 6);
        // self, 6 face neighbors, 12 edge neighbors
        assert_eq!(s.weno_big.len(), 19);
    }

    #[test]
    fn interior_tet_stencils() {
        let m = generate_box_mesh(&BoxSpec::new([1.0; 3], [4, 4, 4], Split::Tet)).unwrap();
        let mut found = false;
        for (c, s) in m.stencils.cells.iter().enumerate() {
            if m.neighbors(c).iter().all(|n| n.is_some())
                && m.neighbors(c).iter().flatten().all(|n| m.neighbors(n.cell).iter().all(|x| x.is_some()))
            {
                found = true;
                assert_eq!(s.weno_subs.len(), 4);
                for sub in &s.weno_subs {
                    assert_eq!(sub[0].cell, c);
                    assert_eq!(sub.len(), 7);
                    assert!(sub[1..].iter().all(|e| e.cell != c));
                }
                assert!(s.hweno_subs.iter().all(|v| v.len() == 2));
            }
        }
        assert!(found);
    }

    #[test]
    fn corner_of_small_hex_box() {
        let m = generate_box_mesh(&BoxSpec::new([1.0; 3], [2, 2, 2], Split::Hex)).unwrap();
        let s = &m.stencils[0];
        // self, 3 face neighbors, 3 edge neighbors
        assert_eq!(s.weno_big.len(), 7);
        assert_eq!(s.hweno_big.len(), 4);
        // only the top/+x/+y sub-stencil has all its cells
        assert_eq!(s.weno_subs.len(), 1);
        assert_eq!(s.weno_subs[0].len(), 4);
    }

    #[test]
    fn periodic_stencils_are_full() {
        let spec = BoxSpec { periodic: [true; 3], ..BoxSpec::new([1.0; 3], [4, 4, 4], Split::Hex) };
        let m = generate_box_mesh(&spec).unwrap();
        for s in &m.stencils.cells {
            assert_eq!(s.weno_subs.len(), 8);
            assert_eq!(s.weno_big.len(), 25);
        }
    }
}
