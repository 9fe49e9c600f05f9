use std::fmt::Write as _;
use std::path::Path;

use crate::implicit::Field;
use crate::kinetic::conserved_to_primitive;
use crate::mesh::{CellKind, Mesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEntry {
    pub step: usize,
    pub time_s: f64,
    pub res_rho_l1: f64,
    pub res_l2: f64,
}

impl ResidualEntry {
    pub fn below(&self, level: f64) -> bool {
        self.res_rho_l1 <= level && self.res_l2 <= level
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualHistory {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualHistory {
    pub fn push(&mut self, e: ResidualEntry) {
        self.entries.push(e);
    }

    pub fn last(&self) -> Option<&ResidualEntry> {
        self.entries.last()
    }

    /// First step with both residual norms at or below `level`.
    pub fn steps_to(&self, level: f64) -> Option<usize> {
        self.entries.iter().find(|e| e.below(level)).map(|e| e.step)
    }

    pub fn min_rho(&self) -> f64 {
        self.entries.iter().map(|e| e.res_rho_l1).fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["step", "time_s", "res_rho_l1", "res_l2"])?;
        for e in &self.entries {
            w.write_record([
                e.step.to_string(),
                format!("{:?}", e.time_s),
                format!("{:?}", e.res_rho_l1),
                format!("{:?}", e.res_l2),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["step", "time_s", "res_rho_l1", "res_l2"] {
            return Err(Error::Config(format!("unexpected residual header in {}", path.display())));
        }
        let mut h = ResidualHistory::default();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| Error::Config(format!("bad number '{}' in {}", &rec[i], path.display())))
            };
            h.push(ResidualEntry {
                step: rec[0].parse().map_err(|_| Error::Config(format!("bad step '{}'", &rec[0])))?,
                time_s: num(1)?,
                res_rho_l1: num(2)?,
                res_l2: num(3)?,
            });
        }
        Ok(h)
    }
}

/// Legacy ASCII VTK unstructured grid with density, pressure and velocity per
/// cell, and the density gradient when requested and available.
pub fn write_vtk(mesh: &Mesh, field: &Field, gamma: f64, path: &Path, gradients: bool) -> Result<()> {
    let mut prims = Vec::with_capacity(field.q.len());
    for (c, q) in field.q.iter().enumerate() {
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { cell: c });
        }
        prims.push(conserved_to_primitive(q, gamma).map_err(|_| Error::NonFinite { cell: c })?);
    }
    let grads = field.grads.as_ref().filter(|_| gradients);
    if let Some(g) = grads {
        if let Some(c) = g.iter().position(|g| !g.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite { cell: c });
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nugks solution\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    let size: usize = mesh.cells.iter().map(|c| c.nodes.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.cells.len(), size);
    for c in &mesh.cells {
        let ids: Vec<String> = c.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{} {}", c.nodes.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = writeln!(s, "{}", if c.kind == CellKind::Tetrahedron { 10 } else { 12 });
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.cells.len());
    let _ = writeln!(s, "SCALARS density double 1\nLOOKUP_TABLE default");
    for w in &prims {
        let _ = writeln!(s, "{:?}", w.rho);
    }
    let _ = writeln!(s, "SCALARS pressure double 1\nLOOKUP_TABLE default");
    for w in &prims {
        let _ = writeln!(s, "{:?}", w.pressure());
    }
    let _ = writeln!(s, "VECTORS velocity double");
    for w in &prims {
        let _ = writeln!(s, "{:?} {:?} {:?}", w.vel.x, w.vel.y, w.vel.z);
    }
    if let Some(g) = grads {
        let _ = writeln!(s, "VECTORS density_gradient double");
        for g in g {
            let _ = writeln!(s, "{:?} {:?} {:?}", g[(0, 0)], g[(1, 0)], g[(2, 0)]);
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}
