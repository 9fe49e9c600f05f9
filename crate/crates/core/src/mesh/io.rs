//! Plain-text mesh format.
//!
//! ```text
//! ugks-mesh 1
//! nodes <n>
//! <x> <y> <z>            (n lines)
//! tets <n>
//! <a> <b> <c> <d>        (0-based node ids)
//! hexes <n>
//! <a> ... <h>            (VTK hexahedron order)
//! patches <n>
//! <name> <nfaces>       (per patch)
//! <node ids>             (3 or 4 per face)
//! ```
//!
//! Blank lines and text after `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, RawMesh};
use crate::{Error, Result, Vec3};

const MAGIC: &str = "ugks-mesh 1";

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, raw) in self.inner.by_ref() {
            self.line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
        Err(Error::MeshParse { line: self.line + 1, msg: "unexpected end of file".into() })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::MeshParse { line: self.line, msg: msg.into() }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != key {
            return Err(self.err(format!("expected `{key} <count>`, got `{}`", t.join(" "))));
        }
        t[1].parse().map_err(|_| self.err(format!("bad count `{}`", t[1])))
    }

    fn ids(&mut self, n: Option<usize>) -> Result<Vec<usize>> {
        let t = self.next_tokens()?;
        if let Some(n) = n {
            if t.len() != n {
                return Err(self.err(format!("expected {n} node ids, got {}", t.len())));
            }
        }
        t.iter()
            .map(|s| s.parse().map_err(|_| self.err(format!("bad node id `{s}`"))))
            .collect()
    }
}

pub fn parse_raw(text: &str) -> Result<RawMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let magic = lines.next_tokens()?.join(" ");
    if magic != MAGIC {
        return Err(lines.err(format!("expected `{MAGIC}` header, got `{magic}`")));
    }
    let mut raw = RawMesh::default();

    let n = lines.header("nodes")?;
    raw.nodes.reserve(n);
    for _ in 0..n {
        let t = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(lines.err(format!("expected 3 coordinates, got {}", t.len())));
        }
        let mut p = Vec3::zeros();
        for k in 0..3 {
            p[k] = t[k].parse().map_err(|_| lines.err(format!("bad coordinate `{}`", t[k])))?;
        }
        raw.nodes.push(p);
    }

    let n = lines.header("tets")?;
    for _ in 0..n {
        let v = lines.ids(Some(4))?;
        raw.tets.push([v[0], v[1], v[2], v[3]]);
    }

    let n = lines.header("hexes")?;
    for _ in 0..n {
        let v = lines.ids(Some(8))?;
        let mut h = [0; 8];
        h.copy_from_slice(&v);
        raw.hexes.push(h);
    }

    let n = lines.header("patches")?;
    for _ in 0..n {
        let t = lines.next_tokens()?;
        if t.len() != 2 {
            return Err(lines.err("expected `<name> <nfaces>`"));
        }
        let name = t[0].to_string();
        let nf: usize = t[1].parse().map_err(|_| lines.err(format!("bad face count `{}`", t[1])))?;
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let v = lines.ids(None)?;
            if !(3..=4).contains(&v.len()) {
                return Err(lines.err(format!("patch face needs 3 or 4 nodes, got {}", v.len())));
            }
            faces.push(v);
        }
        raw.patches.push((name, faces));
    }

    if let Ok(t) = lines.next_tokens() {
        return Err(lines.err(format!("trailing content `{}`", t.join(" "))));
    }
    Ok(raw)
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<RawMesh> {
    parse_raw(&std::fs::read_to_string(path)?)
}

pub fn load_mesh(path: impl AsRef<Path>, periodic: &[(String, String)]) -> Result<Mesh> {
    Mesh::from_raw(&load_raw(path)?, periodic)
}

pub fn format_raw(raw: &RawMesh) -> String {
    let mut s = String::new();
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "nodes {}", raw.nodes.len());
    for p in &raw.nodes {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    let _ = writeln!(s, "tets {}", raw.tets.len());
    for t in &raw.tets {
        let _ = writeln!(s, "{}", join(t));
    }
    let _ = writeln!(s, "hexes {}", raw.hexes.len());
    for h in &raw.hexes {
        let _ = writeln!(s, "{}", join(h));
    }
    let _ = writeln!(s, "patches {}", raw.patches.len());
    for (name, faces) in &raw.patches {
        let _ = writeln!(s, "{name} {}", faces.len());
        for f in faces {
            let _ = writeln!(s, "{}", join(f));
        }
    }
    s
}

pub fn write_raw(raw: &RawMesh, path: impl AsRef<Path>) -> Result<()> {
    if raw.patches.iter().any(|(n, _)| n.is_empty() || n.contains(char::is_whitespace) || n.contains('#')) {
        return Err(Error::Mesh("patch names must be non-empty without whitespace or `#`".into()));
    }
    std::fs::write(path, format_raw(raw))?;
    Ok(())
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    write_raw(&mesh.to_raw(), path)
}
