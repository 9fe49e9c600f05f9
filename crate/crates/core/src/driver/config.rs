use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::boundary::{PatchKind, PatchSpec};
use crate::flux::{CollisionModel, FluxConfig, FluxKind};
use crate::implicit::{GmresOptions, LinearSolver, StepSettings, TimeStepping};
use crate::kinetic::PrimitiveState;
use crate::mesh::{generate_box_mesh, load_mesh, BoxSpec, Mesh, Split};
use crate::recon::{ReconConfig, Scheme};
use crate::{Error, Result, Vec3, DEFAULT_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    WenoGmres,
    HwenoGmres,
    WenoLusgs,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::WenoGmres => "weno_gmres",
            Method::HwenoGmres => "hweno_gmres",
            Method::WenoLusgs => "weno_lusgs",
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Method::HwenoGmres => Scheme::Hweno,
            _ => Scheme::Weno,
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Method::WenoGmres, Method::HwenoGmres, Method::WenoLusgs]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File { path: PathBuf, periodic: Vec<(String, String)> },
    Box(BoxSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Viscosity {
    None,
    Mu(f64),
    /// `mu = rho U L / Re` with `U` the reference speed scale.
    Reynolds { re: f64, length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub gamma: f64,
    pub viscosity: Viscosity,
    pub mach: f64,
    pub direction: Vec3,
    pub density: f64,
    pub pressure: f64,
    /// Start from rest instead of the free stream.
    pub start_at_rest: bool,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            gamma: DEFAULT_GAMMA,
            viscosity: Viscosity::None,
            mach: 0.0,
            direction: Vec3::x(),
            density: 1.0,
            pressure: 1.0 / DEFAULT_GAMMA,
            start_at_rest: false,
        }
    }
}

impl Physics {
    pub fn sound_speed(&self) -> f64 {
        (self.gamma * self.pressure / self.density).sqrt()
    }

    /// Reference speed `Ma a`.
    pub fn speed(&self) -> f64 {
        self.mach * self.sound_speed()
    }

    pub fn reference(&self) -> PrimitiveState {
        PrimitiveState::from_pressure(self.density, self.direction * self.speed(), self.pressure)
    }

    pub fn initial(&self) -> PrimitiveState {
        let mut w = self.reference();
        if self.start_at_rest {
            w.vel = Vec3::zeros();
        }
        w
    }

    pub fn mu(&self) -> Option<f64> {
        match self.viscosity {
            Viscosity::None => None,
            Viscosity::Mu(mu) => Some(mu),
            Viscosity::Reynolds { re, length } => Some(self.density * self.speed() * length / re),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub cfl: f64,
    pub krylov_dim: usize,
    pub restarts: usize,
    pub jacobi_iters: usize,
    pub rtol: f64,
    pub threshold: f64,
    pub max_steps: usize,
    pub time_stepping: TimeStepping,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let g = GmresOptions::default();
        SolverConfig {
            cfl: 2.0,
            krylov_dim: g.krylov_dim,
            restarts: g.restarts,
            jacobi_iters: g.jacobi_iters,
            rtol: g.rtol,
            threshold: 1e-10,
            max_steps: 10_000,
            time_stepping: TimeStepping::Local,
        }
    }
}

/// One `[patches]` entry: `name = kind [lambda=<f>] [velocity=<x,y,z>] [lid=<x,y,z>]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchEntry {
    pub name: String,
    pub kind: PatchKind,
    pub lambda: Option<f64>,
    pub velocity: Option<Vec3>,
    /// Direction of a lid moving at the reference speed.
    pub lid: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub prefix: String,
    pub every: usize,
    pub gradients: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: None, prefix: "case".into(), every: 100, gradients: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub mesh: MeshSource,
    pub method: Method,
    pub flux: FluxKind,
    pub linear_weight: f64,
    pub epsilon: f64,
    pub nonlinear: bool,
    pub physics: Physics,
    pub solver: SolverConfig,
    pub patches: Vec<PatchEntry>,
    pub output: OutputConfig,
}

impl CaseConfig {
    /// Defaults on a generated box with the given patches.
    pub fn new(mesh: MeshSource, method: Method) -> Self {
        let r = ReconConfig::new(method.scheme());
        CaseConfig {
            mesh,
            method,
            flux: FluxKind::Gks,
            linear_weight: r.linear_weight,
            epsilon: r.epsilon,
            nonlinear: r.nonlinear,
            physics: Physics::default(),
            solver: SolverConfig::default(),
            patches: Vec::new(),
            output: OutputConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses INI text; relative paths are taken from `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let cleaned: String = text.lines().map(strip_comment).collect::<Vec<_>>().join("\n");
        let ini = Ini::load_from_str_noescape(&cleaned).map_err(|e| Error::Config(e.to_string()))?;
        let known = ["mesh", "scheme", "physics", "solver", "patches", "output"];
        for s in ini.sections().flatten() {
            if !known.contains(&s) {
                return Err(Error::Config(format!("unknown section [{s}]")));
            }
        }
        if ini.general_section().iter().next().is_some() {
            return Err(Error::Config("keys outside any section".into()));
        }
        let mut r = Reader { ini: &ini, section: "" };

        r.section = "mesh";
        let periodic: Vec<String> = r.get("periodic").map(|s| s.split_whitespace().map(String::from).collect()).unwrap_or_default();
        let mesh = if let Some(file) = r.get("file") {
            let pairs = periodic
                .iter()
                .map(|p| {
                    p.split_once(':')
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .ok_or_else(|| Error::Config(format!("[mesh] periodic pair '{p}' must be a:b")))
                })
                .collect::<Result<_>>()?;
            MeshSource::File { path: base.join(file), periodic: pairs }
        } else {
            let n = r.parse_or("n", 0usize)?;
            let div = [r.parse_or("nx", n)?, r.parse_or("ny", n)?, r.parse_or("nz", n)?];
            let split = match r.get("split").unwrap_or("tet") {
                "tet" => Split::Tet,
                "hex" => Split::Hex,
                s => return Err(Error::Config(format!("[mesh] split must be tet or hex, not '{s}'"))),
            };
            let extent = match r.get("extent") {
                Some(s) => {
                    let v = parse_vec(s).map_err(|e| Error::Config(format!("[mesh] extent: {e}")))?;
                    [v.x, v.y, v.z]
                }
                None => [1.0; 3],
            };
            let mut spec = BoxSpec::new(extent, div, split);
            spec.perturb = r.parse_or("perturb", 0.0)?;
            spec.seed = r.parse_or("seed", 0u64)?;
            for p in &periodic {
                match p.as_str() {
                    "x" => spec.periodic[0] = true,
                    "y" => spec.periodic[1] = true,
                    "z" => spec.periodic[2] = true,
                    s => return Err(Error::Config(format!("[mesh] periodic axis '{s}' must be x, y or z"))),
                }
            }
            MeshSource::Box(spec)
        };

        r.section = "scheme";
        let method: Method = r.get("method").unwrap_or("weno_gmres").parse()?;
        let mut cfg = CaseConfig::new(mesh, method);
        cfg.flux = match r.get("flux").unwrap_or("gks") {
            "gks" => FluxKind::Gks,
            "kfvs" => FluxKind::Kfvs,
            s => return Err(Error::Config(format!("[scheme] flux must be gks or kfvs, not '{s}'"))),
        };
        cfg.linear_weight = r.parse_or("linear_weight", cfg.linear_weight)?;
        cfg.epsilon = r.parse_or("epsilon", cfg.epsilon)?;
        cfg.nonlinear = r.parse_or("nonlinear", cfg.nonlinear)?;

        r.section = "physics";
        let p = &mut cfg.physics;
        p.gamma = r.parse_or("gamma", p.gamma)?;
        p.density = r.parse_or("density", 1.0)?;
        p.pressure = r.parse_or("pressure", 1.0 / p.gamma)?;
        p.mach = r.parse_or("mach", 0.0)?;
        if let Some(d) = r.get("direction") {
            let v = parse_vec(d).map_err(|e| Error::Config(format!("[physics] direction: {e}")))?;
            if !(v.norm() > 0.0) {
                return Err(Error::Config("[physics] direction must be non-zero".into()));
            }
            p.direction = v.normalize();
        }
        p.start_at_rest = match r.get("initial").unwrap_or("freestream") {
            "freestream" => false,
            "rest" => true,
            s => return Err(Error::Config(format!("[physics] initial must be freestream or rest, not '{s}'"))),
        };
        p.viscosity = match r.get("model").unwrap_or("inviscid") {
            "inviscid" => Viscosity::None,
            "viscous" => match (r.get("mu"), r.get("reynolds")) {
                (Some(_), None) => Viscosity::Mu(r.parse_or("mu", 0.0)?),
                (None, Some(_)) => Viscosity::Reynolds { re: r.parse_or("reynolds", 0.0)?, length: r.parse_or("length", 1.0)? },
                _ => return Err(Error::Config("[physics] viscous model needs exactly one of mu or reynolds".into())),
            },
            s => return Err(Error::Config(format!("[physics] model must be inviscid or viscous, not '{s}'"))),
        };

        r.section = "solver";
        let s = &mut cfg.solver;
        s.cfl = r.parse_or("cfl", s.cfl)?;
        s.krylov_dim = r.parse_or("krylov_dim", s.krylov_dim)?;
        s.restarts = r.parse_or("restarts", s.restarts)?;
        s.jacobi_iters = r.parse_or("jacobi_iters", s.jacobi_iters)?;
        s.rtol = r.parse_or("gmres_rtol", s.rtol)?;
        s.threshold = r.parse_or("threshold", s.threshold)?;
        s.max_steps = r.parse_or("max_steps", s.max_steps)?;
        s.time_stepping = match r.get("time_step").unwrap_or("local") {
            "local" => TimeStepping::Local,
            "global" => TimeStepping::Global,
            v => return Err(Error::Config(format!("[solver] time_step must be local or global, not '{v}'"))),
        };

        if let Some(sec) = ini.section(Some("patches")) {
            for (name, value) in sec.iter() {
                cfg.patches.push(parse_patch(name, value)?);
            }
        }

        r.section = "output";
        if let Some(d) = r.get("directory") {
            cfg.output.directory = Some(base.join(d));
        }
        if let Some(p) = r.get("prefix") {
            cfg.output.prefix = p.to_string();
        }
        cfg.output.every = r.parse_or("every", cfg.output.every)?;
        cfg.output.gradients = r.parse_or("gradients", cfg.output.gradients)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive")))
            }
        };
        positive(p.density, "density")?;
        positive(p.pressure, "pressure")?;
        positive(self.solver.cfl, "cfl")?;
        positive(self.epsilon, "epsilon")?;
        if !(p.gamma > 1.0 && p.gamma <= 5.0 / 3.0) {
            return Err(Error::Config("gamma must lie in (1, 5/3]".into()));
        }
        if !(p.mach.is_finite() && p.mach >= 0.0) {
            return Err(Error::Config("mach must be non-negative".into()));
        }
        if let Some(mu) = p.mu() {
            positive(mu, "viscosity")?;
        }
        if self.solver.krylov_dim == 0 || self.solver.restarts == 0 {
            return Err(Error::Config("krylov_dim and restarts must be at least 1".into()));
        }
        if !(self.linear_weight > 0.0 && self.linear_weight < 1.0 / 8.0) {
            return Err(Error::Config("linear_weight must lie in (0, 1/8)".into()));
        }
        for (i, a) in self.patches.iter().enumerate() {
            if self.patches[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Config(format!("patch '{}' listed twice", a.name)));
            }
        }
        self.patch_specs()?.iter().try_for_each(PatchSpec::validate)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.mesh {
            MeshSource::File { path, periodic } => load_mesh(path, periodic),
            MeshSource::Box(spec) => generate_box_mesh(spec),
        }
    }

    pub fn patch_specs(&self) -> Result<Vec<PatchSpec>> {
        let reference = self.physics.reference();
        Ok(self
            .patches
            .iter()
            .map(|e| {
                let mut s = PatchSpec::new(e.name.clone(), e.kind);
                if e.kind.needs_reference() {
                    s = s.with_reference(reference);
                }
                if e.kind == PatchKind::WallNoslipIsothermal {
                    s = s.with_lambda_wall(e.lambda.unwrap_or(reference.lambda));
                }
                if let Some(v) = e.velocity {
                    s = s.with_wall_velocity(v);
                }
                if let Some(d) = e.lid {
                    s = s.with_wall_velocity(d * self.physics.speed());
                }
                s
            })
            .collect())
    }

    pub fn recon_config(&self) -> ReconConfig {
        let mut r = ReconConfig::new(self.method.scheme());
        r.linear_weight = self.linear_weight;
        r.epsilon = self.epsilon;
        r.nonlinear = self.nonlinear;
        r
    }

    pub fn flux_config(&self) -> FluxConfig {
        let model = match self.physics.mu() {
            Some(mu) => CollisionModel::Viscous { mu },
            None => CollisionModel::Inviscid,
        };
        FluxConfig { gamma: self.physics.gamma, model, kind: self.flux }
    }

    pub fn step_settings(&self) -> StepSettings {
        let s = &self.solver;
        let solver = match self.method {
            Method::WenoLusgs => LinearSolver::Lusgs,
            _ => LinearSolver::Gmres(GmresOptions {
                krylov_dim: s.krylov_dim,
                restarts: s.restarts,
                jacobi_iters: s.jacobi_iters,
                rtol: s.rtol,
                check_orthogonality: false,
            }),
        };
        StepSettings { cfl: s.cfl, solver, time_stepping: s.time_stepping }
    }
}

struct Reader<'a> {
    ini: &'a Ini,
    section: &'static str,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.ini.get_from(Some(self.section), key).map(str::trim)
    }

    fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                v.parse().map_err(|_| Error::Config(format!("[{}] {key}: cannot parse '{v}'", self.section)))
            }
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_vec(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number '{t}'")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 3 || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected three finite numbers in '{s}'"));
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn parse_patch(name: &str, value: &str) -> Result<PatchEntry> {
    let mut words = value.split_whitespace();
    let kind: PatchKind = words
        .next()
        .ok_or_else(|| Error::Config(format!("patch '{name}': missing kind")))?
        .parse()
        .map_err(|e: Error| Error::Config(format!("patch '{name}': {e}")))?;
    let mut entry = PatchEntry { name: name.to_string(), kind, lambda: None, velocity: None, lid: None };
    for w in words {
        let bad = |msg: String| Error::Config(format!("patch '{name}': {msg}"));
        let (k, v) = w.split_once('=').ok_or_else(|| bad(format!("option '{w}' must be key=value")))?;
        match k {
            "lambda" => entry.lambda = Some(v.parse().map_err(|_| bad(format!("bad lambda '{v}'")))?),
            "velocity" => entry.velocity = Some(parse_vec(v).map_err(bad)?),
            "lid" => {
                let d = parse_vec(v).map_err(bad)?;
                if !(d.norm() > 0.0) {
                    return Err(bad("lid direction must be non-zero".into()));
                }
                entry.lid = Some(d.normalize());
            }
            _ => return Err(bad(format!("unknown option '{k}'"))),
        }
    }
    Ok(entry)
}
