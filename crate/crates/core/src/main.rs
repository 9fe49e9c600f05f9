use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ugks::driver::{run_case, CaseConfig};
use ugks::mesh::{generate_box_raw, load_mesh, write_raw, BoxSpec, Split};
use ugks::oracles::{run_suite, DEFAULT_SEED};
use ugks::recon::{ReconConfig, Reconstructor, Scheme};
use ugks::Result;

#[derive(Parser)]
#[command(name = "ugks", version, about = "Implicit gas-kinetic solver for steady flows on tetrahedral and hexahedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case file to steady state.
    Run { config: PathBuf },
    /// Generate a mesh file.
    Genmesh {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Print a summary of a mesh file.
    Check {
        mesh: PathBuf,
        /// Periodic patch pair `a:b` (repeatable).
        #[arg(long, value_parser = parse_pair)]
        periodic: Vec<(String, String)>,
    },
    /// Print an oracle comparison table.
    Oracle {
        #[arg(value_parser = ["moments", "flux", "jacobian", "dense", "all"])]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Shape {
    /// Axis-aligned box with patches xmin..zmax.
    Box {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long)]
        nz: usize,
        #[arg(long, value_enum, default_value_t = SplitArg::Hex)]
        split: SplitArg,
        #[arg(long)]
        out: PathBuf,
        /// Box size `lx,ly,lz`.
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
        extent: Vec<f64>,
        /// Random interior node displacement as a fraction of the spacing.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Hex,
    Tet,
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once(':').map(|(a, b)| (a.to_string(), b.to_string())).ok_or_else(|| format!("expected a:b, got '{s}'"))
}

fn run(config: &PathBuf) -> Result<bool> {
    let cfg = CaseConfig::load(config)?;
    let out = run_case(&cfg)?;
    if let Some(e) = out.history.last() {
        println!(
            "{} after {} steps ({:.1} s): rho L1 {:.3e}, L2 {:.3e}",
            if out.converged { "converged" } else { "stopped" },
            e.step + 1,
            e.time_s,
            e.res_rho_l1,
            e.res_l2
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(out.converged)
}

fn check(path: &PathBuf, periodic: &[(String, String)]) -> Result<()> {
    let mesh = load_mesh(path, periodic)?;
    let tets = mesh.cells.iter().filter(|c| c.kind == ugks::mesh::CellKind::Tetrahedron).count();
    let boundary = mesh.faces.iter().filter(|f| f.is_boundary()).count();
    println!("nodes {}", mesh.nodes.len());
    println!("cells {} ({} tetrahedra, {} hexahedra)", mesh.num_cells(), tets, mesh.num_cells() - tets);
    println!("faces {} ({} boundary)", mesh.faces.len(), boundary);
    for p in &mesh.patches {
        println!("patch {} {} faces", p.name, p.faces.len());
    }
    let (lo, hi) = mesh.cells.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| (lo.min(c.volume), hi.max(c.volume)));
    println!("volume total {:.6e} min {:.6e} max {:.6e}", mesh.total_volume(), lo, hi);
    for scheme in [Scheme::Weno, Scheme::Hweno] {
        let r = Reconstructor::new(&mesh, ReconConfig::new(scheme));
        println!("{scheme:?} cells with reduced reconstruction {}", r.fallback_count());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(2) }),
        Command::Genmesh { shape: Shape::Box { nx, ny, nz, split, out, extent, perturb, seed } } => {
            let split = match split {
                SplitArg::Hex => Split::Hex,
                SplitArg::Tet => Split::Tet,
            };
            let mut spec = BoxSpec::new([extent[0], extent[1], extent[2]], [nx, ny, nz], split);
            spec.perturb = perturb;
            spec.seed = seed;
            generate_box_raw(&spec).and_then(|raw| write_raw(&raw, &out)).map(|_| ExitCode::SUCCESS)
        }
        Command::Check { mesh, periodic } => check(&mesh, &periodic).map(|_| ExitCode::SUCCESS),
        Command::Oracle { suite, seed } => run_suite(&suite, seed).map(|r| {
            print!("{r}");
            if r.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
