use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tfemdg::analysis::{
    error_h1_broken, error_l2, exponent_sweep, fit_rate, manufactured, write_csv, write_svg, ErrorKind,
    StudyRecord, SweepConfig,
};
use tfemdg::assembly::{assemble_dgified, assemble_stiffness, PenaltyConfig};
use tfemdg::dg_oracle::{assemble_dg, assemble_dg_operator, DgPenalty, DgScheme, EdgeQuadrature};
use tfemdg::dgify::{dgify, DgifyOptions, DgifyResult, InterfaceSelector, Provenance};
use tfemdg::mesh::{read_mesh, write_mesh, ElementClass, Mesh};
use tfemdg::pipeline::{front_demo, preconditioner_for, unit_mesh, FrontConfig, PenaltySpec, PreconditionerKind};
use tfemdg::solve::{solve, SolveOptions, Solver};
use tfemdg::vtk::write_vtk;
use tfemdg::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_EQUIVALENCE: u8 = 4;

/// P1 finite elements with zero-measure interface elements and a Jacobian
/// threshold: discontinuous Galerkin from a conforming FEM code.
#[derive(Parser, Debug)]
#[command(name = "tfemdg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a structured unit-domain mesh.
    Generate {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Insert interface elements into a mesh file.
    Dgify {
        #[arg(long)]
        mesh: PathBuf,
        #[command(flatten)]
        edit: EditArgs,
        #[arg(long)]
        out: PathBuf,
        /// Provenance JSON; defaults to `<out>.provenance.json`.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Assemble, solve and export one manufactured problem.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        edit: EditArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        case: Option<String>,
        /// Legacy VTK output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        include_dummies: bool,
    },
    /// Penalization-exponent sweep with CSV and SVG output.
    Convergence {
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Comma-separated exponents p (j_min = h^p).
        #[arg(long = "jmin-exp", value_delimiter = ',', required = true)]
        exponents: Vec<f64>,
        /// Comma-separated mesh resolutions.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        local_penalty: bool,
        #[arg(long, value_enum, default_value_t = OnOff::On)]
        boundary_layer: OnOff,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV path; the SVG plot is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Circular front switching elements from FEM to DG, one VTK per radius.
    FrontDemo {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.75])]
        radii: Vec<f64>,
        /// Threshold exponent; 3 gives D ~ h^-2 in 2D.
        #[arg(long = "jmin-exp", default_value_t = 3.0)]
        exponent: f64,
        #[arg(long)]
        case: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        include_dummies: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare thresholded FEM with direct DG assembly.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        edit: EditArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        case: Option<String>,
        /// Largest accepted relative matrix difference.
        #[arg(long, default_value_t = 1e-10)]
        threshold: f64,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Mesh file; with dummy elements it needs `--provenance`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long)]
    provenance: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
}

#[derive(Args, Debug)]
struct EditArgs {
    /// all | none | circle:cx,cy,r | ids:i,j,...
    #[arg(long, default_value = "all")]
    selector: String,
    /// Boundary dummies with pinned outer vertices. Default: on for
    /// `--selector all`, off otherwise.
    #[arg(long, value_enum)]
    boundary_layer: Option<OnOff>,
}

#[derive(Args, Debug)]
struct PenaltyArgs {
    /// j_min = h^p.
    #[arg(long = "jmin-exp", conflicts_with = "jmin")]
    exponent: Option<f64>,
    #[arg(long)]
    jmin: Option<f64>,
    /// Use per-interface h in j_min = h^p.
    #[arg(long)]
    local_penalty: bool,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
    solver: SolverArg,
    #[arg(long, value_enum, default_value_t = PrecondArg::TwoLevel)]
    preconditioner: PrecondArg,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OnOff {
    On,
    Off,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SolverArg {
    Cg,
    Cholesky,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PrecondArg {
    None,
    Jacobi,
    TwoLevel,
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, Error> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("--tol {} must lie in (0, 1)", self.tol)));
        }
        Ok(SolveOptions {
            solver: match self.solver {
                SolverArg::Cg => Solver::Cg,
                SolverArg::Cholesky => Solver::Cholesky,
                SolverArg::Auto => Solver::Auto,
            },
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolveOptions::default()
        })
    }

    fn kind(&self) -> PreconditionerKind {
        match self.preconditioner {
            PrecondArg::None => PreconditionerKind::None,
            PrecondArg::Jacobi => PreconditionerKind::Jacobi,
            PrecondArg::TwoLevel => PreconditionerKind::VertexGroups,
        }
    }
}

fn parse_selector(spec: &str) -> Result<InterfaceSelector, Error> {
    let bad = || Error::InvalidArgument(format!("bad selector '{spec}'"));
    let numbers = |s: &str| -> Result<Vec<f64>, Error> { s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect() };
    match spec {
        "all" => Ok(InterfaceSelector::All),
        "none" => Ok(InterfaceSelector::None),
        _ => {
            if let Some(rest) = spec.strip_prefix("circle:") {
                let v = numbers(rest)?;
                let (radius, center) = v.split_last().ok_or_else(bad)?;
                tfemdg::dgify::circular_front_selector(center, *radius)
            } else if let Some(rest) = spec.strip_prefix("ids:") {
                let ids = rest.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<Vec<usize>, _>>()?;
                Ok(InterfaceSelector::Ids(ids))
            } else {
                Err(bad())
            }
        }
    }
}

impl EditArgs {
    fn options(&self) -> Result<DgifyOptions, Error> {
        let selector = parse_selector(&self.selector)?;
        let default_layer = matches!(selector, InterfaceSelector::All);
        let boundary_layer = self.boundary_layer.map_or(default_layer, |b| b == OnOff::On);
        Ok(DgifyOptions { selector, boundary_layer })
    }
}

fn default_case(dim: usize) -> &'static str {
    match dim {
        1 => "interval_parabola",
        3 => "cube_trig",
        _ => "square_trig",
    }
}

fn provenance_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

fn load_provenance(path: &Path) -> Result<Provenance, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}

/// The edited mesh to work on: a DG-ified file with its provenance, or a
/// thick mesh (from file or generator) edited with `edit`.
fn load_dgified(source: &SourceArgs, edit: &EditArgs) -> Result<DgifyResult, Error> {
    let mesh: Mesh = match &source.mesh {
        Some(path) => read_mesh(path)?,
        None => unit_mesh(source.dim, source.n)?,
    };
    let has_dummies = mesh.classes().iter().any(|c| c.is_dummy());
    match (&source.provenance, has_dummies) {
        (Some(p), _) => DgifyResult::from_parts(mesh, load_provenance(p)?),
        (None, true) => Err(Error::InvalidArgument("a mesh with dummy elements needs --provenance".into())),
        (None, false) => dgify(&mesh, &edit.options()?),
    }
}

fn penalty_config(args: &PenaltyArgs, dg: &DgifyResult) -> Result<PenaltyConfig, Error> {
    let dim = dg.mesh.dim();
    let spec = match (args.jmin, args.exponent) {
        (Some(j), _) => PenaltySpec::Jmin(j),
        (None, p) => {
            let p = p.unwrap_or(dim as f64 + 2.0);
            if args.local_penalty {
                PenaltySpec::LocalExponent(p)
            } else {
                PenaltySpec::Exponent(p)
            }
        }
    };
    spec.config(dg.mesh.grid_spacing())
}

fn max_interface_jump(dg: &DgifyResult, u: &[f64]) -> f64 {
    dg.interfaces
        .iter()
        .flat_map(|i| i.left_vertices.iter().zip(&i.right_vertices).map(|(&l, &r)| (u[l] - u[r]).abs()))
        .fold(0.0, f64::max)
}

fn print_errors(dg: &DgifyResult, u: &[f64], case: &str) -> Result<(), Error> {
    let c = manufactured(case)?;
    println!("error L2        {:.6e}", error_l2(&dg.mesh, u, &|x| c.u(x)));
    println!("error H1 broken {:.6e}", error_h1_broken(&dg.mesh, u, &|x| c.grad(x)));
    Ok(())
}

fn cmd_solve(
    source: &SourceArgs,
    edit: &EditArgs,
    penalty: &PenaltyArgs,
    solver: &SolverArgs,
    case: Option<String>,
    out: Option<PathBuf>,
    include_dummies: bool,
) -> Result<(), Error> {
    let dg = load_dgified(source, edit)?;
    let case = case.unwrap_or_else(|| default_case(dg.mesh.dim()).to_string());
    let c = manufactured(&case)?;
    let config = penalty_config(penalty, &dg)?;
    let system = assemble_dgified(&dg, &config, &|x| c.f(x), &|x| c.u(x))?;
    let options = SolveOptions { preconditioner: preconditioner_for(&dg, solver.kind()), ..solver.options()? };
    let (u, report) = solve(&system, &options)?;
    println!("case            {case}");
    println!("elements        {} thick, {} dummy", dg.mesh.count_class(ElementClass::Thick), dg.mesh.num_elements() - dg.mesh.count_class(ElementClass::Thick));
    println!("unknowns        {} ({} constrained)", u.len(), system.dirichlet.len());
    println!("grid spacing h  {:.6e} (longest edge {:.6e})", dg.mesh.grid_spacing(), dg.mesh.mesh_size());
    println!("solver          {report}");
    println!("max jump        {:.6e}", max_interface_jump(&dg, &u));
    print_errors(&dg, &u, &case)?;
    if let Some(path) = out {
        write_vtk(&path, &dg.mesh, &[("u", &u)], include_dummies)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_convergence(
    case: Option<String>,
    dim: usize,
    exponents: Vec<f64>,
    ns: Vec<usize>,
    local: bool,
    layer: OnOff,
    solver: &SolverArgs,
    out: &Path,
) -> Result<(), Error> {
    let case = case.unwrap_or_else(|| default_case(dim).to_string());
    let mut config = SweepConfig::new(&case, exponents.clone(), ns);
    config.local = local;
    config.dgify.boundary_layer = layer == OnOff::On;
    config.solve = solver.options()?;
    config.preconditioner = solver.kind();
    let rows = exponent_sweep(&config)?;
    write_csv(&case, &rows, out)?;
    let svg = out.with_extension("svg");
    write_svg(&rows, &svg)?;
    println!("wrote {} and {}", out.display(), svg.display());
    for p in exponents {
        let recs: Vec<StudyRecord> = rows.iter().filter(|r| r.p == p).filter_map(|r| r.result.clone().ok()).collect();
        let rate = |k| fit_rate(&recs, k).map_or_else(|e| format!("n/a ({e})"), |s| format!("{s:.3}"));
        println!("p = {p}: L2 slope {}, H1 slope {}", rate(ErrorKind::L2), rate(ErrorKind::H1));
    }
    for row in rows.iter().filter(|r| r.result.is_err()) {
        println!("p = {} n = {} failed: {}", row.p, row.n, row.result.as_ref().unwrap_err());
    }
    Ok(())
}

fn cmd_front_demo(
    n: usize,
    radii: Vec<f64>,
    exponent: f64,
    case: Option<String>,
    solver: &SolverArgs,
    include_dummies: bool,
    out: &Path,
) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut config = FrontConfig::new(n, radii);
    config.exponent = exponent;
    config.solve = solver.options()?;
    if let Some(c) = case {
        config.case = c;
    }
    for (k, frame) in front_demo(&config)?.iter().enumerate() {
        let path = out.join(format!("frame_{k:03}.vtk"));
        write_vtk(&path, &frame.dg.mesh, &[("u", &frame.u)], include_dummies)?;
        println!(
            "radius {:.3}: {} interfaces, max jump inside {:.3e}, outside {:.3e} -> {}",
            frame.radius,
            frame.selected,
            frame.max_jump_inside,
            frame.max_jump_outside,
            path.display()
        );
    }
    Ok(())
}

fn cmd_compare(
    source: &SourceArgs,
    edit: &EditArgs,
    penalty: &PenaltyArgs,
    solver: &SolverArgs,
    case: Option<String>,
    threshold: f64,
) -> Result<bool, Error> {
    let dg = load_dgified(source, edit)?;
    let config = penalty_config(penalty, &dg)?;
    let case = case.unwrap_or_else(|| default_case(dg.mesh.dim()).to_string());
    let c = manufactured(&case)?;
    let fem = assemble_stiffness(&dg.mesh, &config.element_thresholds(&dg))?;
    let scheme = DgScheme { quadrature: EdgeQuadrature::Vertex, penalty: DgPenalty::matching_threshold(&dg, &config) };
    let (oracle, _) = assemble_dg_operator(&dg, &scheme, &|x| c.f(x))?;
    let matrix_diff = fem.max_relative_difference(&oracle);

    let options = SolveOptions { preconditioner: preconditioner_for(&dg, solver.kind()), ..solver.options()? };
    let (u_fem, _) = solve(&assemble_dgified(&dg, &config, &|x| c.f(x), &|x| c.u(x))?, &options)?;
    let (u_dg, _) = solve(&assemble_dg(&dg, &scheme, &|x| c.f(x), &|x| c.u(x))?, &options)?;
    let solution_diff = u_fem.iter().zip(&u_dg).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = u_fem.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    println!("interfaces                     {}", dg.interfaces.len());
    println!("max relative matrix difference {matrix_diff:.3e}");
    println!("max solution difference        {solution_diff:.3e}");
    let ok = matrix_diff <= threshold && solution_diff <= threshold * scale * 1e2;
    println!("{}", if ok { "equivalent" } else { "NOT equivalent" });
    Ok(ok)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate { dim, n, out } => {
            let mesh = unit_mesh(dim, n)?;
            write_mesh(&mesh, &out)?;
            println!("wrote {} elements, {} vertices to {}", mesh.num_elements(), mesh.num_vertices(), out.display());
        }
        Command::Dgify { mesh, edit, out, provenance } => {
            let dg = dgify(&read_mesh(&mesh)?, &edit.options()?)?;
            write_mesh(&dg.mesh, &out)?;
            let prov_path = provenance.unwrap_or_else(|| provenance_path(&out));
            let json = serde_json::to_string_pretty(&dg.provenance()).expect("provenance serializes");
            std::fs::write(&prov_path, json).map_err(|e| Error::io(&prov_path, e))?;
            println!(
                "{} thick, {} interface, {} boundary elements; {} vertices -> {} (+ {})",
                dg.mesh.count_class(ElementClass::Thick),
                dg.mesh.count_class(ElementClass::InterfaceDummy),
                dg.mesh.count_class(ElementClass::BoundaryDummy),
                dg.mesh.num_vertices(),
                out.display(),
                prov_path.display()
            );
        }
        Command::Solve { source, edit, penalty, solver, case, out, include_dummies } => {
            cmd_solve(&source, &edit, &penalty, &solver, case, out, include_dummies)?
        }
        Command::Convergence { case, dim, exponents, n, local_penalty, boundary_layer, solver, out } => {
            if n.is_empty() {
                return Err(Error::InvalidArgument("--n needs at least one mesh size".into()));
            }
            cmd_convergence(case, dim, exponents, n, local_penalty, boundary_layer, &solver, &out)?
        }
        Command::FrontDemo { n, radii, exponent, case, solver, include_dummies, out } => {
            cmd_front_demo(n, radii, exponent, case, &solver, include_dummies, &out)?
        }
        Command::Compare { source, edit, penalty, solver, case, threshold } => {
            if !cmd_compare(&source, &edit, &penalty, &solver, case, threshold)? {
                return Ok(ExitCode::from(EXIT_EQUIVALENCE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NotConverged(_) | Error::NotSpd { .. } | Error::ZeroDiagonal(_) => ExitCode::from(EXIT_SOLVER),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}
