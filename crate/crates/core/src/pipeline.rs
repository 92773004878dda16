//! End-to-end runs: mesh, DG-ify, assemble, solve, measure.

use std::time::Instant;

use crate::analysis::{error_h1_broken, error_l2, facet_jumps, jump_norm, manufactured, StudyRecord};
use crate::assembly::{assemble_dgified, PenaltyConfig, ThresholdMode};
use crate::dg_oracle::DgPenalty;
use crate::dgify::{circular_front_selector, dgify, DgifyOptions, DgifyResult};
use crate::error::{Error, Result};
use crate::mesh::{crisscross_square, cube_tets, interval, Mesh};
use crate::solve::{solve, Preconditioner, SolveOptions, SolveReport};

/// Unit interval, criss-cross unit square or Kuhn-split unit cube.
pub fn unit_mesh(dim: usize, n: usize) -> Result<Mesh> {
    match dim {
        1 => interval(n),
        2 => crisscross_square(n),
        3 => cube_tets(n),
        _ => Err(Error::InvalidArgument(format!("dimension {dim} is not 1, 2 or 3"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltySpec {
    /// Global `j_min = h^p` with `h` the grid spacing.
    Exponent(f64),
    Jmin(f64),
    /// Per-interface `j_min = h_loc^p`.
    LocalExponent(f64),
}

impl PenaltySpec {
    pub fn config(&self, h: f64) -> Result<PenaltyConfig> {
        match *self {
            PenaltySpec::Exponent(p) => PenaltyConfig::from_exponent(h, p),
            PenaltySpec::Jmin(j) => PenaltyConfig::global(j),
            PenaltySpec::LocalExponent(p) => Ok(PenaltyConfig::local(p)),
        }
    }

    /// Exponent `p` reported in study tables.
    pub fn exponent(&self, h: f64) -> f64 {
        match *self {
            PenaltySpec::Exponent(p) | PenaltySpec::LocalExponent(p) => p,
            PenaltySpec::Jmin(j) => j.ln() / h.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    Jacobi,
    /// Two-level method grouping all copies of each original vertex.
    VertexGroups,
}

/// The CG preconditioner for a system on `dg`. Constrained vertices get
/// groups of their own so the coarse space never mixes their unit rows with
/// penalty-scaled ones.
pub fn preconditioner_for(dg: &DgifyResult, kind: PreconditionerKind) -> Preconditioner {
    match kind {
        PreconditionerKind::None => Preconditioner::None,
        PreconditionerKind::Jacobi => Preconditioner::Jacobi,
        PreconditionerKind::VertexGroups => {
            let mut groups: Vec<usize> = dg.vertex_provenance.iter().map(|o| o.original()).collect();
            let first = groups.iter().max().map_or(0, |m| m + 1);
            for (k, &v) in dg.dirichlet_vertices().iter().enumerate() {
                groups[v] = first + k;
            }
            Preconditioner::TwoLevel(groups)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: String,
    pub n: usize,
    pub penalty: PenaltySpec,
    pub dgify: DgifyOptions,
    pub solve: SolveOptions,
    pub preconditioner: PreconditionerKind,
}

impl RunConfig {
    /// Fully DG-ified mesh with boundary layer and default solver settings.
    pub fn new(case: &str, n: usize, penalty: PenaltySpec) -> Self {
        RunConfig {
            case: case.to_string(),
            n,
            penalty,
            dgify: DgifyOptions::full_dg(),
            solve: SolveOptions { tol: 1e-12, ..SolveOptions::default() },
            preconditioner: PreconditionerKind::VertexGroups,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dg: DgifyResult,
    pub penalty: PenaltyConfig,
    pub u: Vec<f64>,
    pub report: SolveReport,
    pub record: StudyRecord,
}

/// Assembles and solves on an already edited mesh.
pub fn solve_dgified(
    dg: &DgifyResult,
    penalty: &PenaltyConfig,
    case: &str,
    options: &SolveOptions,
    kind: PreconditionerKind,
) -> Result<(Vec<f64>, SolveReport)> {
    let case = manufactured(case)?;
    if case.dim != dg.mesh.dim() {
        return Err(Error::InvalidArgument(format!("case {} needs a {}D mesh", case.id, case.dim)));
    }
    let system = assemble_dgified(dg, penalty, &|x| case.f(x), &|x| case.u(x))?;
    let options = SolveOptions { preconditioner: preconditioner_for(dg, kind), ..options.clone() };
    solve(&system, &options)
}

pub fn run_case(config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let case = manufactured(&config.case)?;
    let mesh = unit_mesh(case.dim, config.n)?;
    let dg = dgify(&mesh, &config.dgify)?;
    let h = dg.mesh.grid_spacing();
    let penalty = config.penalty.config(h)?;
    let (u, report) = solve_dgified(&dg, &penalty, case.id, &config.solve, config.preconditioner)?;
    let record = StudyRecord {
        case: case.id.to_string(),
        dim: case.dim,
        p: config.penalty.exponent(h),
        n: config.n,
        h,
        j_min: match penalty.mode {
            ThresholdMode::Global(j) => j,
            ThresholdMode::Local { exponent } => h.powf(exponent),
        },
        dofs: u.len() - dg.dirichlet_vertices().len(),
        err_l2: error_l2(&dg.mesh, &u, &|x| case.u(x)),
        err_h1: error_h1_broken(&dg.mesh, &u, &|x| case.grad(x)),
        jump: jump_norm(&dg, &u, None),
        iterations: report.iterations,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!("{} n={} p={:.2}: L2 {:.3e} H1 {:.3e} ({})", case.id, config.n, record.p, record.err_l2, record.err_h1, report);
    Ok(RunOutput { dg, penalty, u, report, record })
}

/// Per-interface penalties realized by `penalty` on `dg`.
pub fn realized_penalties(dg: &DgifyResult, penalty: &PenaltyConfig) -> Vec<f64> {
    match DgPenalty::matching_threshold(dg, penalty) {
        DgPenalty::PerInterface(v) => v,
        DgPenalty::Uniform(d) => vec![d; dg.interfaces.len()],
    }
}

#[derive(Debug, Clone)]
pub struct FrontFrame {
    pub radius: f64,
    pub dg: DgifyResult,
    pub u: Vec<f64>,
    pub selected: usize,
    /// Largest nodal jump over selected facets (0 if none).
    pub max_jump_inside: f64,
    /// Largest nodal jump over unselected interior facets.
    pub max_jump_outside: f64,
}

#[derive(Debug, Clone)]
pub struct FrontConfig {
    pub case: String,
    pub n: usize,
    pub radii: Vec<f64>,
    /// `j_min = h^p`; `p = dim + 1` gives `D ~ h^-2`.
    pub exponent: f64,
    pub center: Vec<f64>,
    pub solve: SolveOptions,
}

impl FrontConfig {
    pub fn new(n: usize, radii: Vec<f64>) -> Self {
        FrontConfig {
            case: "square_trig".into(),
            n,
            radii,
            exponent: 3.0,
            center: vec![0.5, 0.5],
            solve: SolveOptions { tol: 1e-13, ..SolveOptions::default() },
        }
    }
}

/// One DG-ify + solve per radius of a circular front that switches facets
/// from continuous to discontinuous. Boundary values are imposed strongly so
/// the radius-0 frame is plain FEM.
pub fn front_demo(config: &FrontConfig) -> Result<Vec<FrontFrame>> {
    if config.radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("front radii must be nondecreasing".into()));
    }
    let case = manufactured(&config.case)?;
    let mesh = unit_mesh(case.dim, config.n)?;
    let h = mesh.grid_spacing();
    let penalty = PenaltyConfig::from_exponent(h, config.exponent)?;
    config
        .radii
        .iter()
        .map(|&radius| {
            let selector = circular_front_selector(&config.center, radius)?;
            let dg = dgify(&mesh, &DgifyOptions { selector: selector.clone(), boundary_layer: false })?;
            let (u, _) = solve_dgified(&dg, &penalty, case.id, &config.solve, PreconditionerKind::VertexGroups)?;
            let jumps = facet_jumps(&dg, &u);
            let selected: Vec<bool> = {
                let mut s = vec![false; jumps.len()];
                for iface in dg.interior_interfaces() {
                    s[iface.facet] = true;
                }
                s
            };
            let max_over = |want: bool| {
                jumps.iter().zip(&selected).filter(|(_, &s)| s == want).map(|(j, _)| *j).fold(0.0, f64::max)
            };
            Ok(FrontFrame {
                radius,
                selected: selected.iter().filter(|&&s| s).count(),
                max_jump_inside: max_over(true),
                max_jump_outside: max_over(false),
                dg,
                u,
            })
        })
        .collect()
}

/// Continuous P1 FEM with strong boundary values, for comparison.
pub fn plain_fem(case: &str, n: usize, exponent: f64, options: &SolveOptions) -> Result<(DgifyResult, Vec<f64>)> {
    let c = manufactured(case)?;
    let mesh = unit_mesh(c.dim, n)?;
    let penalty = PenaltyConfig::from_exponent(mesh.grid_spacing(), exponent)?;
    let dg = dgify(&mesh, &DgifyOptions { selector: crate::dgify::InterfaceSelector::None, boundary_layer: false })?;
    let (u, _) = solve_dgified(&dg, &penalty, case, options, PreconditionerKind::VertexGroups)?;
    Ok((dg, u))
}
