use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dgify::DgifyOptions;
use crate::error::{Error, Result};
use crate::pipeline::{run_case, PenaltySpec, PreconditionerKind, RunConfig};
use crate::solve::SolveOptions;

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRecord {
    pub case: String,
    pub dim: usize,
    pub p: f64,
    pub n: usize,
    pub h: f64,
    pub j_min: f64,
    pub dofs: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub jump: f64,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    L2,
    H1,
    Jump,
}

impl StudyRecord {
    pub fn error(&self, kind: ErrorKind) -> f64 {
        match kind {
            ErrorKind::L2 => self.err_l2,
            ErrorKind::H1 => self.err_h1,
            ErrorKind::Jump => self.jump,
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a slope needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive data".into()));
    }
    let m = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("log-log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Convergence rate of `kind` against `h` over at least three records.
/// Records with zero error are skipped with a warning.
pub fn fit_rate(records: &[StudyRecord], kind: ErrorKind) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 3 records, got {}", records.len())));
    }
    let mut hs: Vec<f64> = records.iter().map(|r| r.h).collect();
    hs.sort_by(f64::total_cmp);
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("rate fit needs distinct mesh sizes".into()));
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| {
            let keep = r.error(kind) != 0.0;
            if !keep {
                log::warn!("zero {kind:?} error at h = {} left out of the rate fit", r.h);
            }
            keep
        })
        .map(|r| (r.h, r.error(kind)))
        .collect();
    log_log_slope(&points)
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub case: String,
    pub exponents: Vec<f64>,
    pub ns: Vec<usize>,
    pub local: bool,
    pub dgify: DgifyOptions,
    pub solve: SolveOptions,
    pub preconditioner: PreconditionerKind,
}

impl SweepConfig {
    pub fn new(case: &str, exponents: Vec<f64>, ns: Vec<usize>) -> Self {
        let base = RunConfig::new(case, 1, PenaltySpec::Exponent(1.0));
        SweepConfig {
            case: case.to_string(),
            exponents,
            ns,
            local: false,
            dgify: base.dgify,
            solve: base.solve,
            preconditioner: base.preconditioner,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: f64,
    pub n: usize,
    pub result: std::result::Result<StudyRecord, String>,
}

/// Every `(p, n)` combination, `p` outermost. Rows run in parallel; failed
/// rows keep their error message and do not stop the sweep.
pub fn exponent_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.exponents.is_empty() || config.ns.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one exponent and one mesh size".into()));
    }
    crate::analysis::manufactured(&config.case)?;
    let jobs: Vec<(f64, usize)> = config.exponents.iter().flat_map(|&p| config.ns.iter().map(move |&n| (p, n))).collect();
    Ok(jobs
        .into_par_iter()
        .map(|(p, n)| {
            let run = RunConfig {
                case: config.case.clone(),
                n,
                penalty: if config.local { PenaltySpec::LocalExponent(p) } else { PenaltySpec::Exponent(p) },
                dgify: config.dgify.clone(),
                solve: config.solve.clone(),
                preconditioner: config.preconditioner,
            };
            let result = run_case(&run).map(|o| o.record).map_err(|e| {
                log::warn!("sweep row p={p} n={n} failed: {e}");
                e.to_string()
            });
            SweepRow { p, n, result }
        })
        .collect())
}

pub const CSV_HEADER: &str = "case,dim,p,n,h,jmin,dofs,err_l2,err_h1,jump,iters,seconds";

pub fn csv_string(case: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        match &row.result {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{:.10e},{:.10e},{},{:.10e},{:.10e},{:.10e},{},{:.4}",
                r.case, r.dim, r.p, r.n, r.h, r.j_min, r.dofs, r.err_l2, r.err_h1, r.jump, r.iterations, r.seconds
            ),
            Err(_) => writeln!(out, "{case},,{},{},,,,nan,nan,nan,,", row.p, row.n),
        }
        .expect("writing to a String");
    }
    out
}

pub fn write_csv(case: &str, rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(case, rows)).map_err(|e| Error::io(path, e))
}

/// Log-log plot of L2 (solid) and broken H1 (dashed) errors against `h`,
/// one colour per exponent, with slope-1 and slope-2 guides.
pub fn svg_string(rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let ok: Vec<&StudyRecord> = rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let vals: Vec<(f64, f64)> = ok
        .iter()
        .flat_map(|r| [(r.h, r.err_l2), (r.h, r.err_h1)])
        .filter(|&(h, e)| h > 0.0 && e > 0.0)
        .map(|(h, e)| (h.log10(), e.log10()))
        .collect();
    if vals.is_empty() {
        out.push_str("<text x=\"20\" y=\"40\">no successful runs</text>\n</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &vals {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = if x1 - x0 < 1e-9 { (x0 - 0.5, x1 + 0.5) } else { (x0, x1) };
    let (y0, y1) = (y0 - 0.3, y1 + 0.3);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let _ = writeln!(
        out,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 h</text>", W / 2.0, H - 15.0);
    let _ = writeln!(out, "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">log10 error</text>", H / 2.0, H / 2.0);
    // guides through the lower-left corner
    for (slope, label) in [(1.0, "slope 1"), (2.0, "slope 2")] {
        let ya = y0 + 0.3;
        let yb = ya + slope * (x1 - x0);
        let _ = writeln!(
            out,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\" stroke-dasharray=\"2,4\"/><text x=\"{:.1}\" y=\"{:.1}\" fill=\"gray\" font-size=\"11\">{label}</text>",
            sx(x0), sy(ya), sx(x1), sy(yb), sx(x1) - 40.0, sy(yb).max(M + 12.0)
        );
    }
    const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
    let mut ps: Vec<f64> = ok.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    for (k, p) in ps.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let mut series: Vec<&&StudyRecord> = ok.iter().filter(|r| r.p == *p).collect();
        series.sort_by(|a, b| a.h.total_cmp(&b.h));
        for (dash, get) in [("", ErrorKind::L2), (" stroke-dasharray=\"6,3\"", ErrorKind::H1)] {
            let pts: Vec<String> = series
                .iter()
                .filter(|r| r.error(get) > 0.0)
                .map(|r| format!("{:.1},{:.1}", sx(r.h.log10()), sy(r.error(get).log10())))
                .collect();
            let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\"{dash}/>", pts.join(" "));
        }
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" fill=\"{colour}\" font-size=\"12\">p = {p}</text>", M + 8.0, M + 16.0 * (k as f64 + 1.0));
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, svg_string(rows)).map_err(|e| Error::io(path, e))
}
