//! Linear solvers for the assembled SPD systems.

use std::fmt;
use std::time::Instant;

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Systems up to this size go to the dense Cholesky solver in `Auto` mode.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
    /// Exact solves on groups of unknowns plus a coarse space that is
    /// constant on every group. `groups[i]` is the group of unknown `i`.
    /// With groups = copies of one original vertex, the coarse space is
    /// continuous P1 and the method is robust in the penalty size.
    TwoLevel(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Cg,
    Cholesky,
    Auto,
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Solver::Cg),
            "cholesky" | "direct" => Ok(Solver::Cholesky),
            "auto" => Ok(Solver::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub solver: Solver,
    pub preconditioner: Preconditioner,
    /// Relative residual target for CG.
    pub tol: f64,
    /// `None` means `20 n`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { solver: Solver::Auto, preconditioner: Preconditioner::Jacobi, tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: &'static str,
    /// CG iterations, or iterative-refinement steps of a direct solve.
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from the returned solution.
    pub relative_residual: f64,
    pub seconds: f64,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = if self.method == "pcg" { "iterations" } else { "refinement steps" };
        write!(
            f,
            "{} after {} {unit}, relative residual {:.3e}, {:.3}s",
            self.method, self.iterations, self.relative_residual, self.seconds
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    precond: &Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.n();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("rhs has length {}, matrix is {n}x{n}", b.len())));
    }
    let m = Applied::new(a, precond)?;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let nb = norm(b);
    let mut report = SolveReport { method: "pcg", iterations: 0, relative_residual: 0.0, seconds: 0.0 };
    if nb == 0.0 {
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut converged = false;
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        report.iterations = it;
        if norm(&r) <= tol * nb {
            // guard against drift of the recursive residual
            if relative_residual(a, &x, b) <= tol {
                converged = true;
                break;
            }
            r = b.iter().zip(a.mul_vec(&x)).map(|(bi, ai)| bi - ai).collect();
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    report.relative_residual = relative_residual(a, &x, b);
    report.seconds = start.elapsed().as_secs_f64();
    if converged || report.relative_residual <= tol {
        Ok((x, report))
    } else {
        Err(Error::NotConverged(report))
    }
}

/// Dense Cholesky factorization and solve.
pub fn dense_cholesky(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.n();
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("rhs has length {}, matrix is {n}x{n}", b.len())));
    }
    let mut l = a.to_dense();
    dense_factor(n, &mut l)?;
    let mut y = b.to_vec();
    dense_substitute(n, &l, &mut y);
    let steps = refine(a, b, &mut y, |r| dense_substitute(n, &l, r));
    let report = SolveReport {
        method: "cholesky",
        iterations: steps,
        relative_residual: relative_residual(a, &y, b),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((y, report))
}

/// Sparse direct solve through [`EnvelopeCholesky`].
pub fn envelope_cholesky(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    if b.len() != a.n() {
        return Err(Error::InvalidArgument(format!("rhs has length {}, matrix is {0}x{0}", a.n())));
    }
    let factor = EnvelopeCholesky::new(a)?;
    let mut x = vec![0.0; a.n()];
    factor.solve_into(b, &mut x);
    let mut dx = vec![0.0; a.n()];
    let steps = refine(a, b, &mut x, |r| {
        factor.solve_into(r, &mut dx);
        r.copy_from_slice(&dx);
    });
    let report = SolveReport {
        method: "envelope-cholesky",
        iterations: steps,
        relative_residual: relative_residual(a, &x, b),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

/// Iterative refinement with the factorization behind `correct`, which
/// overwrites a residual with the correction. Strong penalties make the
/// factor lose digits that a few steps recover. Returns the steps kept.
fn refine(a: &CsrMatrix, b: &[f64], x: &mut [f64], mut correct: impl FnMut(&mut [f64])) -> usize {
    const MAX_STEPS: usize = 3;
    let residual = |x: &[f64]| -> Vec<f64> { b.iter().zip(a.mul_vec(x)).map(|(bi, ai)| bi - ai).collect() };
    let mut r = residual(x);
    let mut rn = norm(&r);
    for step in 0..MAX_STEPS {
        if rn == 0.0 {
            return step;
        }
        correct(&mut r);
        let trial: Vec<f64> = x.iter().zip(&r).map(|(xi, di)| xi + di).collect();
        let r_trial = residual(&trial);
        let tn = norm(&r_trial);
        if !(tn < rn) {
            return step;
        }
        x.copy_from_slice(&trial);
        r = r_trial;
        rn = tn;
    }
    MAX_STEPS
}

/// In-place lower Cholesky factor of a dense row-major SPD matrix.
fn dense_factor(n: usize, l: &mut [f64]) -> Result<()> {
    for j in 0..n {
        let mut d = l[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotSpd { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = l[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(())
}

fn dense_substitute(n: usize, l: &[f64], y: &mut [f64]) {
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
}

/// Reverse Cuthill–McKee ordering of the graph of `a`; `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                seen[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization under an RCM reordering.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> =
            (0..n).map(|i| a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i)).collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let j = inv[j];
                if j <= i {
                    values[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = values[start[i] + j - first[i]];
                for k in lo..j {
                    s -= values[start[i] + k - first[i]] * values[start[j] + k - first[j]];
                }
                if j < i {
                    values[start[i] + j - first[i]] = s / values[start[j] + j - first[j]];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::NotSpd { pivot: perm[i], value: s });
                    }
                    values[start[i] + i - first[i]] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky { perm, first, start, values })
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        let at = |i: usize, j: usize| self.values[self.start[i] + j - self.first[i]];
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= at(i, k) * y[k];
            }
            y[i] = s / at(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= at(i, i);
            let yi = y[i];
            for k in self.first[i]..i {
                y[k] -= at(i, k) * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}

struct TwoLevelData {
    blocks: Vec<(Vec<usize>, Vec<f64>)>,
    groups: Vec<usize>,
    coarse: EnvelopeCholesky,
    n_coarse: usize,
}

enum Applied {
    Scale(Vec<f64>),
    TwoLevel(Box<TwoLevelData>),
}

impl Applied {
    fn new(a: &CsrMatrix, precond: &Preconditioner) -> Result<Self> {
        let n = a.n();
        Ok(match precond {
            Preconditioner::None => Applied::Scale(vec![1.0; n]),
            Preconditioner::Jacobi => Applied::Scale(
                a.diagonal()
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| if d > 0.0 { Ok(1.0 / d) } else { Err(Error::ZeroDiagonal(i)) })
                    .collect::<Result<_>>()?,
            ),
            Preconditioner::TwoLevel(groups) => {
                if groups.len() != n {
                    return Err(Error::InvalidArgument(format!("{} group labels for {n} unknowns", groups.len())));
                }
                // relabel groups densely in order of first appearance
                let mut label = std::collections::HashMap::new();
                let dense: Vec<usize> = groups
                    .iter()
                    .map(|g| {
                        let next = label.len();
                        *label.entry(*g).or_insert(next)
                    })
                    .collect();
                let n_coarse = label.len();
                let mut members = vec![Vec::new(); n_coarse];
                for (i, &g) in dense.iter().enumerate() {
                    members[g].push(i);
                }
                use rayon::prelude::*;
                let blocks = members
                    .into_par_iter()
                    .map(|dofs| {
                        let m = dofs.len();
                        let mut block = vec![0.0; m * m];
                        for (r, &i) in dofs.iter().enumerate() {
                            for (c, &j) in dofs.iter().enumerate() {
                                block[r * m + c] = a.get(i, j);
                            }
                        }
                        dense_factor(m, &mut block)?;
                        Ok((dofs, block))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let coarse_pattern: Vec<[usize; 2]> = (0..n)
                    .flat_map(|i| a.row(i).map(move |(j, _)| (i, j)))
                    .map(|(i, j)| [dense[i], dense[j]])
                    .collect();
                let mut coarse = CsrMatrix::from_connectivity(n_coarse, coarse_pattern.iter().map(|p| &p[..]));
                for i in 0..n {
                    for (j, v) in a.row(i) {
                        coarse.add(dense[i], dense[j], v);
                    }
                }
                let coarse = EnvelopeCholesky::new(&coarse)?;
                Applied::TwoLevel(Box::new(TwoLevelData { blocks, groups: dense, coarse, n_coarse }))
            }
        })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Applied::Scale(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri * di;
                }
            }
            Applied::TwoLevel(t) => {
                let mut rc = vec![0.0; t.n_coarse];
                for (i, &g) in t.groups.iter().enumerate() {
                    rc[g] += r[i];
                }
                let mut xc = vec![0.0; t.n_coarse];
                t.coarse.solve_into(&rc, &mut xc);
                for (i, &g) in t.groups.iter().enumerate() {
                    z[i] = xc[g];
                }
                for (dofs, l) in &t.blocks {
                    let mut y: Vec<f64> = dofs.iter().map(|&i| r[i]).collect();
                    dense_substitute(dofs.len(), l, &mut y);
                    for (&i, yi) in dofs.iter().zip(y) {
                        z[i] += yi;
                    }
                }
            }
        }
    }
}

pub fn solve_matrix(a: &CsrMatrix, b: &[f64], options: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let solver = match options.solver {
        Solver::Auto if a.n() <= DENSE_LIMIT => Solver::Cholesky,
        Solver::Auto => Solver::Cg,
        s => s,
    };
    match solver {
        Solver::Cholesky if a.n() <= DENSE_LIMIT => dense_cholesky(a, b),
        Solver::Cholesky => envelope_cholesky(a, b),
        _ => cg_solve(a, b, &options.preconditioner, options.tol, options.max_iter.unwrap_or(20 * a.n().max(1))),
    }
}

/// Solves an eliminated system. Constrained unknowns are decoupled identity
/// rows, so their prescribed values are written back exactly; an iterative
/// solve would otherwise leave them with an error invisible in the residual
/// next to large penalty rows.
pub fn solve(system: &LinearSystem, options: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    log::debug!("solving system with {} unknowns, {} nonzeros", system.n(), system.matrix.nnz());
    let (mut x, mut report) = solve_matrix(&system.matrix, &system.rhs, options)?;
    if !system.dirichlet.is_empty() {
        for (&i, &g) in &system.dirichlet {
            x[i] = g;
        }
        report.relative_residual = relative_residual(&system.matrix, &x, &system.rhs);
    }
    log::debug!("{report}");
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> CsrMatrix {
        // deterministic LCG, A = M^T M + n I
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m: Vec<f64> = (0..n * n).map(|_| next()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += n as f64;
        }
        CsrMatrix::from_dense(n, &a)
    }

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let (x, rep) = cg_solve(&a, &b, &Preconditioner::Jacobi, 1e-12, 10).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(2, &[4.0, 1.0, 1.0, 3.0]);
        let b = [1.0, 2.0];
        for solver in [Solver::Cg, Solver::Cholesky] {
            let opts = SolveOptions { solver, tol: 1e-14, ..Default::default() };
            let (x, _) = solve_matrix(&a, &b, &opts).unwrap();
            assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
            assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
        }
    }

    #[test]
    fn solvers_agree_on_random_spd() {
        let a = spd(50, 7);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let (x1, _) = cg_solve(&a, &b, &Preconditioner::None, 1e-13, 1000).unwrap();
        let (x2, r2) = dense_cholesky(&a, &b).unwrap();
        assert!(r2.relative_residual < 1e-14);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_system() {
        let n = 5;
        let mut d = vec![0.0; n * n];
        (0..n).for_each(|i| d[i * n + i] = 2.0);
        let (x, _) = dense_cholesky(&CsrMatrix::from_dense(n, &d), &vec![1.0; n]).unwrap();
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn envelope_matches_dense() {
        let a = spd(40, 11);
        let b: Vec<f64> = (0..40).map(|i| (0.3 * i as f64).cos()).collect();
        let (x1, _) = dense_cholesky(&a, &b).unwrap();
        let (x2, r) = envelope_cholesky(&a, &b).unwrap();
        assert!(r.relative_residual < 1e-13);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_preconditioner_converges() {
        let a = spd(24, 5);
        let b = vec![1.0; 24];
        let groups: Vec<usize> = (0..24).map(|i| i / 5).collect();
        let (x, rep) = cg_solve(&a, &b, &Preconditioner::TwoLevel(groups), 1e-12, 200).unwrap();
        let (y, _) = dense_cholesky(&a, &b).unwrap();
        assert!(rep.relative_residual <= 1e-12);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
        // singleton groups: coarse solve is exact, block part is Jacobi
        let (_, rep) = cg_solve(&a, &b, &Preconditioner::TwoLevel((0..24).collect()), 1e-12, 200).unwrap();
        assert!(rep.iterations <= 24);
    }

    #[test]
    fn zero_diagonal_rejected_by_jacobi() {
        let a = CsrMatrix::from_dense(2, &[0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(cg_solve(&a, &[1.0, 1.0], &Preconditioner::Jacobi, 1e-10, 10), Err(Error::ZeroDiagonal(0))));
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_dense(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(dense_cholesky(&a, &[1.0, 0.0]), Err(Error::NotSpd { .. })));
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = spd(20, 3);
        let b = vec![1.0; 20];
        match cg_solve(&a, &b, &Preconditioner::None, 1e-15, 2) {
            Err(Error::NotConverged(rep)) => assert_eq!(rep.iterations, 2),
            other => panic!("{other:?}"),
        }
    }
}
