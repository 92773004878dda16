//! Checks shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use nalgebra::DMatrix;
use tfemdg::assembly::{assemble_dgified, assemble_stiffness, LinearSystem, PenaltyConfig};
use tfemdg::dgify::{dgify, DgifyOptions, DgifyResult, InterfaceSelector};
use tfemdg::pipeline::unit_mesh;
use tfemdg::quadrature::QuadratureRule;
use tfemdg::sparse::CsrMatrix;

pub fn dgified(dim: usize, n: usize, selector: InterfaceSelector, boundary_layer: bool) -> DgifyResult {
    dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector, boundary_layer }).unwrap()
}

pub fn pre_bc_matrix(dg: &DgifyResult, penalty: &PenaltyConfig) -> CsrMatrix {
    assemble_stiffness(&dg.mesh, &penalty.element_thresholds(dg)).unwrap()
}

pub fn system(dg: &DgifyResult, penalty: &PenaltyConfig) -> LinearSystem {
    let f = |x: &[f64]| 1.0 + x[0];
    let g = |x: &[f64]| x.iter().sum::<f64>();
    assemble_dgified(dg, penalty, &f, &g).unwrap()
}

/// `|A - A^T|_max / |A|_max`.
pub fn relative_asymmetry(a: &CsrMatrix) -> f64 {
    a.asymmetry() / a.max_abs()
}

/// `|A 1|_inf / |A|_max`.
pub fn relative_row_sum(a: &CsrMatrix) -> f64 {
    let ones = vec![1.0; a.n()];
    a.mul_vec(&ones).iter().fold(0.0_f64, |m, v| m.max(v.abs())) / a.max_abs()
}

/// Smallest eigenvalue of the system restricted to unconstrained unknowns.
pub fn smallest_free_eigenvalue(system: &LinearSystem) -> f64 {
    let free: Vec<usize> = (0..system.n()).filter(|i| !system.dirichlet.contains_key(i)).collect();
    if free.is_empty() {
        return f64::INFINITY;
    }
    let m = DMatrix::from_fn(free.len(), free.len(), |r, c| system.matrix.get(free[r], free[c]));
    m.symmetric_eigen().eigenvalues.min()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Largest error of the built-in rules over all monomials `x^a` with
/// `|a| <= degree` on the reference simplex, against `a! / (|a| + d)!`.
pub fn worst_monomial_error() -> f64 {
    let mut worst: f64 = 0.0;
    for dim in 1..=3 {
        for degree in 0..=5 {
            let rule = QuadratureRule::for_degree(dim, degree);
            for a in multi_indices(dim, degree) {
                let exact = a.iter().map(|&k| factorial(k)).product::<f64>() / factorial(a.iter().sum::<usize>() + dim);
                let approx: f64 = rule
                    .iter()
                    .map(|(bary, w)| w * a.iter().enumerate().map(|(i, &k)| bary[i + 1].powi(k as i32)).product::<f64>())
                    .sum::<f64>()
                    / factorial(dim);
                worst = worst.max((approx - exact).abs() / exact);
            }
        }
    }
    worst
}

fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|v| (0..=max).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out.retain(|v| v.iter().sum::<usize>() <= max);
    out
}

/// `(int_E g^2, |E| (g(a)^2 + g(b)^2) / 2)` for the linear function
/// `g(x) = c0 + c . x` on the segment `[a, b]`, the integral by 3-point Gauss.
pub fn edge_integrals(a: [f64; 2], b: [f64; 2], c0: f64, c: [f64; 2]) -> (f64, f64) {
    let g = |x: [f64; 2]| c0 + c[0] * x[0] + c[1] * x[1];
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let exact: f64 = QuadratureRule::for_degree(1, 2)
        .iter()
        .map(|(bary, w)| {
            let x = [bary[0] * a[0] + bary[1] * b[0], bary[0] * a[1] + bary[1] * b[1]];
            w * g(x).powi(2)
        })
        .sum::<f64>()
        * len;
    (exact, len * (g(a).powi(2) + g(b).powi(2)) / 2.0)
}

/// `target`, raised to the rounding floor `64 eps |A|_inf |x|_2 / |b|_2` of
/// the relative residual when the penalty makes `target` unreachable.
pub fn attainable_tolerance(a: &CsrMatrix, x: &[f64], b: &[f64], target: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let a_inf = (0..a.n()).map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    target.max(64.0 * f64::EPSILON * a_inf * norm(x) / norm(b))
}

/// Exponents `p` in `j_min = h^p` that the convergence experiments use per
/// dimension. Solver cross-checks run on these: at `D` beyond about 1e8 the
/// systems are so ill-conditioned that no two double-precision solves agree
/// to 1e-8.
pub fn experiment_exponents(dim: usize) -> &'static [f64] {
    match dim {
        1 => &[2.0, 3.0],
        2 => &[2.5, 3.0, 4.0, 5.0, 6.0],
        _ => &[3.5, 4.0, 5.0],
    }
}
