//! Direct assembly of the Babuška–Zlámal jump-penalty DG scheme.
//!
//! This module shares no stiffness code with [`crate::assembly`]: volume
//! terms use explicitly inverted element maps and penalty terms are written
//! in the jump basis `[u]_a = u(left copy of a) - u(right copy of a)`.
//! It serves as the reference against which thresholded FEM is compared.

use std::collections::BTreeMap;

use crate::assembly::{apply_dirichlet, LinearSystem, PenaltyConfig, ScalarFn, LOAD_QUADRATURE_DEGREE};
use crate::dgify::{DgifyResult, Interface};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;

/// Per-vertex weights of the lumped face rule in 3D, relative to the face
/// area. Read off the thresholded stiffness of the locked three-tet prism
/// split; see the `face_weights_from_probe` test.
pub const FACE_VERTEX_WEIGHTS_3D: [f64; 3] = [1.0 / 3.0; 3];

/// `D_Gamma = FACE_PENALTY_SCALE_3D * area / j_min` in 3D, paired with
/// [`FACE_VERTEX_WEIGHTS_3D`].
pub const FACE_PENALTY_SCALE_3D: f64 = 2.0;

/// How the interface integral `int_Gamma [u][v]` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeQuadrature {
    /// Vertex (trapezoid) rule: the limit of thresholded FEM.
    Vertex,
    /// One-point midpoint/centroid rule (WOPSIP-style).
    Midpoint,
    /// Exact integral of the product of linear jumps.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DgPenalty {
    Uniform(f64),
    /// One value per entry of [`DgifyResult::interfaces`].
    PerInterface(Vec<f64>),
}

impl DgPenalty {
    /// The per-interface penalty realized by thresholded FEM under `penalty`.
    pub fn matching_threshold(dg: &DgifyResult, penalty: &PenaltyConfig) -> Self {
        let thresholds = penalty.element_thresholds(dg);
        let dim = dg.mesh.dim();
        DgPenalty::PerInterface(
            dg.interfaces
                .iter()
                .map(|iface| {
                    let j_min = iface.dummies.first().map_or_else(|| thresholds[iface.left_element], |&e| thresholds[e]);
                    crate::assembly::d_from_jmin(dim, iface.measure, j_min)
                })
                .collect(),
        )
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            DgPenalty::Uniform(d) => *d,
            DgPenalty::PerInterface(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgScheme {
    pub quadrature: EdgeQuadrature,
    pub penalty: DgPenalty,
}

/// Jump `u(left copy) - u(right copy)` at local vertex `i` of `iface`.
pub fn jump_at_vertex(values: &[f64], iface: &Interface, i: usize) -> f64 {
    values[iface.left_vertices[i]] - values[iface.right_vertices[i]]
}

/// Symmetric weight matrix `W` (row-major, `m x m`, `m` = facet vertex count)
/// such that the penalty is `D * sum_ab W_ab [u]_a [v]_b`.
pub fn penalty_weights(dim: usize, measure: f64, quadrature: EdgeQuadrature) -> Vec<f64> {
    let m = dim;
    let mut w = vec![0.0; m * m];
    match quadrature {
        EdgeQuadrature::Vertex => {
            for a in 0..m {
                w[a * m + a] = measure
                    * match dim {
                        1 => 1.0,
                        2 => 0.5,
                        3 => FACE_VERTEX_WEIGHTS_3D[a],
                        _ => unreachable!(),
                    };
            }
        }
        EdgeQuadrature::Midpoint => {
            let c = measure / (m * m) as f64;
            w.iter_mut().for_each(|x| *x = c);
        }
        EdgeQuadrature::Exact => {
            // int over a (m-1)-simplex of lambda_a lambda_b = |F| (1 + delta_ab) / (m (m + 1))
            let c = measure / (m * (m + 1)) as f64;
            for a in 0..m {
                for b in 0..m {
                    w[a * m + b] = c * if a == b { 2.0 } else { 1.0 };
                }
            }
        }
    }
    w
}

/// Inverse transpose of the element map applied to reference gradients,
/// computed by Gauss–Jordan elimination; returns gradients and `|det|`.
fn physical_gradients(mesh: &Mesh, e: usize) -> (Vec<Vec<f64>>, f64) {
    let d = mesh.dim();
    let ids = mesh.element(e);
    let p0 = mesh.vertex(ids[0]);
    // rows of B^T are the edge vectors p_i - p_0
    let mut a: Vec<Vec<f64>> = (1..=d)
        .map(|i| {
            let pi = mesh.vertex(ids[i]);
            let mut row: Vec<f64> = (0..d).map(|c| pi[c] - p0[c]).collect();
            row.extend((0..d).map(|c| if c == i - 1 { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut det = 1.0;
    for col in 0..d {
        let piv = (col..d).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..d {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * d {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    // a[.][d..] = (B^T)^{-1}; gradient of lambda_i (i >= 1) is its column i-1
    let inv: Vec<Vec<f64>> = a.iter().map(|row| row[d..].to_vec()).collect();
    let mut grads = vec![vec![0.0; d]; d + 1];
    for i in 1..=d {
        for r in 0..d {
            grads[i][r] = inv[r][i - 1];
        }
    }
    for r in 0..d {
        grads[0][r] = -(1..=d).map(|i| grads[i][r]).sum::<f64>();
    }
    (grads, det.abs())
}

fn factorial(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// Matrix and load of the DG scheme with the DOF layout of `dg`, before
/// boundary conditions.
pub fn assemble_dg_operator(dg: &DgifyResult, scheme: &DgScheme, f: ScalarFn<'_>) -> Result<(CsrMatrix, Vec<f64>)> {
    let mesh = &dg.mesh;
    let d = mesh.dim();
    let n = mesh.num_vertices();
    if let DgPenalty::PerInterface(v) = &scheme.penalty {
        if v.len() != dg.interfaces.len() {
            return Err(Error::InvalidArgument("one penalty value per interface is required".into()));
        }
    }
    for (i, iface) in dg.interfaces.iter().enumerate() {
        if iface.left_vertices.len() != d || iface.right_vertices.len() != d {
            return Err(Error::UnmatchedInterface(i));
        }
        if iface.left_vertices.iter().chain(&iface.right_vertices).any(|&v| v >= n) {
            return Err(Error::UnmatchedInterface(i));
        }
        if !(scheme.penalty.value(i) > 0.0) {
            return Err(Error::InvalidArgument(format!("interface {i} has nonpositive penalty")));
        }
    }

    let thick: Vec<usize> = mesh.thick_elements().collect();
    let couplings: Vec<Vec<usize>> = thick
        .iter()
        .map(|&e| mesh.element(e).to_vec())
        .chain(dg.interfaces.iter().map(|i| i.left_vertices.iter().chain(&i.right_vertices).copied().collect()))
        .collect();
    let mut a = CsrMatrix::from_connectivity(n, couplings.iter().map(|c| c.as_slice()));
    let mut b = vec![0.0; n];
    let rule = QuadratureRule::for_degree(d, LOAD_QUADRATURE_DEGREE);

    for &e in &thick {
        let (grads, det) = physical_gradients(mesh, e);
        let vol = det / factorial(d);
        let coeff = mesh.coefficient(e);
        let ids = mesh.element(e);
        for (i, gi) in grads.iter().enumerate() {
            for (j, gj) in grads.iter().enumerate() {
                let dot: f64 = gi.iter().zip(gj).map(|(x, y)| x * y).sum();
                a.add(ids[i], ids[j], coeff * vol * dot);
            }
        }
        let pts: Vec<&[f64]> = ids.iter().map(|&v| mesh.vertex(v)).collect();
        for (bary, w) in rule.iter() {
            let x: Vec<f64> = (0..d).map(|c| bary.iter().zip(&pts).map(|(l, p)| l * p[c]).sum()).collect();
            let fx = f(&x);
            for (k, &v) in ids.iter().enumerate() {
                b[v] += vol * w * fx * bary[k];
            }
        }
    }

    for (idx, iface) in dg.interfaces.iter().enumerate() {
        let w = penalty_weights(d, iface.measure, scheme.quadrature);
        let pen = scheme.penalty.value(idx);
        for p in 0..d {
            for q in 0..d {
                let wpq = pen * w[p * d + q];
                if wpq == 0.0 {
                    continue;
                }
                let (lp, rp) = (iface.left_vertices[p], iface.right_vertices[p]);
                let (lq, rq) = (iface.left_vertices[q], iface.right_vertices[q]);
                a.add(lp, lq, wpq);
                a.add(lp, rq, -wpq);
                a.add(rp, lq, -wpq);
                a.add(rp, rq, wpq);
            }
        }
    }
    Ok((a, b))
}

/// DG system with Dirichlet data `g` on the constrained vertices of `dg`.
pub fn assemble_dg(dg: &DgifyResult, scheme: &DgScheme, f: ScalarFn<'_>, g: ScalarFn<'_>) -> Result<LinearSystem> {
    let (mut matrix, mut rhs) = assemble_dg_operator(dg, scheme, f)?;
    let dirichlet: BTreeMap<usize, f64> = dg.dirichlet_vertices().iter().map(|&v| (v, g(dg.mesh.vertex(v)))).collect();
    apply_dirichlet(&mut matrix, &mut rhs, &dirichlet);
    Ok(LinearSystem { matrix, rhs, dirichlet })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgify::{dgify, DgifyOptions};
    use crate::mesh::{crisscross_square, interval};

    #[test]
    fn jump_examples() {
        let dg = dgify(&crisscross_square(2).unwrap(), &DgifyOptions::full_dg()).unwrap();
        let ones = vec![1.0; dg.mesh.num_vertices()];
        let iface = &dg.interfaces[0];
        assert_eq!(jump_at_vertex(&ones, iface, 0), 0.0);
        let mut indicator = vec![0.0; dg.mesh.num_vertices()];
        for &v in dg.mesh.element(iface.left_element) {
            indicator[v] = 1.0;
        }
        assert_eq!(jump_at_vertex(&indicator, iface, 0), 1.0);
        assert_eq!(jump_at_vertex(&indicator, iface, 1), 1.0);
        let linear: Vec<f64> =
            (0..dg.mesh.num_vertices()).map(|v| 3.0 * dg.mesh.vertex(v)[0] - 0.7 * dg.mesh.vertex(v)[1]).collect();
        for iface in &dg.interfaces {
            for i in 0..2 {
                assert!(jump_at_vertex(&linear, iface, i).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn schemes_agree_for_constant_jumps() {
        for dim in 1..=3 {
            let measure = 0.37;
            let vals: Vec<f64> = [EdgeQuadrature::Vertex, EdgeQuadrature::Midpoint, EdgeQuadrature::Exact]
                .iter()
                .map(|&q| penalty_weights(dim, measure, q).iter().sum())
                .collect();
            for v in &vals {
                assert!((v - measure).abs() < 1e-15, "dim {dim}: {vals:?}");
            }
        }
    }

    #[test]
    fn volume_gradients_match_classical_triangle() {
        let mesh = Mesh::from_thick(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2]).unwrap();
        let (g, det) = physical_gradients(&mesh, 0);
        assert_eq!(det, 1.0);
        assert_eq!(g, vec![vec![-1.0, -1.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn penalty_length_mismatch_rejected() {
        let dg = dgify(&interval(3).unwrap(), &DgifyOptions::full_dg()).unwrap();
        let scheme = DgScheme { quadrature: EdgeQuadrature::Vertex, penalty: DgPenalty::PerInterface(vec![1.0]) };
        assert!(assemble_dg_operator(&dg, &scheme, &|_| 0.0).is_err());
    }

    fn fem_vs_oracle(dg: &DgifyResult, penalty: &PenaltyConfig, quadrature: EdgeQuadrature) -> f64 {
        let fem = crate::assembly::assemble_stiffness(&dg.mesh, &penalty.element_thresholds(dg)).unwrap();
        let scheme = DgScheme { quadrature, penalty: DgPenalty::matching_threshold(dg, penalty) };
        let (oracle, _) = assemble_dg_operator(dg, &scheme, &|_| 0.0).unwrap();
        fem.max_relative_difference(&oracle)
    }

    #[test]
    fn interval_equivalence() {
        for layer in [false, true] {
            let dg = dgify(&interval(10).unwrap(), &DgifyOptions { boundary_layer: layer, ..DgifyOptions::full_dg() })
                .unwrap();
            let diff = fem_vs_oracle(&dg, &PenaltyConfig::global(1e-3).unwrap(), EdgeQuadrature::Vertex);
            assert!(diff <= 1e-12, "{diff}");
        }
    }

    #[test]
    fn square_equivalence_vertex_rule() {
        for n in [1, 2, 4] {
            let dg = dgify(&crisscross_square(n).unwrap(), &DgifyOptions::full_dg()).unwrap();
            for j in [1e-2, 1e-4, 1e-8] {
                let diff = fem_vs_oracle(&dg, &PenaltyConfig::global(j).unwrap(), EdgeQuadrature::Vertex);
                assert!(diff <= 1e-12, "n {n} j_min {j}: {diff}");
            }
            if n > 1 {
                let diff = fem_vs_oracle(&dg, &PenaltyConfig::local(5.0), EdgeQuadrature::Vertex);
                assert!(diff <= 1e-12, "local n {n}: {diff}");
            }
            // other edge rules are genuinely different schemes
            let diff = fem_vs_oracle(&dg, &PenaltyConfig::global(1e-4).unwrap(), EdgeQuadrature::Exact);
            assert!(diff > 1e-3);
        }
    }

    #[test]
    fn cube_equivalence_vertex_rule() {
        for n in [1, 2] {
            let dg = dgify(&crate::mesh::cube_tets(n).unwrap(), &DgifyOptions::full_dg()).unwrap();
            for j in [1e-2, 1e-6] {
                let diff = fem_vs_oracle(&dg, &PenaltyConfig::global(j).unwrap(), EdgeQuadrature::Vertex);
                assert!(diff <= 1e-12, "n {n} j_min {j}: {diff}");
            }
        }
    }

    /// Reads the 3D vertex weights off the thresholded stiffness of a single
    /// interior face between two tets.
    #[test]
    fn face_weights_from_probe() {
        let coords = vec![0.0, 0.0, 0.0, 1.3, 0.1, 0.0, 0.2, 0.9, 0.1, 0.3, 0.2, 1.1, 0.4, 0.5, -0.8];
        let mesh = Mesh::from_thick(3, coords, vec![0, 1, 2, 3, 0, 1, 2, 4]).unwrap();
        let dg = dgify(&mesh, &DgifyOptions { boundary_layer: false, ..DgifyOptions::full_dg() }).unwrap();
        assert_eq!(dg.interfaces.len(), 1);
        let iface = &dg.interfaces[0];
        let j_min = 1e-3;
        let thresholds: Vec<f64> = (0..dg.mesh.num_elements()).map(|_| j_min).collect();
        let full = crate::assembly::assemble_stiffness(&dg.mesh, &thresholds).unwrap();
        let thick_only = crate::assembly::assemble_stiffness(
            &Mesh::from_thick(3, dg.mesh.coords().to_vec(), dg.mesh.cells()[..8].to_vec()).unwrap(),
            &[j_min, j_min],
        )
        .unwrap();
        let n = dg.mesh.num_vertices();
        let penalty = |i: usize, j: usize| full.get(i, j) - if i.max(j) < thick_only.n() { thick_only.get(i, j) } else { 0.0 };

        // diagonal in the jump basis: only (left_a, right_a) pairs couple
        let (l, r) = (&iface.left_vertices, &iface.right_vertices);
        for i in 0..n {
            for j in 0..n {
                let pair = (0..3).any(|a| (l[a] == i && r[a] == j) || (l[a] == j && r[a] == i));
                let diag = (0..3).any(|a| (l[a] == i || r[a] == i) && i == j);
                if !pair && !diag {
                    assert!(penalty(i, j).abs() < 1e-9 * full.max_abs(), "({i},{j}) = {}", penalty(i, j));
                }
            }
        }
        let c: Vec<f64> = (0..3).map(|a| -penalty(l[a], r[a])).collect();
        let area = iface.measure;
        // normalize so the weights integrate constants exactly
        let scale = c.iter().sum::<f64>() * j_min / (area * area);
        let weights: Vec<f64> = c.iter().map(|ca| ca * j_min / (scale * area * area)).collect();
        assert!((scale - FACE_PENALTY_SCALE_3D).abs() < 1e-10, "scale {scale}");
        for (w, w_ref) in weights.iter().zip(FACE_VERTEX_WEIGHTS_3D) {
            assert!((w - w_ref).abs() < 1e-10, "{weights:?}");
        }
    }
}
