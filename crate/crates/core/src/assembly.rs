//! P1 assembly with a Jacobian threshold.
//!
//! The only departure from textbook P1 FEM is in [`element_stiffness`]: the
//! determinant in the stiffness denominator is replaced by
//! `max(|det B|, j_min)`. Gradients are written as `adj(B)^T g / det B`, so
//! the numerator stays finite on collapsed elements and a zero-measure
//! element contributes a penalty of size `1 / j_min`. Loads use the true
//! determinant and vanish on dummies.

use std::collections::BTreeMap;

use crate::dgify::DgifyResult;
use crate::error::{Error, Result};
pub use crate::geometry::AffineMap;
use crate::geometry::factorial;
use crate::mesh::{ElementClass, Mesh};
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;

/// Scalar field `x -> f(x)`.
pub type ScalarFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Quadrature degree used for load vectors.
pub const LOAD_QUADRATURE_DEGREE: usize = 4;

/// Gradients of the barycentric P1 basis on the reference simplex.
pub fn reference_gradients(dim: usize) -> Vec<[f64; 3]> {
    assert!((1..=3).contains(&dim));
    let mut g = vec![[0.0; 3]; dim + 1];
    for k in 0..dim {
        g[0][k] = -1.0;
        g[k + 1][k] = 1.0;
    }
    g
}

/// Thresholded P1 stiffness, row-major `(dim+1) x (dim+1)`.
pub fn element_stiffness(points: &[&[f64]], j_min: f64, coeff: f64) -> Result<Vec<f64>> {
    if !(j_min > 0.0) {
        return Err(Error::InvalidArgument(format!("j_min = {j_min} must be positive")));
    }
    let map = AffineMap::new(points);
    Ok(stiffness_from_map(&map, j_min, coeff))
}

fn stiffness_from_map(map: &AffineMap, j_min: f64, coeff: f64) -> Vec<f64> {
    let d = map.dim();
    let k = d + 1;
    let grads: Vec<[f64; 3]> = reference_gradients(d).iter().map(|g| map.scaled_gradient(g)).collect();
    let scale = coeff / (factorial(d) * map.det().abs().max(j_min));
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let dot: f64 = (0..d).map(|c| grads[i][c] * grads[j][c]).sum();
            out[i * k + j] = scale * dot;
            out[j * k + i] = scale * dot;
        }
    }
    out
}

/// `b_i = int_K f phi_i` with a fixed-degree rule and the true determinant.
pub fn element_load(points: &[&[f64]], f: ScalarFn<'_>, degree: usize) -> Vec<f64> {
    let map = AffineMap::new(points);
    load_from_map(&map, f, degree)
}

fn load_from_map(map: &AffineMap, f: ScalarFn<'_>, degree: usize) -> Vec<f64> {
    let d = map.dim();
    let mut b = vec![0.0; d + 1];
    let measure = map.measure();
    if measure == 0.0 {
        return b;
    }
    let rule = QuadratureRule::for_degree(d, degree);
    for (bary, w) in rule.iter() {
        let x = map.apply(&bary[1..]);
        let fx = f(&x[..d]);
        for (bi, li) in b.iter_mut().zip(bary) {
            *bi += w * fx * li;
        }
    }
    b.iter_mut().for_each(|bi| *bi *= measure);
    b
}

/// `J_min = h^p`.
pub fn jmin_from_exponent(h: f64, p: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("mesh size h = {h} must be positive")));
    }
    Ok(h.powf(p))
}

/// Penalty `D_Gamma` realized by a zero-measure interface with facet measure
/// `measure` under threshold `j_min`.
///
/// 1D: `1 / j_min`. 2D: `|Gamma| / j_min`. 3D: `c * area / j_min` with the
/// split-dependent constant [`crate::dg_oracle::FACE_PENALTY_SCALE_3D`].
pub fn d_from_jmin(dim: usize, measure: f64, j_min: f64) -> f64 {
    match dim {
        1 => 1.0 / j_min,
        2 => measure / j_min,
        3 => crate::dg_oracle::FACE_PENALTY_SCALE_3D * measure / j_min,
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// One `j_min` for every element.
    Global(f64),
    /// `j_min = h_loc^p` per element, `h_loc` being the shortest edge of the
    /// thick elements adjacent to the interface (or of the element itself).
    Local { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub mode: ThresholdMode,
}

impl PenaltyConfig {
    pub fn global(j_min: f64) -> Result<Self> {
        if !(j_min > 0.0) {
            return Err(Error::InvalidArgument(format!("j_min = {j_min} must be positive")));
        }
        Ok(PenaltyConfig { mode: ThresholdMode::Global(j_min) })
    }

    /// Global `j_min = h^p`.
    pub fn from_exponent(h: f64, p: f64) -> Result<Self> {
        Self::global(jmin_from_exponent(h, p)?)
    }

    pub fn local(exponent: f64) -> Self {
        PenaltyConfig { mode: ThresholdMode::Local { exponent } }
    }

    /// Per-element thresholds for the mesh of `dg`.
    pub fn element_thresholds(&self, dg: &DgifyResult) -> Vec<f64> {
        self.thresholds_for(&dg.mesh, Some(dg))
    }

    /// Per-element thresholds for a mesh; local mode needs the interface
    /// map of `dg` to size dummy elements.
    pub fn thresholds_for(&self, mesh: &Mesh, dg: Option<&DgifyResult>) -> Vec<f64> {
        match self.mode {
            ThresholdMode::Global(j) => vec![j; mesh.num_elements()],
            ThresholdMode::Local { exponent } => {
                let owner = dg.map(|d| d.interface_of_element());
                (0..mesh.num_elements())
                    .map(|e| {
                        let h = match (mesh.class(e), &owner, dg) {
                            (ElementClass::Thick, _, _) => mesh.element_min_edge(e),
                            (_, Some(owner), Some(dg)) => {
                                let iface = &dg.interfaces[owner[e].expect("dummy without interface")];
                                let hl = mesh.element_min_edge(iface.left_element);
                                iface.right_element.map_or(hl, |r| hl.min(mesh.element_min_edge(r)))
                            }
                            _ => mesh.element_min_edge(e),
                        };
                        h.powf(exponent)
                    })
                    .collect()
            }
        }
    }
}

/// Assembled system after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: BTreeMap<usize, f64>,
}

impl LinearSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }
}

/// Global stiffness over all elements before boundary conditions.
///
/// Thick elements below their threshold are rejected rather than silently
/// penalized.
pub fn assemble_stiffness(mesh: &Mesh, thresholds: &[f64]) -> Result<CsrMatrix> {
    assert_eq!(thresholds.len(), mesh.num_elements());
    let k = mesh.dim() + 1;
    let mut a = CsrMatrix::from_connectivity(mesh.num_vertices(), mesh.cells().chunks(k));
    for e in 0..mesh.num_elements() {
        let j_min = thresholds[e];
        if !(j_min > 0.0) {
            return Err(Error::InvalidArgument(format!("j_min = {j_min} must be positive")));
        }
        let map = mesh.affine_map(e);
        if mesh.class(e) == ElementClass::Thick && map.det().abs() < j_min {
            return Err(Error::ThickBelowThreshold { element: e, det: map.det().abs(), j_min });
        }
        let ke = stiffness_from_map(&map, j_min, mesh.coefficient(e));
        let ids = mesh.element(e);
        for (i, &gi) in ids.iter().enumerate() {
            for (j, &gj) in ids.iter().enumerate() {
                a.add(gi, gj, ke[i * k + j]);
            }
        }
    }
    Ok(a)
}

/// Load vector from thick elements; dummies have zero measure.
pub fn assemble_load(mesh: &Mesh, f: ScalarFn<'_>) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_vertices()];
    for e in mesh.thick_elements() {
        let be = load_from_map(&mesh.affine_map(e), f, LOAD_QUADRATURE_DEGREE);
        for (&g, v) in mesh.element(e).iter().zip(be) {
            b[g] += v;
        }
    }
    b
}

/// Symmetric elimination: constrained rows and columns are zeroed, the
/// diagonal set to one and the right-hand side corrected.
pub fn apply_dirichlet(matrix: &mut CsrMatrix, rhs: &mut [f64], dirichlet: &BTreeMap<usize, f64>) {
    let n = matrix.n();
    let mut pinned = vec![None; n];
    for (&i, &g) in dirichlet {
        pinned[i] = Some(g);
    }
    let row_ptr = matrix.row_ptr().to_vec();
    let col_idx = matrix.col_idx().to_vec();
    let values = matrix.values_mut();
    for i in 0..n {
        for p in row_ptr[i]..row_ptr[i + 1] {
            let j = col_idx[p];
            match (pinned[i], pinned[j]) {
                (Some(_), _) => values[p] = if i == j { 1.0 } else { 0.0 },
                (None, Some(g)) => {
                    rhs[i] -= values[p] * g;
                    values[p] = 0.0;
                }
                (None, None) => {}
            }
        }
    }
    for (&i, &g) in dirichlet {
        rhs[i] = g;
    }
}

/// Stiffness, load and Dirichlet elimination in one go.
pub fn assemble(
    mesh: &Mesh,
    thresholds: &[f64],
    f: ScalarFn<'_>,
    dirichlet: BTreeMap<usize, f64>,
) -> Result<LinearSystem> {
    let mut matrix = assemble_stiffness(mesh, thresholds)?;
    let mut rhs = assemble_load(mesh, f);
    apply_dirichlet(&mut matrix, &mut rhs, &dirichlet);
    Ok(LinearSystem { matrix, rhs, dirichlet })
}

/// Dirichlet values `g(x_v)` on the constrained vertices of `dg`.
pub fn dirichlet_from(dg: &DgifyResult, g: ScalarFn<'_>) -> BTreeMap<usize, f64> {
    dg.dirichlet_vertices().iter().map(|&v| (v, g(dg.mesh.vertex(v)))).collect()
}

/// Thresholded FEM on a DG-ified mesh with Dirichlet data `g`.
pub fn assemble_dgified(
    dg: &DgifyResult,
    penalty: &PenaltyConfig,
    f: ScalarFn<'_>,
    g: ScalarFn<'_>,
) -> Result<LinearSystem> {
    assemble(&dg.mesh, &penalty.element_thresholds(dg), f, dirichlet_from(dg, g))
}
