//! The one-dimensional limit `beta -> 0` of meshes whose interface cells of
//! width `beta` carry diffusion `beta * D`.

use crate::assembly::{assemble, assemble_dgified, PenaltyConfig, ScalarFn};
use crate::dgify::{dgify, DgifyOptions, VertexOrigin};
use crate::error::Result;
use crate::mesh::{interval, interval_beta_mesh};
use crate::solve::{solve, SolveOptions};

/// Max nodal difference between the solution on the explicit `beta`-mesh and
/// thresholded FEM with `j_min = 1 / D` on the DG-ified interval.
/// Homogeneous Dirichlet data at both ends.
pub fn beta_limit_difference(n: usize, beta: f64, d: f64, f: ScalarFn<'_>) -> Result<f64> {
    let options = SolveOptions { solver: crate::solve::Solver::Cholesky, ..SolveOptions::default() };

    let dg = dgify(&interval(n)?, &DgifyOptions::full_dg())?;
    let limit = assemble_dgified(&dg, &PenaltyConfig::global(1.0 / d)?, f, &|_| 0.0)?;
    let (u0, _) = solve(&limit, &options)?;

    let (mesh, nodes) = interval_beta_mesh(n, beta, d)?;
    let pinned = [(nodes[0][0], 0.0), (nodes[n][1], 0.0)].into_iter().collect();
    let thresholds = vec![f64::MIN_POSITIVE; mesh.num_elements()];
    let system = assemble(&mesh, &thresholds, f, pinned)?;
    let (ub, _) = solve(&system, &options)?;

    // element I_i spans (x_i, y_{i+1}) on the beta-mesh and owns copies
    // (left, right) on the DG-ified mesh; outer vertices match the ends
    let mut diff: f64 = 0.0;
    for i in 0..n {
        let cell = dg.mesh.element(i);
        diff = diff.max((u0[cell[0]] - ub[nodes[i][1]]).abs());
        diff = diff.max((u0[cell[1]] - ub[nodes[i + 1][0]]).abs());
    }
    for (&v, origin) in dg.outer_boundary_vertices.iter().map(|v| (v, &dg.vertex_provenance[*v])) {
        let VertexOrigin::Outer { original } = origin else { continue };
        let node = if *original == 0 { nodes[0][0] } else { nodes[n][1] };
        diff = diff.max((u0[v] - ub[node]).abs());
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_shrinks_linearly_in_beta() {
        let n = 10;
        let h = 1.0 / n as f64;
        let d = h.powi(-3);
        let diffs: Vec<f64> =
            [1e-2, 1e-3, 1e-4].iter().map(|s| beta_limit_difference(n, s * h, d, &|_| 4.0).unwrap()).collect();
        for w in diffs.windows(2) {
            assert!(w[0] / w[1] >= 8.0, "{diffs:?}");
        }
    }
}
