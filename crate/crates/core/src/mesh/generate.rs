//! Structured generators on the unit interval, square and cube.

use super::{ElementClass, Mesh};
use crate::error::{Error, Result};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of subdivisions must be at least 1".into()));
    }
    Ok(())
}

/// Uniform mesh of `[0, 1]` with `n` elements.
pub fn interval(n: usize) -> Result<Mesh> {
    check_n(n)?;
    let coords = (0..=n).map(|i| i as f64 / n as f64).collect();
    let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::from_thick(1, coords, cells)
}

/// Unit square split into `n x n` cells, each cut into two triangles by the
/// diagonal from the lower-left to the upper-right corner.
pub fn crisscross_square(n: usize) -> Result<Mesh> {
    check_n(n)?;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut coords = Vec::with_capacity(2 * (n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            coords.push(i as f64 / n as f64);
            coords.push(j as f64 / n as f64);
        }
    }
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    Mesh::from_thick(2, coords, cells)
}

const AXIS_PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Unit cube split into `n^3` cells, each cut into six tetrahedra sharing the
/// main diagonal (Kuhn split).
pub fn cube_tets(n: usize) -> Result<Mesh> {
    check_n(n)?;
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut coords = Vec::with_capacity(3 * (n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                coords.extend_from_slice(&[i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in AXIS_PERMUTATIONS {
                    let mut corner = [i, j, k];
                    cells.push(id(corner[0], corner[1], corner[2]));
                    for axis in perm {
                        corner[axis] += 1;
                        cells.push(id(corner[0], corner[1], corner[2]));
                    }
                }
            }
        }
    }
    Mesh::from_thick(3, coords, cells)
}

/// Interval mesh of `[0, 1]` with `n` thick cells separated by small cells of
/// length `beta` carrying diffusion `beta * penalty`.
///
/// Node `i` of the uniform mesh is replaced by a small cell `[y_i, x_i]`; at
/// interior nodes it is centred on the node, at the ends it sits inside the
/// domain. Returns the mesh together with `[y_i, x_i]` vertex ids per node, so
/// `y_0` and `x_n` are the two boundary vertices.
pub fn interval_beta_mesh(n: usize, beta: f64, penalty: f64) -> Result<(Mesh, Vec<[usize; 2]>)> {
    check_n(n)?;
    let h = 1.0 / n as f64;
    if !(beta > 0.0 && beta < 0.5 * h) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must lie in (0, h/2)")));
    }
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::InvalidArgument("penalty must be positive".into()));
    }
    let mut coords = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        let t = i as f64 * h;
        let (y, x) = if i == 0 {
            (0.0, beta)
        } else if i == n {
            (1.0 - beta, 1.0)
        } else {
            (t - 0.5 * beta, t + 0.5 * beta)
        };
        coords.push(y);
        coords.push(x);
    }
    let nodes: Vec<[usize; 2]> = (0..=n).map(|i| [2 * i, 2 * i + 1]).collect();
    let mut cells = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..=n {
        cells.extend_from_slice(&nodes[i]);
        coefficients.push(beta * penalty);
        if i < n {
            cells.extend_from_slice(&[nodes[i][1], nodes[i + 1][0]]);
            coefficients.push(1.0);
        }
    }
    let n_el = coefficients.len();
    let mesh = Mesh::new(1, coords, cells, vec![ElementClass::Thick; n_el], coefficients)?;
    Ok((mesh, nodes))
}
