//! Affine maps from the reference simplex.
//!
//! The reference simplex has vertices `0, e_1, ..., e_d`. An element with
//! vertices `p_0..p_d` is the image of `x -> B x + p_0` where the columns of
//! `B` are `p_i - p_0`.

/// Affine map of a simplex with its determinant and adjugate.
///
/// The adjugate is kept separately from the determinant so that gradients of
/// the barycentric basis can be written as `adj(B)^T g / det B`; the
/// numerator stays finite when the element collapses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    dim: usize,
    /// `matrix[r][c]` is component `r` of `p_{c+1} - p_0`.
    matrix: [[f64; 3]; 3],
    offset: [f64; 3],
    det: f64,
    adjugate: [[f64; 3]; 3],
}

impl AffineMap {
    /// Builds the map for `dim + 1` points of dimension `dim`.
    ///
    /// Panics if the point count or coordinate lengths are inconsistent.
    pub fn new(points: &[&[f64]]) -> Self {
        let dim = points.len() - 1;
        assert!((1..=3).contains(&dim), "simplex dimension must be 1, 2 or 3");
        let mut offset = [0.0; 3];
        offset[..dim].copy_from_slice(points[0]);
        let mut m = [[0.0; 3]; 3];
        for c in 0..dim {
            let p = points[c + 1];
            assert_eq!(p.len(), dim, "point dimension mismatch");
            for r in 0..dim {
                m[r][c] = p[r] - offset[r];
            }
        }
        let (det, adjugate) = det_adj(dim, &m);
        AffineMap { dim, matrix: m, offset, det, adjugate }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.matrix
    }

    pub fn adjugate(&self) -> &[[f64; 3]; 3] {
        &self.adjugate
    }

    /// Image of a reference point.
    pub fn apply(&self, reference: &[f64]) -> [f64; 3] {
        let mut x = self.offset;
        for r in 0..self.dim {
            for c in 0..self.dim {
                x[r] += self.matrix[r][c] * reference[c];
            }
        }
        x
    }

    /// Measure `|det B| / dim!` of the simplex.
    pub fn measure(&self) -> f64 {
        self.det.abs() / factorial(self.dim)
    }

    /// `adj(B)^T g`, the scaled physical gradient of a function with
    /// reference gradient `g`.
    pub fn scaled_gradient(&self, g: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            for (k, gk) in g.iter().enumerate().take(self.dim) {
                *o += self.adjugate[k][i] * gk;
            }
        }
        out
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn det_adj(dim: usize, m: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let mut adj = [[0.0; 3]; 3];
    match dim {
        1 => {
            adj[0][0] = 1.0;
            (m[0][0], adj)
        }
        2 => {
            adj[0][0] = m[1][1];
            adj[0][1] = -m[0][1];
            adj[1][0] = -m[1][0];
            adj[1][1] = m[0][0];
            (m[0][0] * m[1][1] - m[0][1] * m[1][0], adj)
        }
        3 => {
            // adj[i][j] = cofactor C_{ji}
            adj[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
            adj[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
            adj[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
            adj[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
            adj[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
            adj[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
            adj[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
            adj[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
            adj[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
            (det, adj)
        }
        _ => unreachable!(),
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `(dim)`-dimensional measure of a facet given by `dim` points embedded in
/// `dim`-space: 1 for a point, length for a segment, area for a triangle.
pub fn facet_measure(points: &[&[f64]]) -> f64 {
    match points.len() {
        1 => 1.0,
        2 => distance(points[0], points[1]),
        3 => {
            let u: Vec<f64> = points[1].iter().zip(points[0]).map(|(a, b)| a - b).collect();
            let v: Vec<f64> = points[2].iter().zip(points[0]).map(|(a, b)| a - b).collect();
            let c = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
        n => panic!("facet with {n} points is not supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_inverts_nondegenerate_maps() {
        let pts: [&[f64]; 4] = [&[0.1, 0.2, 0.3], &[1.3, 0.1, 0.0], &[0.2, 0.9, 0.4], &[0.0, 0.3, 1.7]];
        let map = AffineMap::new(&pts);
        let m = map.matrix();
        let a = map.adjugate();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i][k] * m[k][j]).sum();
                let expect = if i == j { map.det() } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn collapsed_triangle_has_zero_det_and_finite_adjugate() {
        let pts: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]];
        let map = AffineMap::new(&pts);
        assert_eq!(map.det(), 0.0);
        assert!(map.adjugate().iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn facet_measures() {
        assert_eq!(facet_measure(&[&[0.3]]), 1.0);
        assert!((facet_measure(&[&[0.0, 0.0], &[3.0, 4.0]]) - 5.0).abs() < 1e-15);
        let a = facet_measure(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!((a - 0.5).abs() < 1e-15);
    }
}
