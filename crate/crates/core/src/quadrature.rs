//! Symmetric quadrature rules on the reference simplex.
//!
//! Points are stored in barycentric coordinates and weights sum to one, so an
//! integral over an element is `measure * sum_q w_q f(x_q)`.

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    degree: usize,
    points: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Cheapest built-in rule on the `dim`-simplex exact for polynomials of
    /// total degree `degree`. Panics above degree 5.
    pub fn for_degree(dim: usize, degree: usize) -> Self {
        match (dim, degree) {
            (1, 0..=5) => gauss_interval_3(),
            (2, 0..=4) => triangle_6(),
            (2, 5) => triangle_7(),
            (3, 0..=4) => tet_11(),
            (3, 5) => tet_14(),
            _ => panic!("no quadrature rule for dim {dim}, degree {degree}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(barycentric point, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(move |p| &p[..=self.dim]).zip(self.weights.iter().copied())
    }
}

fn gauss_interval_3() -> QuadratureRule {
    let s = 0.5 * (0.6f64).sqrt();
    QuadratureRule {
        dim: 1,
        degree: 5,
        points: vec![[0.5 + s, 0.5 - s, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0], [0.5 - s, 0.5 + s, 0.0, 0.0]],
        weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
    }
}

/// All distinct permutations of `(a, a, b)`.
fn orbit_s21(a: f64) -> Vec<[f64; 4]> {
    let b = 1.0 - 2.0 * a;
    vec![[a, a, b, 0.0], [a, b, a, 0.0], [b, a, a, 0.0]]
}

fn triangle_6() -> QuadratureRule {
    let mut points = orbit_s21(0.445_948_490_915_965);
    points.extend(orbit_s21(0.091_576_213_509_771));
    let (wa, wb) = (0.223_381_589_678_011, 0.109_951_743_655_322);
    QuadratureRule { dim: 2, degree: 4, points, weights: vec![wa, wa, wa, wb, wb, wb] }
}

fn triangle_7() -> QuadratureRule {
    let r = 15f64.sqrt();
    let (a1, a2) = ((6.0 - r) / 21.0, (6.0 + r) / 21.0);
    let (w1, w2) = ((155.0 - r) / 1200.0, (155.0 + r) / 1200.0);
    let mut points = vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]];
    points.extend(orbit_s21(a1));
    points.extend(orbit_s21(a2));
    QuadratureRule { dim: 2, degree: 5, points, weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2] }
}

/// Permutations of `(a, a, a, 1 - 3a)`.
fn orbit_s31(a: f64) -> Vec<[f64; 4]> {
    let b = 1.0 - 3.0 * a;
    vec![[a, a, a, b], [a, a, b, a], [a, b, a, a], [b, a, a, a]]
}

/// Permutations of `(a, a, 1/2 - a, 1/2 - a)`.
fn orbit_s22(a: f64) -> Vec<[f64; 4]> {
    let b = 0.5 - a;
    vec![[a, a, b, b], [a, b, a, b], [a, b, b, a], [b, a, a, b], [b, a, b, a], [b, b, a, a]]
}

fn tet_11() -> QuadratureRule {
    let mut points = vec![[0.25; 4]];
    points.extend(orbit_s31(1.0 / 14.0));
    points.extend(orbit_s22(0.399_403_576_166_799_2));
    let mut weights = vec![-0.078_933_333_333_333_33];
    weights.extend([0.045_733_333_333_333_33; 4]);
    weights.extend([0.149_333_333_333_333_33; 6]);
    QuadratureRule { dim: 3, degree: 4, points, weights }
}

fn tet_14() -> QuadratureRule {
    let mut points = orbit_s31(0.092_735_250_310_891_2);
    points.extend(orbit_s31(0.310_885_919_263_300_6));
    points.extend(orbit_s22(0.045_503_704_125_649_6));
    let mut weights = vec![0.073_493_043_116_361_9; 4];
    weights.extend([0.112_687_925_718_015_9; 4]);
    weights.extend([0.042_546_020_777_081_2; 6]);
    QuadratureRule { dim: 3, degree: 5, points, weights }
}
