use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const CASE_IDS: [&str; 4] = ["interval_parabola", "square_trig", "square_trig_x", "cube_trig"];

/// A smooth exact solution with `f = -Laplace(u)` and Dirichlet trace `u`.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub id: &'static str,
    pub dim: usize,
    u: fn(&[f64]) -> f64,
    grad: fn(&[f64]) -> [f64; 3],
    f: fn(&[f64]) -> f64,
}

impl ManufacturedCase {
    pub fn u(&self, x: &[f64]) -> f64 {
        (self.u)(x)
    }

    pub fn grad(&self, x: &[f64]) -> [f64; 3] {
        (self.grad)(x)
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

const TAU: f64 = 2.0 * PI;

pub fn manufactured(id: &str) -> Result<ManufacturedCase> {
    let case = match id {
        "interval_parabola" => ManufacturedCase {
            id: "interval_parabola",
            dim: 1,
            u: |x| 2.0 * x[0] * (1.0 - x[0]),
            grad: |x| [2.0 - 4.0 * x[0], 0.0, 0.0],
            f: |_| 4.0,
        },
        "square_trig" => ManufacturedCase {
            id: "square_trig",
            dim: 2,
            u: |x| (TAU * x[0]).cos() * (TAU * x[1]).sin(),
            grad: |x| {
                [-TAU * (TAU * x[0]).sin() * (TAU * x[1]).sin(), TAU * (TAU * x[0]).cos() * (TAU * x[1]).cos(), 0.0]
            },
            f: |x| 2.0 * TAU * TAU * (TAU * x[0]).cos() * (TAU * x[1]).sin(),
        },
        // cos(2 pi x) sin(2 pi x) = sin(4 pi x) / 2, taken literally
        "square_trig_x" => ManufacturedCase {
            id: "square_trig_x",
            dim: 2,
            u: |x| 0.5 * (2.0 * TAU * x[0]).sin(),
            grad: |x| [TAU * (2.0 * TAU * x[0]).cos(), 0.0, 0.0],
            f: |x| 2.0 * TAU * TAU * (2.0 * TAU * x[0]).sin(),
        },
        "cube_trig" => ManufacturedCase {
            id: "cube_trig",
            dim: 3,
            u: |x| (TAU * x[0]).cos() * (TAU * x[1]).sin() * (TAU * x[2]).cos(),
            grad: |x| {
                let (cx, sx) = ((TAU * x[0]).cos(), (TAU * x[0]).sin());
                let (cy, sy) = ((TAU * x[1]).cos(), (TAU * x[1]).sin());
                let (cz, sz) = ((TAU * x[2]).cos(), (TAU * x[2]).sin());
                [-TAU * sx * sy * cz, TAU * cx * cy * cz, -TAU * cx * sy * sz]
            },
            f: |x| 3.0 * TAU * TAU * (TAU * x[0]).cos() * (TAU * x[1]).sin() * (TAU * x[2]).cos(),
        },
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fourth-order central differences for the Laplacian and gradient.
    fn fd_laplacian(c: &ManufacturedCase, x: &[f64], h: f64) -> f64 {
        (0..c.dim)
            .map(|k| {
                let at = |s: f64| {
                    let mut y = x.to_vec();
                    y[k] += s * h;
                    c.u(&y)
                };
                (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h)
            })
            .sum()
    }

    #[test]
    fn source_is_negative_laplacian() {
        let mut seed = 12345u64;
        let mut rand = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for id in CASE_IDS {
            let c = manufactured(id).unwrap();
            for _ in 0..50 {
                let x: Vec<f64> = (0..c.dim).map(|_| rand()).collect();
                let lap = fd_laplacian(&c, &x, 1e-3);
                assert!((c.f(&x) + lap).abs() < 1e-6 * (1.0 + c.f(&x).abs()), "{id} at {x:?}");
                for k in 0..c.dim {
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[k] += 1e-6;
                    m[k] -= 1e-6;
                    let fd = (c.u(&p) - c.u(&m)) / 2e-6;
                    assert!((fd - c.grad(&x)[k]).abs() < 1e-6, "{id} grad {k}");
                }
            }
        }
    }

    #[test]
    fn examples() {
        assert_eq!(manufactured("interval_parabola").unwrap().u(&[0.5]), 0.5);
        let sq = manufactured("square_trig").unwrap();
        assert!(sq.f(&[0.25, 0.25]).abs() < 1e-12);
        let cube = manufactured("cube_trig").unwrap();
        let x = [0.1, 0.2, 0.3];
        assert!((cube.f(&x) / cube.u(&x) - 12.0 * PI * PI).abs() < 1e-10);
        assert!(matches!(manufactured("nope"), Err(Error::UnknownCase(_))));
    }
}
