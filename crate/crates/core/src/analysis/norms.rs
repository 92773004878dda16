use crate::assembly::reference_gradients;
use crate::dg_oracle::{penalty_weights, EdgeQuadrature};
use crate::dgify::DgifyResult;
use crate::mesh::Mesh;
use crate::quadrature::QuadratureRule;

/// Volume quadrature degree used for all error norms.
pub const ERROR_QUADRATURE_DEGREE: usize = 5;

fn integrate_thick(mesh: &Mesh, degree: usize, mut integrand: impl FnMut(usize, &[f64], &[f64]) -> f64) -> f64 {
    let d = mesh.dim();
    let rule = QuadratureRule::for_degree(d, degree);
    let mut total = 0.0;
    for e in mesh.thick_elements() {
        let pts = mesh.element_points(e);
        let vol = mesh.affine_map(e).measure();
        let mut s = 0.0;
        for (bary, w) in rule.iter() {
            let x: Vec<f64> = (0..d).map(|c| bary.iter().zip(&pts).map(|(l, p)| l * p[c]).sum()).collect();
            s += w * integrand(e, bary, &x);
        }
        total += vol * s;
    }
    total
}

/// `||u - u_h||_{L2}` over thick elements, `u_h` the P1 field with vertex
/// values `field`.
pub fn error_l2(mesh: &Mesh, field: &[f64], u: &dyn Fn(&[f64]) -> f64) -> f64 {
    integrate_thick(mesh, ERROR_QUADRATURE_DEGREE, |e, bary, x| {
        let uh: f64 = mesh.element(e).iter().zip(bary).map(|(&v, l)| field[v] * l).sum();
        (u(x) - uh).powi(2)
    })
    .sqrt()
}

/// Gradient of the P1 field on thick element `e`.
pub fn element_gradient(mesh: &Mesh, field: &[f64], e: usize) -> [f64; 3] {
    let map = mesh.affine_map(e);
    let mut g = [0.0; 3];
    for (&v, rg) in mesh.element(e).iter().zip(reference_gradients(mesh.dim())) {
        let sg = map.scaled_gradient(&rg[..mesh.dim()]);
        for c in 0..3 {
            g[c] += field[v] * sg[c] / map.det();
        }
    }
    g
}

/// Broken `H1` seminorm error over thick elements.
pub fn error_h1_broken(mesh: &Mesh, field: &[f64], grad: &dyn Fn(&[f64]) -> [f64; 3]) -> f64 {
    let grads: Vec<[f64; 3]> =
        (0..mesh.num_elements()).map(|e| if mesh.class(e).is_dummy() { [0.0; 3] } else { element_gradient(mesh, field, e) }).collect();
    integrate_thick(mesh, ERROR_QUADRATURE_DEGREE, |e, _, x| {
        let gu = grad(x);
        (0..mesh.dim()).map(|c| (gu[c] - grads[e][c]).powi(2)).sum()
    })
    .sqrt()
}

/// `sqrt(sum_Gamma weight_Gamma * int_Gamma [u_h]^2)`, exact for linear jumps.
/// Without weights every interface counts once; pass penalties to get the
/// `sqrt(D)`-weighted norm.
pub fn jump_norm(dg: &DgifyResult, field: &[f64], weights: Option<&[f64]>) -> f64 {
    let d = dg.mesh.dim();
    let mut total = 0.0;
    for (i, iface) in dg.interfaces.iter().enumerate() {
        let m = penalty_weights(d, iface.measure, EdgeQuadrature::Exact);
        let jumps: Vec<f64> =
            iface.left_vertices.iter().zip(&iface.right_vertices).map(|(&l, &r)| field[l] - field[r]).collect();
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += m[a * d + b] * jumps[a] * jumps[b];
            }
        }
        total += weights.map_or(1.0, |w| w[i]) * s;
    }
    total.sqrt()
}

/// Largest nodal jump across every interior facet of the source mesh,
/// selected or not.
pub fn facet_jumps(dg: &DgifyResult, field: &[f64]) -> Vec<f64> {
    let orig = |v: usize| dg.vertex_provenance[v].original();
    dg.source_topology
        .interior
        .iter()
        .map(|facet| {
            let right = facet.right.expect("interior facet");
            let (lc, rc) = (dg.mesh.element(facet.left), dg.mesh.element(right));
            facet
                .vertices
                .iter()
                .map(|&v| {
                    let l = lc.iter().find(|&&w| orig(w) == v).expect("left copy");
                    let r = rc.iter().find(|&&w| orig(w) == v).expect("right copy");
                    (field[*l] - field[*r]).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
