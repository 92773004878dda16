mod common;

use common::*;
use proptest::prelude::*;
use tfemdg::assembly::PenaltyConfig;
use tfemdg::dg_oracle::{assemble_dg, DgPenalty, DgScheme, EdgeQuadrature};
use tfemdg::dgify::{dgify, DgifyOptions, InterfaceSelector};
use tfemdg::mesh::{extract_interfaces, parse_mesh, write_mesh_to, ElementClass};
use tfemdg::pipeline::{preconditioner_for, unit_mesh, PreconditionerKind};
use tfemdg::solve::{solve_matrix, SolveOptions, Solver};

/// Dimension, size and a random subset of interior facets.
fn edited_mesh() -> impl Strategy<Value = (usize, usize, Vec<bool>, bool)> {
    (1usize..=3, 1usize..=3, prop::collection::vec(any::<bool>(), 80), any::<bool>())
        .prop_map(|(dim, n, mask, layer)| (dim, if dim == 3 { n.min(2) } else { n }, mask, layer))
}

fn selector_from(dim: usize, n: usize, mask: &[bool]) -> InterfaceSelector {
    let interior = extract_interfaces(&unit_mesh(dim, n).unwrap()).unwrap().interior.len();
    InterfaceSelector::Ids((0..interior).filter(|&i| mask[i % mask.len()]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trapezoid_dominates_exact_edge_integral(
        a in prop::array::uniform2(-10.0f64..10.0),
        b in prop::array::uniform2(-10.0f64..10.0),
        c0 in -5.0f64..5.0,
        c in prop::array::uniform2(-5.0f64..5.0),
    ) {
        let (exact, trapezoid) = edge_integrals(a, b, c0, c);
        prop_assert!(exact <= trapezoid * (1.0 + 1e-12) + 1e-300, "{exact} > {trapezoid}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembled_matrices_are_symmetric_with_zero_row_sums(
        (dim, n, mask, layer) in edited_mesh(),
        log_j in -8.0f64..-2.0,
    ) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        let j = 10f64.powf(log_j) * dg.mesh.grid_spacing().powi(dim as i32 - 1);
        let a = pre_bc_matrix(&dg, &PenaltyConfig::global(j).unwrap());
        prop_assert!(relative_asymmetry(&a) <= 1e-13);
        prop_assert!(relative_row_sum(&a) <= 1e-11, "row sum {}", relative_row_sum(&a));
    }

    #[test]
    fn eliminated_systems_are_positive_definite((dim, n, mask, layer) in edited_mesh(), log_j in -8.0f64..-2.0) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        prop_assume!(dg.mesh.num_vertices() <= 200);
        let j = 10f64.powf(log_j) * dg.mesh.grid_spacing().powi(dim as i32 - 1);
        let s = system(&dg, &PenaltyConfig::global(j).unwrap());
        prop_assert!(smallest_free_eigenvalue(&s) > 0.0);
    }

    #[test]
    fn cg_agrees_with_cholesky((dim, n, mask, layer) in edited_mesh(), pick in 0usize..5) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        let exponents = experiment_exponents(dim);
        let penalty = PenaltyConfig::from_exponent(dg.mesh.grid_spacing(), exponents[pick % exponents.len()]).unwrap();
        let s = system(&dg, &penalty);
        let direct = SolveOptions { solver: Solver::Cholesky, ..SolveOptions::default() };
        let (x, _) = solve_matrix(&s.matrix, &s.rhs, &direct).unwrap();
        let cg = SolveOptions {
            solver: Solver::Cg,
            preconditioner: preconditioner_for(&dg, PreconditionerKind::VertexGroups),
            tol: attainable_tolerance(&s.matrix, &x, &s.rhs, 1e-12),
            max_iter: None,
        };
        let (y, _) = solve_matrix(&s.matrix, &s.rhs, &cg).unwrap();
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let diff = x.iter().zip(&y).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(diff <= 1e-8 * scale, "{diff} vs {scale}");
    }

    #[test]
    fn mesh_files_round_trip((dim, n, mask, layer) in edited_mesh(), scale in 0.1f64..10.0) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        let coefficients = (0..dg.mesh.num_elements()).map(|e| scale * (1.0 + e as f64).sqrt()).collect();
        let mesh = dg.mesh.with_coefficients(coefficients).unwrap();
        let text = write_mesh_to(&mesh);
        let back = parse_mesh(&text).unwrap();
        prop_assert_eq!(&back, &mesh);
        prop_assert_eq!(write_mesh_to(&back), text);
    }

    #[test]
    fn dummies_have_exactly_zero_measure((dim, n, mask, layer) in edited_mesh()) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        for e in 0..dg.mesh.num_elements() {
            if dg.mesh.class(e).is_dummy() {
                prop_assert_eq!(dg.mesh.affine_map(e).det(), 0.0);
            }
        }
    }

    #[test]
    fn thick_geometry_does_not_depend_on_selection((dim, n, mask, _layer) in edited_mesh()) {
        let mesh = unit_mesh(dim, n).unwrap();
        let partial = dgify(&mesh, &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: false }).unwrap();
        let full = dgify(&mesh, &DgifyOptions { selector: InterfaceSelector::All, boundary_layer: false }).unwrap();
        for e in mesh.thick_elements() {
            prop_assert_eq!(partial.mesh.element_points(e), full.mesh.element_points(e));
        }
    }

    #[test]
    fn oracle_matches_thresholded_fem_on_partial_selections(n in 1usize..=4, mask in prop::collection::vec(any::<bool>(), 80), log_j in -8.0f64..-2.0) {
        let dg = dgify(&unit_mesh(2, n).unwrap(), &DgifyOptions { selector: selector_from(2, n, &mask), boundary_layer: true }).unwrap();
        let penalty = PenaltyConfig::global(10f64.powf(log_j)).unwrap();
        let fem = system(&dg, &penalty);
        let scheme = DgScheme { quadrature: EdgeQuadrature::Vertex, penalty: DgPenalty::matching_threshold(&dg, &penalty) };
        let oracle = assemble_dg(&dg, &scheme, &|x| 1.0 + x[0], &|x| x[0] + x[1]).unwrap();
        prop_assert!(fem.matrix.max_relative_difference(&oracle.matrix) <= 1e-12);
    }

    #[test]
    fn smaller_threshold_never_lowers_duplicated_diagonals((dim, n, mask, layer) in edited_mesh(), log_j in -8.0f64..-3.0, shrink in 1.0f64..100.0) {
        let dg = dgify(&unit_mesh(dim, n).unwrap(), &DgifyOptions { selector: selector_from(dim, n, &mask), boundary_layer: layer }).unwrap();
        let j = 10f64.powf(log_j) * dg.mesh.grid_spacing().powi(dim as i32 - 1);
        let coarse = pre_bc_matrix(&dg, &PenaltyConfig::global(j).unwrap()).diagonal();
        let fine = pre_bc_matrix(&dg, &PenaltyConfig::global(j / shrink).unwrap()).diagonal();
        for iface in &dg.interfaces {
            for &v in iface.left_vertices.iter().chain(&iface.right_vertices) {
                prop_assert!(fine[v] >= coarse[v]);
            }
        }
    }
}

#[test]
fn quadrature_rules_integrate_monomials_exactly() {
    let worst = worst_monomial_error();
    assert!(worst <= 1e-13, "worst relative monomial error {worst}");
}

#[test]
fn dof_identity_and_element_counts() {
    for (dim, ns) in [(1, vec![1, 2, 10, 64]), (2, vec![1, 2, 4, 8, 16, 32, 64]), (3, vec![1, 2, 4, 8])] {
        for n in ns {
            let mesh = unit_mesh(dim, n).unwrap();
            let topo = extract_interfaces(&mesh).unwrap();
            let dg = dgified(dim, n, InterfaceSelector::All, true);
            let thick = dg.mesh.count_class(ElementClass::Thick);
            assert_eq!(thick, mesh.num_elements());
            assert_eq!(dg.mesh.num_vertices() - dg.outer_boundary_vertices.len(), (dim + 1) * thick, "dim {dim} n {n}");
            assert_eq!(dg.mesh.count_class(ElementClass::InterfaceDummy), dim * topo.interior.len());
            assert_eq!(dg.mesh.count_class(ElementClass::BoundaryDummy), dim * topo.boundary.len());
        }
    }
}

#[test]
fn generators_partition_the_unit_domain_deterministically() {
    for dim in 1..=3 {
        for n in [1, 3, 4] {
            let a = unit_mesh(dim, n).unwrap();
            assert!((a.thick_volume() - 1.0).abs() <= 1e-12);
            assert_eq!(write_mesh_to(&a), write_mesh_to(&unit_mesh(dim, n).unwrap()));
            let dg1 = dgified(dim, n, InterfaceSelector::All, true);
            let dg2 = dgified(dim, n, InterfaceSelector::All, true);
            assert_eq!(write_mesh_to(&dg1.mesh), write_mesh_to(&dg2.mesh));
        }
    }
}

#[test]
fn unselected_edit_is_a_byte_identical_no_op() {
    for dim in 1..=3 {
        let mesh = unit_mesh(dim, 3).unwrap();
        let dg = dgify(&mesh, &DgifyOptions { selector: InterfaceSelector::None, boundary_layer: false }).unwrap();
        assert_eq!(write_mesh_to(&dg.mesh), write_mesh_to(&mesh));
    }
}
