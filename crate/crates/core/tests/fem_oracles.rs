//! Method-of-manufactured-solutions and change-of-variables oracles for the
//! finite element layer.

use std::sync::Arc;
use thinfilm_core::fem::assembly::{
    boundary_mass_triplets, bulk_load, bulk_mass_triplets, bulk_stiffness_triplets, l2_error,
    l2_project, BlockLayout, Measure, SystemBuilder,
};
use thinfilm_core::fem::{solve_direct, CellType, FeSpace, Field};
use thinfilm_core::mesh::{build_disc_mesh, build_ridge_mesh, BoundaryTag};

fn disc_space(r: usize, k: usize, ct: CellType) -> Arc<FeSpace> {
    let mesh = Arc::new(build_disc_mesh(r, k, ct).unwrap());
    FeSpace::new(mesh, k).unwrap()
}

fn square_space(r: usize, k: usize, ct: CellType) -> Arc<FeSpace> {
    let mesh = Arc::new(build_ridge_mesh(1.0, 1.0, r, k, ct).unwrap());
    FeSpace::new(mesh, k).unwrap()
}

#[test]
fn disc_area_and_perimeter_by_quadrature() {
    // degree-2 isoparametric disc: refinement 3 puts both area and perimeter
    // within 1e-5 of their exact values; refinement 4 reaches 1e-6
    let checks = [(3usize, 1e-5), (4usize, 1e-6)];
    for (r, tol) in checks {
        let space = disc_space(r, 2, CellType::Quad);
        let psi = Field::identity(space.clone());
        let area = thinfilm_core::fem::assembly::integrate_bulk(
            &space,
            &psi.coeffs,
            Measure::Deformed,
            |_, _, _| 1.0,
        )
        .unwrap();
        let perimeter = thinfilm_core::fem::assembly::integrate_boundary(
            &space,
            &psi.coeffs,
            BoundaryTag::FreeBoundary,
            Measure::Deformed,
            |_, _, _| 1.0,
        )
        .unwrap();
        assert!(
            (area - std::f64::consts::PI).abs() < tol,
            "r={r}: area error {}",
            (area - std::f64::consts::PI).abs()
        );
        assert!(
            (perimeter - 2.0 * std::f64::consts::PI).abs() < 10.0 * tol,
            "r={r}: perimeter error {}",
            (perimeter - 2.0 * std::f64::consts::PI).abs()
        );
    }
}

#[test]
fn stiffness_of_linear_field_equals_area() {
    // u = x has unit gradient: int |grad u|^2 = |domain|
    for ct in [CellType::Quad, CellType::Tri] {
        let space = disc_space(3, 2, ct);
        let psi = Field::identity(space.clone());
        let stiff = bulk_stiffness_triplets(&space, &psi.coeffs, |_, _| 1.0).unwrap();
        let u = space.interpolate_scalar(|p| p[0]);
        let mut quad_form = 0.0;
        for &(i, j, v) in &stiff {
            quad_form += u[i] * v * u[j];
        }
        assert!(
            (quad_form - std::f64::consts::PI).abs() < 1e-5,
            "{ct:?}: {quad_form}"
        );
    }
}

#[test]
fn assembled_forms_are_symmetric_and_definite() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let space = disc_space(2, 2, CellType::Quad);
    let psi = Field::identity(space.clone());
    let n = space.n_scalar_dofs();

    let mass = bulk_mass_triplets(&space, &psi.coeffs, Measure::Deformed, |_, _| 1.0).unwrap();
    let stiff = bulk_stiffness_triplets(&space, &psi.coeffs, |_, x| x[0] * x[0]).unwrap();
    let bnd = boundary_mass_triplets(
        &space,
        &psi.coeffs,
        BoundaryTag::FreeBoundary,
        Measure::Deformed,
        |_, _| 1.0,
    )
    .unwrap();

    for (name, trips) in [("mass", &mass), ("stiffness", &stiff), ("boundary", &bnd)] {
        let mut b = SystemBuilder::new(BlockLayout::new(&[("u", n)]));
        b.add_triplets(0, 0, trips);
        let sys = b.finalize();
        assert!(
            sys.symmetry_defect() <= 1e-13,
            "{name}: defect {}",
            sys.symmetry_defect()
        );
        // quadratic-form signs on random vectors
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut form = 0.0;
            for &(i, j, v) in trips.iter() {
                form += x[i] * v * x[j];
            }
            match name {
                "mass" => assert!(form > 0.0),
                _ => assert!(form >= -1e-12 * form.abs().max(1.0)),
            }
        }
    }
}

#[test]
fn poisson_manufactured_solution_converges_at_optimal_order() {
    // -lap u = 2 pi^2 sin(pi x) sin(pi y) on the unit square, u = 0 on the
    // boundary; L2 EOC = k + 1
    let pi = std::f64::consts::PI;
    let exact = move |p: [f64; 2]| (pi * p[0]).sin() * (pi * p[1]).sin();
    for (ct, k) in [
        (CellType::Quad, 1usize),
        (CellType::Quad, 2),
        (CellType::Tri, 2),
        (CellType::Tri, 3),
    ] {
        let mut errors = Vec::new();
        for r in [2usize, 3, 4] {
            let space = square_space(r, k, ct);
            let psi = Field::identity(space.clone());
            let n = space.n_scalar_dofs();
            let mut builder = SystemBuilder::new(BlockLayout::new(&[("u", n)]));
            let stiff = bulk_stiffness_triplets(&space, &psi.coeffs, |_, _| 1.0).unwrap();
            builder.add_triplets(0, 0, &stiff);
            let load = bulk_load(&space, &psi.coeffs, Measure::Deformed, |_, p| {
                2.0 * pi * pi * exact(p)
            })
            .unwrap();
            for (i, v) in load.iter().enumerate() {
                builder.add_rhs(0, i, *v);
            }
            for tag in [BoundaryTag::FreeBoundary, BoundaryTag::Sliding] {
                for &d in space.boundary_dofs(tag) {
                    builder.set_essential(0, d, 0.0);
                }
            }
            let u = solve_direct(&builder.finalize()).unwrap();
            errors.push(l2_error(&space, &psi.coeffs, &u, exact).unwrap());
        }
        for w in errors.windows(2) {
            let eoc = (w[0] / w[1]).log2();
            assert!(
                (eoc - (k as f64 + 1.0)).abs() < 0.35,
                "{ct:?} k={k}: EOC {eoc} (errors {errors:?})"
            );
        }
    }
}

#[test]
fn l2_projection_reproduces_and_converges() {
    // idempotence: projecting a member of the space returns its coefficients
    let space = disc_space(2, 2, CellType::Quad);
    let psi = Field::identity(space.clone());
    let member = space.interpolate_scalar(|p| 0.3 + p[0] - 2.0 * p[1]);
    let projected = l2_project(&space, &psi.coeffs, |p| 0.3 + p[0] - 2.0 * p[1]).unwrap();
    for (a, b) in projected.iter().zip(&member) {
        assert!((a - b).abs() < 1e-12);
    }

    // polynomial reproduction on affine cells: x^2 lies in both degree-2
    // spaces (curved disc cells only reproduce it up to the geometry order)
    for ct in [CellType::Quad, CellType::Tri] {
        let space = square_space(2, 2, ct);
        let psi = Field::identity(space.clone());
        let proj = l2_project(&space, &psi.coeffs, |p| p[0] * p[0]).unwrap();
        let err = l2_error(&space, &psi.coeffs, &proj, |p| p[0] * p[0]).unwrap();
        assert!(err < 1e-12, "{ct:?}: x^2 projection error {err}");
    }

    // sin(x) onto P1: EOC 2 on the square
    let mut errors = Vec::new();
    for r in [2usize, 3, 4] {
        let space = square_space(r, 1, CellType::Tri);
        let psi = Field::identity(space.clone());
        let proj = l2_project(&space, &psi.coeffs, |p| p[0].sin()).unwrap();
        errors.push(l2_error(&space, &psi.coeffs, &proj, |p| p[0].sin()).unwrap());
    }
    for w in errors.windows(2) {
        let eoc = (w[0] / w[1]).log2();
        assert!((eoc - 2.0).abs() < 0.2, "P1 projection EOC {eoc}");
    }
}
