//! Energy functional oracles: closed-form parts on parabolic caps (pinned by
//! radial quadrature) and finite-difference consistency of the driving force.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thinfilm_core::fem::{CellType, FeSpace, Field};
use thinfilm_core::mesh::{build_disc_mesh, BoundaryTag};
use thinfilm_core::physics::{driving_force_rhs, energy, energy_rate, PhysicsParams};
use thinfilm_core::state::AleState;

fn disc_space(r: usize, k: usize) -> Arc<FeSpace> {
    let mesh = Arc::new(build_disc_mesh(r, k, CellType::Quad).unwrap());
    FeSpace::new(mesh, k).unwrap()
}

/// High-order radial quadrature of int_0^r f(rho) rho drho (the oracle used to
/// pin closed-form energy parts; independent of the 2d assembly path).
fn radial_integral(f: impl Fn(f64) -> f64, r: f64) -> f64 {
    let n = 64;
    let (pts, wts) = thinfilm_core::fem::quadrature::gauss_legendre_01(n);
    let mut total = 0.0;
    for (t, w) in pts.iter().zip(&wts) {
        let rho = t * r;
        total += w * r * f(rho) * rho;
    }
    2.0 * std::f64::consts::PI * total
}

#[test]
fn parabolic_cap_energy_parts_match_radial_oracle() {
    // cap h = c (1 - |x|^2) on the unit disc with c = 2/pi (unit volume)
    let c = 2.0 / std::f64::consts::PI;
    let params = PhysicsParams {
        sigma: 1.0,
        s: 1.0,
        g_x: [0.0, 0.0],
        g_z: 2.0,
        eps_line: 0.5,
    };
    let space = disc_space(3, 2);
    let psi = Field::identity(space.clone());
    let h = Field::scalar_from(
        space.clone(),
        space.interpolate_scalar(|p| c * (1.0 - p[0] * p[0] - p[1] * p[1])),
    );
    let state = AleState::new(space, psi, h, 1.0);
    let rep = energy(&state, &params).unwrap();

    // oracle values by radial quadrature of the closed-form integrands
    let surface = radial_integral(|rho| 0.5 * (2.0 * c * rho).powi(2), 1.0);
    let wetting = radial_integral(|_| 1.0, 1.0);
    let gravity = radial_integral(
        |rho| {
            let h = c * (1.0 - rho * rho);
            0.5 * params.g_z * h * h
        },
        1.0,
    );
    let line = params.eps_line * 2.0 * std::f64::consts::PI;
    let volume = radial_integral(|rho| c * (1.0 - rho * rho), 1.0);

    assert!((surface - std::f64::consts::PI * c * c).abs() < 1e-12); // closed form pi sigma c^2
    assert!((rep.surface - surface).abs() < 2e-4, "surface {} vs {surface}", rep.surface);
    assert!((rep.wetting - wetting).abs() < 2e-5);
    assert!((rep.gravity - gravity).abs() < 2e-5);
    assert!((rep.line - line).abs() < 1e-4);
    assert!((rep.volume - volume).abs() < 2e-5);
    assert!(
        (rep.total - (rep.surface + rep.wetting + rep.gravity + rep.line)).abs()
            <= 1e-12 * rep.total.abs()
    );
}

fn random_admissible_state(rng: &mut ChaCha8Rng, space: &Arc<FeSpace>) -> AleState {
    let a: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let psi = Field::vector_from(
        space.clone(),
        space.interpolate_vector(|p| {
            [
                p[0] + a[0] * (p[1] * 2.0).sin() + a[1] * p[0] * p[1],
                p[1] + a[2] * (p[0] * 2.0).cos() * 0.5 + a[3] * p[0] * p[0] * 0.3,
            ]
        }),
    );
    let b = [a[4], a[5]];
    let mut h = Field::scalar_from(
        space.clone(),
        space.interpolate_scalar(|p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            (1.0 - r2) * (0.6 + b[0] * p[0] + b[1] * (3.0 * p[1]).sin() * 0.5)
        }),
    );
    for &d in space.boundary_dofs(BoundaryTag::FreeBoundary) {
        h.coeffs[d] = 0.0;
    }
    AleState::new(space.clone(), psi, h, 1.0)
}

fn random_rate(rng: &mut ChaCha8Rng, space: &Arc<FeSpace>) -> (Field, Field) {
    let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let psidot = Field::vector_from(
        space.clone(),
        space.interpolate_vector(|p| {
            [
                a[0] + 0.5 * a[1] * (p[1] * 1.7).sin(),
                a[2] * 0.7 + 0.4 * a[3] * p[0] * p[1],
            ]
        }),
    );
    let mut hdot = Field::scalar_from(
        space.clone(),
        space.interpolate_scalar(|p| {
            (1.0 - p[0] * p[0] - p[1] * p[1]) * (a[0] - a[3] * p[1] + 0.3 * (2.0 * p[0]).cos())
        }),
    );
    for &d in space.boundary_dofs(BoundaryTag::FreeBoundary) {
        hdot.coeffs[d] = 0.0;
    }
    (psidot, hdot)
}

#[test]
fn energy_rate_matches_central_differences() {
    // the exact discrete directional derivative against a second-order FD of
    // the energy itself, for 10 random admissible states and rates
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let space = disc_space(2, 2);
    let params = PhysicsParams {
        sigma: 1.0,
        s: 0.8,
        g_x: [1.5, -0.4],
        g_z: 2.0,
        eps_line: 0.3,
    };
    let delta = 1e-5;
    for trial in 0..10 {
        let state = random_admissible_state(&mut rng, &space);
        let (psidot, hdot_ale) = random_rate(&mut rng, &space);
        let rate = energy_rate(&state, &params, &psidot, &hdot_ale).unwrap();

        let eval = |sign: f64| -> f64 {
            let mut s = state.clone();
            s.psi.axpy(sign * delta, &psidot);
            s.h.axpy(sign * delta, &hdot_ale);
            energy(&s, &params).unwrap().total
        };
        let fd = (eval(1.0) - eval(-1.0)) / (2.0 * delta);
        let scale = rate.abs().max(1e-8);
        assert!(
            (fd - rate).abs() <= 1e-6 * scale,
            "trial {trial}: FD {fd} vs rate {rate} (rel {})",
            (fd - rate).abs() / scale
        );
    }
}

#[test]
fn assembled_force_pairs_like_the_energy_rate_for_height_rates() {
    // with psidot = 0 the rhs vector paired with the coefficient vector of an
    // admissible height rate is the same functional as energy_rate
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = disc_space(2, 2);
    let params = PhysicsParams {
        sigma: 1.0,
        s: 0.5,
        g_x: [0.7, 0.2],
        g_z: 1.0,
        eps_line: 0.0,
    };
    for _ in 0..5 {
        let state = random_admissible_state(&mut rng, &space);
        let (_, hdot_ale) = random_rate(&mut rng, &space);
        let psidot = Field::zeros_vector(space.clone());
        let rate = energy_rate(&state, &params, &psidot, &hdot_ale).unwrap();
        let df = driving_force_rhs(&state, &params, 1e-8, 0.0).unwrap();
        let paired: f64 = df.rhs.iter().zip(&hdot_ale.coeffs).map(|(r, h)| r * h).sum();
        assert!(
            (paired - rate).abs() <= 1e-11 * rate.abs().max(1.0),
            "pairing {paired} vs rate {rate}"
        );
    }
}
