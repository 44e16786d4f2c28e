//! Shared setup helpers for the criterion benchmarks.

use std::sync::Arc;
use thinfilm_core::fem::{CellType, FeSpace};
use thinfilm_core::physics::{MobilityLaws, PhysicsParams};
use thinfilm_core::state::{AleState, NumericsParams, TangentialMode};
use thinfilm_core::stepper::{RunContext, SolverModel};

/// Sliding-droplet configuration used across the benchmarks.
pub fn bench_context(solver: SolverModel) -> RunContext {
    RunContext {
        params: PhysicsParams {
            g_x: [2.0, 0.0],
            ..Default::default()
        },
        mobilities: MobilityLaws::quadratic(1.0),
        numerics: NumericsParams {
            tangential: TangentialMode::TravelingWave,
            ..Default::default()
        },
        solver,
    }
}

pub fn droplet_state(refinement: usize, degree: usize) -> AleState {
    thinfilm_core::state::initial_droplet_state(
        refinement,
        degree,
        CellType::Quad,
        1.0,
        &bench_context(SolverModel::Transient).params,
    )
    .expect("initial state")
}

pub fn droplet_space(refinement: usize, degree: usize) -> Arc<FeSpace> {
    let mesh = Arc::new(
        thinfilm_core::mesh::build_disc_mesh(refinement, degree, CellType::Quad).unwrap(),
    );
    FeSpace::new(mesh, degree).unwrap()
}
