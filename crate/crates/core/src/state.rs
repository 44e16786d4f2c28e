//! The evolving ALE state and run events.

use crate::error::CoreResult;
use crate::fem::{DeformedGeometry, FeSpace, Field};
use crate::mesh::BoundaryTag;
use std::sync::Arc;

/// Tangential handling of the reconstructed boundary velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentialMode {
    /// Normal motion only.
    Zero,
    /// Add the estimated rigid translation's tangential component, so that a
    /// traveling droplet is carried by a nearly constant ALE field.
    TravelingWave,
}

/// Numerical guards shared by all solvers.
#[derive(Debug, Clone, Copy)]
pub struct NumericsParams {
    /// Floor for contact-slope magnitudes appearing in denominators.
    pub g_min: f64,
    /// A state with min h below -feasibility_tol stops the run.
    pub feasibility_tol: f64,
    pub tangential: TangentialMode,
}

impl Default for NumericsParams {
    fn default() -> Self {
        NumericsParams {
            g_min: 1e-8,
            feasibility_tol: 1e-3,
            tangential: TangentialMode::TravelingWave,
        }
    }
}

/// Terminal or diagnostic happenings during a run; events are data, not faults.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// min h dropped below -feasibility_tol: the stationary/transient profile
    /// lost its meaning as a height field.
    Feasibility { t: f64, min_h: f64 },
    /// Deformation map folded (nonpositive Jacobian).
    MeshTangled { t: f64, cell: usize },
    /// Contact slope under the g_min floor somewhere on the free boundary.
    Degeneracy { t: f64, context: String },
    /// Normal-covariance matrix singular; translation estimate fell back to 0.
    TranslationFallback { t: f64 },
    /// Ridge free boundaries touched or crossed.
    WidthCollapse { t: f64 },
}

impl Event {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            Event::Feasibility { .. } | Event::MeshTangled { .. } | Event::WidthCollapse { .. }
        )
    }
}

/// Discrete ALE pair (psi, h) on a fixed reference mesh plus time stamp.
#[derive(Debug, Clone)]
pub struct AleState {
    pub space: Arc<FeSpace>,
    /// deformation map, vector field
    pub psi: Field,
    /// height over the deformed support, scalar field
    pub h: Field,
    pub t: f64,
    /// conserved target volume, set at initialization
    pub vol0: f64,
}

impl AleState {
    pub fn new(space: Arc<FeSpace>, psi: Field, h: Field, vol0: f64) -> AleState {
        AleState {
            space,
            psi,
            h,
            t: 0.0,
            vol0,
        }
    }

    pub fn geometry(&self) -> DeformedGeometry<'_> {
        DeformedGeometry::new(&self.space, &self.psi.coeffs)
    }

    pub fn min_h(&self) -> f64 {
        self.h.min()
    }

    pub fn max_h(&self) -> f64 {
        self.h.max()
    }

    /// int h Jbar over the reference domain.
    pub fn volume(&self) -> CoreResult<f64> {
        crate::fem::assembly::integrate_bulk(
            &self.space,
            &self.psi.coeffs,
            crate::fem::Measure::Deformed,
            |c, q, _cg| {
                let local =
                    crate::fem::geometry::gather(&self.h.coeffs, &self.space.cell_dofs[c]);
                crate::fem::geometry::eval_scalar(&local, &self.space.cell_table.vals[q])
            },
        )
    }

    /// Checks J > 0 on every cell; returns the first offending cell.
    pub fn check_untangled(&self) -> Result<(), usize> {
        let geo = self.geometry();
        for c in 0..self.space.mesh.n_cells() {
            if geo.cell(c).is_err() {
                return Err(c);
            }
        }
        Ok(())
    }

    /// Zero out h on the free boundary (essential height condition).
    pub fn enforce_height_bc(&mut self) {
        for &d in self.space.boundary_dofs(BoundaryTag::FreeBoundary) {
            self.h.coeffs[d] = 0.0;
        }
    }
}

/// Droplet on the unit disc: identity map plus the volume-constrained
/// stationary height as a consistent near-equilibrium start.
pub fn initial_droplet_state(
    refinement: usize,
    degree: usize,
    cell_type: crate::fem::CellType,
    vol0: f64,
    params: &crate::physics::PhysicsParams,
) -> CoreResult<AleState> {
    let mesh = Arc::new(crate::mesh::build_disc_mesh(refinement, degree, cell_type)?);
    let space = FeSpace::new(mesh, degree)?;
    let psi = Field::identity(space.clone());
    let shape = crate::quasistatic::stationary_shape(&space, &psi, vol0, params)?;
    Ok(AleState::new(space, psi, shape.h, vol0))
}

/// Ridge on [0,L] x [0,H] with the cosine-perturbed initial map and the
/// stationary height on the deformed support.
#[allow(clippy::too_many_arguments)]
pub fn initial_ridge_state(
    length: f64,
    height: f64,
    delta: f64,
    refinement: usize,
    degree: usize,
    cell_type: crate::fem::CellType,
    vol0: f64,
    params: &crate::physics::PhysicsParams,
) -> CoreResult<AleState> {
    if delta.abs() >= 1.0 {
        return Err(crate::error::CoreError::Config(
            "|delta| must be < 1, otherwise the initial map could fold".into(),
        ));
    }
    let mesh = Arc::new(crate::mesh::build_ridge_mesh(
        length, height, refinement, degree, cell_type,
    )?);
    let space = FeSpace::new(mesh, degree)?;
    let map = crate::mesh::ridge_initial_map(delta, height);
    let psi = Field::vector_from(space.clone(), space.interpolate_vector(map));
    let shape = crate::quasistatic::stationary_shape(&space, &psi, vol0, params)?;
    let state = AleState::new(space, psi, shape.h, vol0);
    state
        .check_untangled()
        .map_err(|cell| crate::error::CoreError::MeshTangled { cell })?;
    Ok(state)
}

/// Cross-sectional area of a straight ridge whose contact slope equals the
/// equilibrium value, times the ridge extent: a near-equilibrium default
/// volume for ridge runs. The parabolic cross-section over width L has slope
/// 6 A / L^2 at the contact line.
pub fn ridge_equilibrium_volume(length: f64, height: f64, params: &crate::physics::PhysicsParams) -> f64 {
    params.equilibrium_slope() * length * length / 6.0 * height
}
