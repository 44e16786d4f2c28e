//! Strong contact-line-dissipation limit: the height field minimizes the
//! energy at fixed support under a volume constraint, while the contact line
//! moves by the (line-tension regularized) force with a semi-implicit
//! Laplace-Beltrami treatment of the curvature.

use crate::error::{CoreError, CoreResult};
use crate::fem::assembly::{BlockLayout, SystemBuilder};
use crate::fem::geometry::{eval_grad, gather};
use crate::fem::{solve_direct, Field, TraceSpace};
use crate::mesh::BoundaryTag;
use crate::physics::{MobilityLaws, PhysicsParams};
use crate::state::{AleState, Event, NumericsParams, TangentialMode};
use crate::transient::{estimate_translation_from_speed, extend_boundary_velocity, BoundaryData};
use std::sync::Arc;

/// Result of the volume-constrained stationary height solve.
pub struct StationaryShape {
    pub h: Field,
    /// volume Lagrange multiplier
    pub pi_hat: f64,
    pub min_h: f64,
}

/// Solves sigma (grad h, grad v) + ((g_x . x + g_z h) v) = pi_hat (v) on the
/// deformed support with h = 0 on the free boundary and int h Jbar = vol0.
pub fn stationary_shape(
    space: &Arc<crate::fem::FeSpace>,
    psi: &Field,
    vol0: f64,
    params: &PhysicsParams,
) -> CoreResult<StationaryShape> {
    if vol0 <= 0.0 {
        return Err(CoreError::Config("vol0 must be positive".into()));
    }
    let n = space.n_scalar_dofs();
    let layout = BlockLayout::new(&[("h", n), ("pi_hat", 1)]);
    let mut builder = SystemBuilder::new(layout);

    let geo = crate::fem::DeformedGeometry::new(space, &psi.coeffs);
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        for q in 0..cg.w_def.len() {
            let w = cg.w_def[q];
            let x = cg.phys[q];
            let gx_dot = params.g_x[0] * x[0] + params.g_x[1] * x[1];
            for (i, &di) in dofs.iter().enumerate() {
                let vi = space.cell_table.vals[q][i];
                let gi = cg.grad[q][i];
                for (j, &dj) in dofs.iter().enumerate() {
                    let vj = space.cell_table.vals[q][j];
                    let gj = cg.grad[q][j];
                    builder.add(
                        0,
                        0,
                        di,
                        dj,
                        w * (params.sigma * (gi[0] * gj[0] + gi[1] * gj[1])
                            + params.g_z * vi * vj),
                    );
                }
                // volume constraint column/row and gravity load
                builder.add(0, 1, di, 0, -w * vi);
                builder.add(1, 0, 0, di, -w * vi);
                builder.add_rhs(0, di, -w * gx_dot * vi);
            }
        }
    }
    builder.add_rhs(1, 0, -vol0);
    for &d in space.boundary_dofs(BoundaryTag::FreeBoundary) {
        builder.set_essential(0, d, 0.0);
    }

    let sol = solve_direct(&builder.finalize())?;
    let h = Field::scalar_from(space.clone(), sol[..n].to_vec());
    let pi_hat = sol[n];
    let min_h = h.min();
    Ok(StationaryShape { h, pi_hat, min_h })
}

/// Contact-line velocity of the regularized evolution, solved on the deformed
/// free boundary with the curvature term taken semi-implicitly:
/// (xdot, v) + tau eps n (grad_G xdot, grad_G v) = (f, v) - eps n (grad_G x, grad_G v).
pub struct ContactVelocity {
    pub trace: TraceSpace,
    /// interleaved (x, y) values on the trace dofs
    pub velocity: Vec<f64>,
}

impl ContactVelocity {
    /// Velocity vector at a facet quadrature point.
    pub fn at(&self, space: &crate::fem::FeSpace, fg: &crate::fem::FacetGeo, q: usize) -> [f64; 2] {
        let edge_nodes =
            crate::fem::shape::edge_local_nodes(space.mesh.cell_type, space.degree, fg.local_edge);
        let vals = &space.facet_table.vals[fg.local_edge];
        let mut v = [0.0; 2];
        for &ln in &edge_nodes {
            let d = space.cell_dofs[fg.cell][ln];
            let ti = self.trace.index_of(d);
            v[0] += self.velocity[2 * ti] * vals[q][ln];
            v[1] += self.velocity[2 * ti + 1] * vals[q][ln];
        }
        v
    }
}

pub fn contact_velocity(
    state: &AleState,
    params: &PhysicsParams,
    mobilities: &MobilityLaws,
    numerics: &NumericsParams,
    tau: f64,
) -> CoreResult<ContactVelocity> {
    let space = &state.space;
    let trace = TraceSpace::new(space, BoundaryTag::FreeBoundary);
    if trace.is_empty() {
        return Err(CoreError::Assembly("no free boundary facets".into()));
    }
    let nz = trace.len();
    let layout = BlockLayout::new(&[("xdot", 2 * nz)]);
    let mut builder = SystemBuilder::new(layout);
    let geo = state.geometry();

    for fi in space.facets_with_tag(BoundaryTag::FreeBoundary) {
        let fg = geo.facet(fi)?;
        let cell_dofs = &space.cell_dofs[fg.cell];
        let local_h = gather(&state.h.coeffs, cell_dofs);
        let edge_nodes =
            crate::fem::shape::edge_local_nodes(space.mesh.cell_type, space.degree, fg.local_edge);
        let fdofs: Vec<usize> = edge_nodes.iter().map(|&ln| cell_dofs[ln]).collect();
        let dir = space.facet_table.edge_dir[fg.local_edge];
        let vals = &space.facet_table.vals[fg.local_edge];
        let grads = &space.facet_table.grads[fg.local_edge];

        for q in 0..fg.w_def.len() {
            let w = fg.w_def[q];
            let w_param = space.facet_table.weights_1d[q];
            let gh = eval_grad(&local_h, &fg.grad[q]);
            let gn = (gh[0] * gh[0] + gh[1] * gh[1]).sqrt();
            let nq = mobilities.mobility_contact(gn, numerics.g_min);
            let force = -nq * (-0.5 * params.sigma * gn * gn + params.s);
            let nu = fg.normal[q];
            let t = fg.tangent[q];
            let arc = fg.arc_def[q];
            let eps_n = params.eps_line * nq;

            for (i, &lni) in edge_nodes.iter().enumerate() {
                let vi = vals[q][lni];
                // tangential derivative d/dt of the facet basis along the edge
                let dti = grads[q][lni][0] * dir[0] + grads[q][lni][1] * dir[1];
                let ti_idx = trace.index_of(fdofs[i]);
                for (j, &lnj) in edge_nodes.iter().enumerate() {
                    let vj = vals[q][lnj];
                    let dtj = grads[q][lnj][0] * dir[0] + grads[q][lnj][1] * dir[1];
                    let tj_idx = trace.index_of(fdofs[j]);
                    let m = w * vi * vj;
                    let k = tau * eps_n * w_param * dti * dtj / arc;
                    for a in 0..2 {
                        builder.add(0, 0, 2 * ti_idx + a, 2 * tj_idx + a, m + k);
                    }
                }
                // force along the normal minus the explicit Laplace-Beltrami
                // part, whose dx/ds is the current unit tangent
                for a in 0..2 {
                    builder.add_rhs(
                        0,
                        2 * ti_idx + a,
                        w * force * nu[a] * vi - eps_n * w_param * t[a] * dti,
                    );
                }
            }
        }
    }

    // ridge: contact-line endpoints stay on the sliding walls
    let sliding: std::collections::HashSet<usize> = space
        .boundary_dofs(BoundaryTag::Sliding)
        .iter()
        .copied()
        .collect();
    for (ti, &d) in trace.dofs.iter().enumerate() {
        if sliding.contains(&d) {
            builder.set_essential(0, 2 * ti + 1, 0.0);
        }
    }

    let velocity = solve_direct(&builder.finalize())?;
    Ok(ContactVelocity { trace, velocity })
}

/// One semi-implicit step of the strong-dissipation evolution.
pub struct QuasistaticOutcome {
    pub state: AleState,
    pub pi_hat: f64,
    pub psidot: Field,
    pub boundary_velocity: ContactVelocity,
    /// estimated rigid translation of the contact line
    pub w: [f64; 2],
    pub events: Vec<Event>,
}

pub fn quasistatic_step(
    state: &AleState,
    params: &PhysicsParams,
    mobilities: &MobilityLaws,
    numerics: &NumericsParams,
    tau: f64,
) -> CoreResult<QuasistaticOutcome> {
    let bv = contact_velocity(state, params, mobilities, numerics, tau)?;
    let space = state.space.clone();

    let speed_of =
        |fg: &crate::fem::FacetGeo, q: usize| -> f64 {
            let v = bv.at(&space, fg, q);
            v[0] * fg.normal[q][0] + v[1] * fg.normal[q][1]
        };

    let mut events = Vec::new();
    let (w, fallback) = estimate_translation_from_speed(state, &speed_of)?;
    if fallback && numerics.tangential == TangentialMode::TravelingWave {
        events.push(Event::TranslationFallback { t: state.t });
    }

    let data = BoundaryData::NormalSpeed {
        speed: &speed_of,
        w,
        mode: numerics.tangential,
    };
    let (psidot, _lambda) = extend_boundary_velocity(state, data)?;

    let mut psi_new = state.psi.clone();
    psi_new.axpy(tau, &psidot);

    // tangling check before the height re-solve
    let probe = AleState {
        space: state.space.clone(),
        psi: psi_new,
        h: state.h.clone(),
        t: state.t + tau,
        vol0: state.vol0,
    };
    if let Err(cell) = probe.check_untangled() {
        events.push(Event::MeshTangled { t: state.t, cell });
        return Ok(QuasistaticOutcome {
            state: state.clone(),
            pi_hat: f64::NAN,
            psidot,
            boundary_velocity: bv,
            w,
            events,
        });
    }

    let shape = stationary_shape(&state.space, &probe.psi, state.vol0, params)?;
    let mut new_state = probe;
    new_state.h = shape.h;
    if shape.min_h < -numerics.feasibility_tol {
        events.push(Event::Feasibility {
            t: new_state.t,
            min_h: shape.min_h,
        });
        return Ok(QuasistaticOutcome {
            state: state.clone(),
            pi_hat: shape.pi_hat,
            psidot,
            boundary_velocity: bv,
            w,
            events,
        });
    }

    Ok(QuasistaticOutcome {
        state: new_state,
        pi_hat: shape.pi_hat,
        psidot,
        boundary_velocity: bv,
        w,
        events,
    })
}

/// Re-solve the stationary height on the current support (used after
/// extrapolated domain updates to restore the hard volume constraint).
pub fn resolve_height(state: &mut AleState, params: &PhysicsParams) -> CoreResult<f64> {
    let shape = stationary_shape(&state.space, &state.psi, state.vol0, params)?;
    state.h = shape.h;
    Ok(shape.min_h)
}
