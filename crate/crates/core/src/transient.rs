//! One decoupled semi-implicit step of the transient thin-film model.
//!
//! Step 1 solves the symmetric saddle system for the Eulerian rate and the
//! generalized forces (pi, zeta); step 2 reconstructs the domain velocity from
//! the kinematic condition through an elastic extension with a boundary
//! Lagrange multiplier; step 3 projects onto the ALE rate of the height. The
//! weak-dissipation limit drops the contact force unknown, leaving the contact
//! slope at its equilibrium value.

use crate::error::{CoreError, CoreResult};
use crate::fem::assembly::{BlockLayout, SystemBuilder};
use crate::fem::geometry::{eval_grad, eval_scalar, eval_vector, gather, gather_vec};
use crate::fem::{solve_direct, FacetGeo, Field, TraceSpace};
use crate::mesh::BoundaryTag;
use crate::physics::{driving_force_rhs, MobilityLaws, PhysicsParams};
use crate::state::{AleState, Event, NumericsParams, TangentialMode};

/// Which member of the model hierarchy a step advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransientModel {
    /// Full dynamics with contact-line dissipation.
    Full,
    /// Weak-dissipation limit: equilibrium contact angle, no zeta unknown.
    WeakDissipation,
}

/// The solved rate bundle of one decoupled step.
pub struct KinematicRates {
    /// Eulerian height rate on the reference domain
    pub hdot: Field,
    /// bulk force (pressure)
    pub pi: Field,
    /// contact force on the free-boundary trace (absent in the weak limit)
    pub zeta: Option<(TraceSpace, Vec<f64>)>,
    /// reconstructed domain velocity
    pub psidot: Field,
    /// boundary multiplier of the extension solve, interleaved components
    pub lambda: (TraceSpace, Vec<f64>),
    /// ALE height rate (zero trace on the free boundary)
    pub hdot_ale: Field,
    /// estimated rigid translation of the free boundary
    pub w: [f64; 2],
}

/// Step 1: find (hdot, pi, zeta) from the current state. The surface part of
/// the driving force is taken semi-implicitly with weight tau.
pub fn step1_solve(
    state: &AleState,
    params: &PhysicsParams,
    mobilities: &MobilityLaws,
    numerics: &NumericsParams,
    tau: f64,
    model: TransientModel,
) -> CoreResult<(Field, Field, Option<(TraceSpace, Vec<f64>)>)> {
    let space = &state.space;
    let n = space.n_scalar_dofs();
    let trace = TraceSpace::new(space, BoundaryTag::FreeBoundary);
    let with_zeta = model == TransientModel::Full && !trace.is_empty();
    let nz = if with_zeta { trace.len() } else { 0 };

    let layout = BlockLayout::new(&[("hdot", n), ("pi", n), ("zeta", nz)]);
    let mut builder = SystemBuilder::new(layout);

    // driving force (explicit part) and the semi-implicit surface block
    let df = driving_force_rhs(state, params, numerics.g_min, tau)?;
    for (i, v) in df.rhs.iter().enumerate() {
        builder.add_rhs(0, i, *v);
    }
    builder.add_triplets(0, 0, &df.implicit);

    let geo = state.geometry();
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        let local_h = gather(&state.h.coeffs, dofs);
        for q in 0..cg.w_def.len() {
            let w = cg.w_def[q];
            let h_q = eval_scalar(&local_h, &space.cell_table.vals[q]);
            let m_q = mobilities.mobility_bulk(h_q);
            for (i, &di) in dofs.iter().enumerate() {
                let vi = space.cell_table.vals[q][i];
                let gi = cg.grad[q][i];
                for (j, &dj) in dofs.iter().enumerate() {
                    let vj = space.cell_table.vals[q][j];
                    let gj = cg.grad[q][j];
                    let mass = w * vi * vj;
                    builder.add(0, 1, di, dj, mass);
                    builder.add(1, 0, di, dj, mass);
                    if m_q != 0.0 {
                        builder.add(1, 1, di, dj, w * m_q * (gi[0] * gj[0] + gi[1] * gj[1]));
                    }
                }
            }
        }
    }

    if with_zeta {
        for fi in space.facets_with_tag(BoundaryTag::FreeBoundary) {
            let fg = geo.facet(fi)?;
            let cell_dofs = &space.cell_dofs[fg.cell];
            let local_h = gather(&state.h.coeffs, cell_dofs);
            let edge_nodes = crate::fem::shape::edge_local_nodes(
                space.mesh.cell_type,
                space.degree,
                fg.local_edge,
            );
            let vals = &space.facet_table.vals[fg.local_edge];
            for q in 0..fg.w_def.len() {
                let w = fg.w_def[q];
                let gh = eval_grad(&local_h, &fg.grad[q]);
                let gn2 = gh[0] * gh[0] + gh[1] * gh[1];
                let n_q = mobilities.mobility_contact(gn2.sqrt(), numerics.g_min);
                for &lni in &edge_nodes {
                    let vi = vals[q][lni];
                    let ti = trace.index_of(cell_dofs[lni]);
                    for &lnj in &edge_nodes {
                        let vj = vals[q][lnj];
                        let tj = trace.index_of(cell_dofs[lnj]);
                        builder.add(0, 2, cell_dofs[lni], tj, w * vi * vj);
                        builder.add(2, 0, ti, cell_dofs[lnj], w * vi * vj);
                        builder.add(2, 2, ti, tj, w * n_q * gn2 * vi * vj);
                    }
                }
            }
        }
    }

    let sol = solve_direct(&builder.finalize())?;
    let hdot = Field::scalar_from(space.clone(), sol[..n].to_vec());
    let pi = Field::scalar_from(space.clone(), sol[n..2 * n].to_vec());
    let zeta = if with_zeta {
        Some((trace, sol[2 * n..].to_vec()))
    } else {
        None
    };
    Ok((hdot, pi, zeta))
}

/// Least-squares rigid translation of a normal boundary speed field:
/// w = (int nu x nu dgamma)^-1 int speed nu dgamma over the deformed free
/// boundary. The flag reports the singular-covariance fallback to w = 0.
pub fn estimate_translation_from_speed(
    state: &AleState,
    speed: &dyn Fn(&FacetGeo, usize) -> f64,
) -> CoreResult<([f64; 2], bool)> {
    let space = &state.space;
    let geo = state.geometry();
    let mut m = [[0.0; 2]; 2];
    let mut r = [0.0; 2];
    for fi in space.facets_with_tag(BoundaryTag::FreeBoundary) {
        let fg = geo.facet(fi)?;
        for q in 0..fg.w_def.len() {
            let w = fg.w_def[q];
            let nu = fg.normal[q];
            let s = speed(&fg, q);
            m[0][0] += w * nu[0] * nu[0];
            m[0][1] += w * nu[0] * nu[1];
            m[1][0] += w * nu[1] * nu[0];
            m[1][1] += w * nu[1] * nu[1];
            r[0] += w * s * nu[0];
            r[1] += w * s * nu[1];
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = 0.5 * (m[0][0] + m[1][1]);
    if scale == 0.0 || det.abs() <= 1e-10 * scale * scale {
        return Ok(([0.0, 0.0], true));
    }
    Ok((
        [
            (m[1][1] * r[0] - m[0][1] * r[1]) / det,
            (m[0][0] * r[1] - m[1][0] * r[0]) / det,
        ],
        false,
    ))
}

/// Translation estimate from the step-1 height rate, with the kinematic
/// normal speed hdot / |grad h|.
pub fn estimate_translation(
    state: &AleState,
    hdot: &Field,
    g_min: f64,
) -> CoreResult<([f64; 2], bool)> {
    let space = state.space.clone();
    let hdot_coeffs = hdot.coeffs.clone();
    let h_coeffs = state.h.coeffs.clone();
    let speed = move |fg: &FacetGeo, q: usize| -> f64 {
        let dofs = &space.cell_dofs[fg.cell];
        let local_hdot = gather(&hdot_coeffs, dofs);
        let local_h = gather(&h_coeffs, dofs);
        let hd = eval_scalar(&local_hdot, &space.facet_table.vals[fg.local_edge][q]);
        let gh = eval_grad(&local_h, &fg.grad[q]);
        hd / (gh[0] * gh[0] + gh[1] * gh[1]).sqrt().max(g_min)
    };
    estimate_translation_from_speed(state, &speed)
}

/// Boundary velocity data driving the elastic extension of step 2.
pub enum BoundaryData<'a> {
    /// Transient kinematics: b = -grad h hdot / max(|grad h|, g_min)^2.
    Kinematic {
        hdot: &'a Field,
        g_min: f64,
        w: [f64; 2],
        mode: TangentialMode,
    },
    /// Weak-dissipation limit: normal speed hdot / slope with the slope frozen
    /// at its equilibrium value.
    FrozenSlope {
        hdot: &'a Field,
        slope: f64,
        w: [f64; 2],
        mode: TangentialMode,
    },
    /// Externally computed normal speed (strong-dissipation boundary drive).
    NormalSpeed {
        speed: &'a dyn Fn(&FacetGeo, usize) -> f64,
        w: [f64; 2],
        mode: TangentialMode,
    },
    /// Full boundary velocity vector, tangential part included (for example
    /// the Laplace-Beltrami solution, whose tangential motion keeps the curve
    /// parametrisation healthy).
    FullVelocity {
        velocity: &'a dyn Fn(&FacetGeo, usize) -> [f64; 2],
    },
}

impl<'a> BoundaryData<'a> {
    /// Target velocity at a facet quadrature point; the flag reports a contact
    /// slope under the floor.
    fn eval(
        &self,
        space: &crate::fem::FeSpace,
        h_state: &[f64],
        fg: &FacetGeo,
        q: usize,
    ) -> ([f64; 2], bool) {
        let (mut b, degenerate) = match self {
            BoundaryData::Kinematic { hdot, g_min, .. } => {
                let dofs = &space.cell_dofs[fg.cell];
                let local_hdot = gather(&hdot.coeffs, dofs);
                let local_h = gather(h_state, dofs);
                let hd = eval_scalar(&local_hdot, &space.facet_table.vals[fg.local_edge][q]);
                let gh = eval_grad(&local_h, &fg.grad[q]);
                let gn = (gh[0] * gh[0] + gh[1] * gh[1]).sqrt();
                let reg = gn.max(*g_min);
                (
                    [-gh[0] * hd / (reg * reg), -gh[1] * hd / (reg * reg)],
                    gn < *g_min,
                )
            }
            BoundaryData::FrozenSlope { hdot, slope, .. } => {
                let dofs = &space.cell_dofs[fg.cell];
                let local_hdot = gather(&hdot.coeffs, dofs);
                let hd = eval_scalar(&local_hdot, &space.facet_table.vals[fg.local_edge][q]);
                let nu = fg.normal[q];
                ([nu[0] * hd / slope, nu[1] * hd / slope], false)
            }
            BoundaryData::NormalSpeed { speed, .. } => {
                let s = speed(fg, q);
                let nu = fg.normal[q];
                ([nu[0] * s, nu[1] * s], false)
            }
            BoundaryData::FullVelocity { velocity } => (velocity(fg, q), false),
        };
        let (w, mode) = match self {
            BoundaryData::Kinematic { w, mode, .. }
            | BoundaryData::FrozenSlope { w, mode, .. }
            | BoundaryData::NormalSpeed { w, mode, .. } => (w, mode),
            BoundaryData::FullVelocity { .. } => (&[0.0, 0.0], &TangentialMode::Zero),
        };
        if *mode == TangentialMode::TravelingWave {
            let t = fg.tangent[q];
            let wt = w[0] * t[0] + w[1] * t[1];
            b[0] += wt * t[0];
            b[1] += wt * t[1];
        }
        (b, degenerate)
    }
}

/// Step 2: elastic extension of the boundary velocity into the bulk,
/// constrained on the free boundary by a vector Lagrange multiplier (reference
/// boundary measure) and pinned to x-motion on sliding facets.
pub fn extend_boundary_velocity(
    state: &AleState,
    data: BoundaryData<'_>,
) -> CoreResult<(Field, (TraceSpace, Vec<f64>))> {
    let (psidot, lambda, _) = extend_boundary_velocity_flagged(state, data)?;
    Ok((psidot, lambda))
}

pub fn extend_boundary_velocity_flagged(
    state: &AleState,
    data: BoundaryData<'_>,
) -> CoreResult<(Field, (TraceSpace, Vec<f64>), bool)> {
    let space = &state.space;
    let n = space.n_scalar_dofs();
    let trace = TraceSpace::new(space, BoundaryTag::FreeBoundary);
    if trace.is_empty() {
        return Err(CoreError::Assembly("no free boundary facets".into()));
    }
    let nz = trace.len();
    let layout = BlockLayout::new(&[("psidot", 2 * n), ("lambda", 2 * nz)]);
    let mut builder = SystemBuilder::new(layout);
    let geo = state.geometry();
    let mut degenerate = false;

    // int D(psidot) : D(v) Jbar with the Eulerian symmetric gradient
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        for q in 0..cg.w_def.len() {
            let w = cg.w_def[q];
            for (i, &di) in dofs.iter().enumerate() {
                let gi = cg.grad[q][i];
                for (j, &dj) in dofs.iter().enumerate() {
                    let gj = cg.grad[q][j];
                    let dot = gi[0] * gj[0] + gi[1] * gj[1];
                    for a in 0..2 {
                        for b in 0..2 {
                            let delta = if a == b { dot } else { 0.0 };
                            builder.add(
                                0,
                                0,
                                2 * di + a,
                                2 * dj + b,
                                0.5 * w * (delta + gi[b] * gj[a]),
                            );
                        }
                    }
                }
            }
        }
    }

    // multiplier coupling and boundary data, reference boundary measure
    for fi in space.facets_with_tag(BoundaryTag::FreeBoundary) {
        let fg = geo.facet(fi)?;
        let cell_dofs = &space.cell_dofs[fg.cell];
        let edge_nodes =
            crate::fem::shape::edge_local_nodes(space.mesh.cell_type, space.degree, fg.local_edge);
        let vals = &space.facet_table.vals[fg.local_edge];
        for q in 0..fg.w_ref.len() {
            let w = fg.w_ref[q];
            let (b_q, dq) = data.eval(space, &state.h.coeffs, &fg, q);
            degenerate |= dq;
            for &lni in &edge_nodes {
                let vi = vals[q][lni];
                let ti = trace.index_of(cell_dofs[lni]);
                for &lnj in &edge_nodes {
                    let vj = vals[q][lnj];
                    for a in 0..2 {
                        builder.add(0, 1, 2 * cell_dofs[lnj] + a, 2 * ti + a, w * vi * vj);
                        builder.add(1, 0, 2 * ti + a, 2 * cell_dofs[lnj] + a, w * vi * vj);
                    }
                }
                for a in 0..2 {
                    builder.add_rhs(1, 2 * ti + a, w * vi * b_q[a]);
                }
            }
        }
    }

    // sliding facets support x-motion only; where a contact-line endpoint
    // sits on a sliding wall the y-multiplier would duplicate the essential
    // pin (rank-deficient saddle), so those multiplier rows are pinned too
    let sliding: std::collections::HashSet<usize> = space
        .boundary_dofs(BoundaryTag::Sliding)
        .iter()
        .copied()
        .collect();
    for &d in space.boundary_dofs(BoundaryTag::Sliding) {
        builder.set_essential(0, 2 * d + 1, 0.0);
    }
    for (ti, d) in trace.dofs.iter().enumerate() {
        if sliding.contains(d) {
            builder.set_essential(1, 2 * ti + 1, 0.0);
        }
    }

    let sol = solve_direct(&builder.finalize())?;
    let psidot = Field::vector_from(space.clone(), sol[..2 * n].to_vec());
    let lambda = sol[2 * n..].to_vec();
    Ok((psidot, (trace, lambda), degenerate))
}

/// Step 3: L2 projection of hdot + psidot . grad h onto the height space with
/// zero trace on the free boundary. A scalar multiplier keeps the projection
/// mean-preserving: with the boundary dofs pinned, the plain projection loses
/// orthogonality against constants and would leak an O(tau) volume drift into
/// every update.
pub fn step3_project(state: &AleState, hdot: &Field, psidot: &Field) -> CoreResult<Field> {
    let space = &state.space;
    let n = space.n_scalar_dofs();
    let layout = BlockLayout::new(&[("hdot_ale", n), ("mean", 1)]);
    let mut builder = SystemBuilder::new(layout);
    let geo = state.geometry();
    let mut target_mean = 0.0;
    for c in 0..space.mesh.n_cells() {
        let cg = geo.cell(c)?;
        let dofs = &space.cell_dofs[c];
        let local_h = gather(&state.h.coeffs, dofs);
        let local_hdot = gather(&hdot.coeffs, dofs);
        let local_pd = gather_vec(&psidot.coeffs, dofs);
        for q in 0..cg.w_def.len() {
            let w = cg.w_def[q];
            let vals = &space.cell_table.vals[q];
            let hd = eval_scalar(&local_hdot, vals);
            let h_q = eval_scalar(&local_h, vals);
            let gh = eval_grad(&local_h, &cg.grad[q]);
            let pd = eval_vector(&local_pd, vals);
            let rhs_q = hd + pd[0] * gh[0] + pd[1] * gh[1];
            // Eulerian divergence of psidot, for the volume-consistent mean:
            // d/dtau int h Jbar = int (hdot_ale + h div psidot) Jbar, so the
            // mean of hdot_ale is pinned to -int h div psidot Jbar under the
            // same quadrature, making the update volume-neutral to O(tau^2)
            let mut div_pd = 0.0;
            for (i, p) in local_pd.iter().enumerate() {
                let g = cg.grad[q][i];
                div_pd += p[0] * g[0] + p[1] * g[1];
            }
            target_mean -= w * h_q * div_pd;
            for (i, &di) in dofs.iter().enumerate() {
                let vi = vals[i];
                for (j, &dj) in dofs.iter().enumerate() {
                    builder.add(0, 0, di, dj, w * vi * vals[j]);
                }
                builder.add_rhs(0, di, w * vi * rhs_q);
                builder.add(0, 1, di, 0, w * vi);
                builder.add(1, 0, 0, di, w * vi);
            }
        }
    }
    builder.add_rhs(1, 0, target_mean);
    for &d in space.boundary_dofs(BoundaryTag::FreeBoundary) {
        builder.set_essential(0, d, 0.0);
    }
    let sol = solve_direct(&builder.finalize())?;
    Ok(Field::scalar_from(space.clone(), sol[..n].to_vec()))
}

/// Outcome of one base step; on a terminal event the state is the unmodified
/// input.
pub struct StepOutcome {
    pub state: AleState,
    pub rates: KinematicRates,
    pub events: Vec<Event>,
}

/// First-order semi-implicit base step: runs steps 1-3 and advances
/// psi <- psi + tau psidot, h <- h + tau hdot_ale, t <- t + tau.
pub fn base_step(
    state: &AleState,
    params: &PhysicsParams,
    mobilities: &MobilityLaws,
    numerics: &NumericsParams,
    tau: f64,
    model: TransientModel,
) -> CoreResult<StepOutcome> {
    let (hdot, pi, zeta) = step1_solve(state, params, mobilities, numerics, tau, model)?;
    let mut events = Vec::new();

    let frozen_slope = params.equilibrium_slope().max(numerics.g_min);
    let (w, fallback) = match model {
        TransientModel::Full => estimate_translation(state, &hdot, numerics.g_min)?,
        TransientModel::WeakDissipation => {
            let space = state.space.clone();
            let coeffs = hdot.coeffs.clone();
            let speed = move |fg: &FacetGeo, q: usize| -> f64 {
                let local = gather(&coeffs, &space.cell_dofs[fg.cell]);
                eval_scalar(&local, &space.facet_table.vals[fg.local_edge][q]) / frozen_slope
            };
            estimate_translation_from_speed(state, &speed)?
        }
    };
    if fallback && numerics.tangential == TangentialMode::TravelingWave {
        events.push(Event::TranslationFallback { t: state.t });
    }
    let w_used = match numerics.tangential {
        TangentialMode::TravelingWave => w,
        TangentialMode::Zero => [0.0, 0.0],
    };

    let data = match model {
        TransientModel::Full => BoundaryData::Kinematic {
            hdot: &hdot,
            g_min: numerics.g_min,
            w: w_used,
            mode: numerics.tangential,
        },
        TransientModel::WeakDissipation => BoundaryData::FrozenSlope {
            hdot: &hdot,
            slope: frozen_slope,
            w: w_used,
            mode: numerics.tangential,
        },
    };
    let (psidot, lambda, degenerate) = extend_boundary_velocity_flagged(state, data)?;
    if degenerate {
        events.push(Event::Degeneracy {
            t: state.t,
            context: "contact slope under g_min on a free-boundary facet".into(),
        });
    }

    let hdot_ale = step3_project(state, &hdot, &psidot)?;

    let mut new_state = state.clone();
    new_state.psi.axpy(tau, &psidot);
    new_state.h.axpy(tau, &hdot_ale);
    new_state.t += tau;

    let rates = KinematicRates {
        hdot,
        pi,
        zeta,
        psidot,
        lambda,
        hdot_ale,
        w,
    };

    if let Err(cell) = new_state.check_untangled() {
        events.push(Event::MeshTangled { t: state.t, cell });
        return Ok(StepOutcome {
            state: state.clone(),
            rates,
            events,
        });
    }
    let min_h = new_state.min_h();
    if min_h < -numerics.feasibility_tol {
        events.push(Event::Feasibility {
            t: new_state.t,
            min_h,
        });
        return Ok(StepOutcome {
            state: state.clone(),
            rates,
            events,
        });
    }

    Ok(StepOutcome {
        state: new_state,
        rates,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{CellType, FeSpace};
    use crate::mesh::build_disc_mesh;
    use std::sync::Arc;

    fn cap_state(r: usize, k: usize) -> AleState {
        let mesh = Arc::new(build_disc_mesh(r, k, CellType::Quad).unwrap());
        let space = FeSpace::new(mesh, k).unwrap();
        let psi = Field::identity(space.clone());
        let shape = crate::quasistatic::stationary_shape(
            &space,
            &psi,
            1.0,
            &crate::physics::PhysicsParams::default(),
        )
        .unwrap();
        AleState::new(space, psi, shape.h, 1.0)
    }

    fn integrate_hdot(state: &AleState, hdot: &Field, absolute: bool) -> f64 {
        crate::fem::assembly::integrate_bulk(
            &state.space,
            &state.psi.coeffs,
            crate::fem::Measure::Deformed,
            |c, q, _cg| {
                let local = gather(&hdot.coeffs, &state.space.cell_dofs[c]);
                let v = eval_scalar(&local, &state.space.cell_table.vals[q]);
                if absolute {
                    v.abs()
                } else {
                    v
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn volume_rate_vanishes() {
        let state = cap_state(2, 2);
        let params = crate::physics::PhysicsParams {
            g_x: [5.0, 0.0],
            s: 1.0,
            ..Default::default()
        };
        let mob = MobilityLaws::quadratic(1.0);
        let num = NumericsParams::default();
        let (hdot, _, _) =
            step1_solve(&state, &params, &mob, &num, 0.01, TransientModel::Full).unwrap();
        let vol_rate = integrate_hdot(&state, &hdot, false);
        let scale = integrate_hdot(&state, &hdot, true);
        assert!(
            vol_rate.abs() <= 1e-10 * scale.max(1.0),
            "volume rate {vol_rate} (scale {scale})"
        );
    }

    #[test]
    fn dissipation_identity_explicit_force() {
        // at tau = 0: <DE, hdot> = -(int m |grad pi|^2 Jbar + int n |grad h|^2 zeta^2 Abar)
        let state = cap_state(2, 2);
        let params = crate::physics::PhysicsParams {
            g_x: [2.0, 0.0],
            g_z: 1.0,
            s: 1.0,
            ..Default::default()
        };
        let mob = MobilityLaws::quadratic(1.0);
        let num = NumericsParams::default();
        let (hdot, pi, zeta) =
            step1_solve(&state, &params, &mob, &num, 0.0, TransientModel::Full).unwrap();
        let df = driving_force_rhs(&state, &params, num.g_min, 0.0).unwrap();
        let de_pairing: f64 = df.rhs.iter().zip(&hdot.coeffs).map(|(r, h)| r * h).sum();

        let space = &state.space;
        let bulk_diss = crate::fem::assembly::integrate_bulk(
            space,
            &state.psi.coeffs,
            crate::fem::Measure::Deformed,
            |c, q, cg| {
                let local_pi = gather(&pi.coeffs, &space.cell_dofs[c]);
                let local_h = gather(&state.h.coeffs, &space.cell_dofs[c]);
                let gp = eval_grad(&local_pi, &cg.grad[q]);
                let h_q = eval_scalar(&local_h, &space.cell_table.vals[q]);
                mob.mobility_bulk(h_q) * (gp[0] * gp[0] + gp[1] * gp[1])
            },
        )
        .unwrap();
        let (trace, zvals) = zeta.unwrap();
        let bnd_diss = crate::fem::assembly::integrate_boundary(
            space,
            &state.psi.coeffs,
            BoundaryTag::FreeBoundary,
            crate::fem::Measure::Deformed,
            |_, q, fg| {
                let cell_dofs = &space.cell_dofs[fg.cell];
                let local_h = gather(&state.h.coeffs, cell_dofs);
                let gh = eval_grad(&local_h, &fg.grad[q]);
                let gn2 = gh[0] * gh[0] + gh[1] * gh[1];
                let edge_nodes = crate::fem::shape::edge_local_nodes(
                    space.mesh.cell_type,
                    space.degree,
                    fg.local_edge,
                );
                let mut z = 0.0;
                for &ln in &edge_nodes {
                    z += zvals[trace.index_of(cell_dofs[ln])]
                        * space.facet_table.vals[fg.local_edge][q][ln];
                }
                mob.mobility_contact(gn2.sqrt(), num.g_min) * gn2 * z * z
            },
        )
        .unwrap();

        let total_diss = bulk_diss + bnd_diss;
        assert!(total_diss > 0.0);
        assert!(
            (de_pairing + total_diss).abs() <= 1e-8 * total_diss,
            "pairing {de_pairing} vs dissipation {total_diss}"
        );
    }

    #[test]
    fn rigid_translation_recovered_exactly() {
        let state = cap_state(1, 2);
        let u = [0.7, -0.3];
        let speed = |fg: &FacetGeo, q: usize| u[0] * fg.normal[q][0] + u[1] * fg.normal[q][1];
        let (w, fallback) = estimate_translation_from_speed(&state, &speed).unwrap();
        assert!(!fallback);
        assert!((w[0] - u[0]).abs() < 1e-13 && (w[1] - u[1]).abs() < 1e-13);

        // uniform expansion has no translation component
        let speed = |_: &FacetGeo, _: usize| 0.42;
        let (w, _) = estimate_translation_from_speed(&state, &speed).unwrap();
        assert!(w[0].abs() < 1e-13 && w[1].abs() < 1e-13);

        // superposition of both still returns u
        let speed =
            |fg: &FacetGeo, q: usize| u[0] * fg.normal[q][0] + u[1] * fg.normal[q][1] + 0.42;
        let (w, _) = estimate_translation_from_speed(&state, &speed).unwrap();
        assert!((w[0] - u[0]).abs() < 1e-13 && (w[1] - u[1]).abs() < 1e-13);
    }

    #[test]
    fn zero_data_gives_zero_extension() {
        let state = cap_state(1, 2);
        let hdot = Field::zeros_scalar(state.space.clone());
        let data = BoundaryData::Kinematic {
            hdot: &hdot,
            g_min: 1e-8,
            w: [0.0, 0.0],
            mode: TangentialMode::Zero,
        };
        let (psidot, (_, lambda)) = extend_boundary_velocity(&state, data).unwrap();
        assert!(psidot.coeffs.iter().all(|v| v.abs() < 1e-12));
        assert!(lambda.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn step3_is_identity_for_interior_rates() {
        let state = cap_state(2, 2);
        // interior-supported, volume-neutral rate: combine nodal powers of the
        // cap (both zero on the boundary) into a zero-mean member of the space
        let mut v1 = state.h.clone();
        let mut v2 = state.h.clone();
        for (a, b) in v1.coeffs.iter_mut().zip(v2.coeffs.iter_mut()) {
            let h = *a;
            *a = h * h;
            *b = h * h * h;
        }
        let (m1, _) = crate::diagnostics::volume_rate(&state, &v1).unwrap();
        let (m2, _) = crate::diagnostics::volume_rate(&state, &v2).unwrap();
        let mut hdot = v1.clone();
        hdot.axpy(-m1 / m2, &v2);
        let psidot = Field::zeros_vector(state.space.clone());
        let hdot_ale = step3_project(&state, &hdot, &psidot).unwrap();
        let err: f64 = hdot_ale
            .coeffs
            .iter()
            .zip(&hdot.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "projection identity violated: {err}");
    }

    #[test]
    fn step2_constraint_residual_small() {
        let state = cap_state(2, 2);
        let params = crate::physics::PhysicsParams {
            g_x: [3.0, 0.0],
            ..Default::default()
        };
        let mob = MobilityLaws::quadratic(1.0);
        let num = NumericsParams::default();
        let (hdot, _, _) =
            step1_solve(&state, &params, &mob, &num, 0.01, TransientModel::Full).unwrap();
        let data = BoundaryData::Kinematic {
            hdot: &hdot,
            g_min: num.g_min,
            w: [0.0, 0.0],
            mode: TangentialMode::Zero,
        };
        let (psidot, (trace, _)) = extend_boundary_velocity(&state, data).unwrap();

        // weak residual of the constraint rows
        let space = &state.space;
        let geo = state.geometry();
        let mut residual = vec![0.0; 2 * trace.len()];
        let mut scale: f64 = 0.0;
        for fi in space.facets_with_tag(BoundaryTag::FreeBoundary) {
            let fg = geo.facet(fi).unwrap();
            let cell_dofs = &space.cell_dofs[fg.cell];
            let edge_nodes = crate::fem::shape::edge_local_nodes(
                space.mesh.cell_type,
                space.degree,
                fg.local_edge,
            );
            let data = BoundaryData::Kinematic {
                hdot: &hdot,
                g_min: num.g_min,
                w: [0.0, 0.0],
                mode: TangentialMode::Zero,
            };
            for q in 0..fg.w_ref.len() {
                let (b_q, _) = data.eval(space, &state.h.coeffs, &fg, q);
                let local_pd = gather_vec(&psidot.coeffs, cell_dofs);
                let pd = eval_vector(&local_pd, &space.facet_table.vals[fg.local_edge][q]);
                scale = scale.max(b_q[0].abs()).max(b_q[1].abs());
                for &ln in &edge_nodes {
                    let vi = space.facet_table.vals[fg.local_edge][q][ln];
                    let ti = trace.index_of(cell_dofs[ln]);
                    for a in 0..2 {
                        residual[2 * ti + a] += fg.w_ref[q] * vi * (pd[a] - b_q[a]);
                    }
                }
            }
        }
        let max_res = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            max_res <= 1e-9 * scale.max(1.0),
            "constraint residual {max_res} (scale {scale})"
        );
    }
}
