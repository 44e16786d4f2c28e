//! Experimental-order-of-convergence harness: nested mesh families, state
//! error norms, and the time/space sweep drivers. Sweep members run in
//! parallel; THINFILM_THREADS caps the pool.

use crate::error::{CoreError, CoreResult};
use crate::fem::geometry::{eval_scalar, eval_vector, gather, gather_vec};
use crate::fem::shape::{eval_basis, local_nodes};
use crate::fem::CellType;
#[cfg(test)]
use crate::fem::FeSpace;
use crate::mesh::{build_disc_mesh, build_ridge_mesh, refine_uniform, ReferenceMesh};
use crate::state::AleState;
use crate::stepper::{run, ExitReason, RunContext, Scheme, StepperConfig};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct EocRow {
    pub label: String,
    /// characteristic resolution (mesh size or step size)
    pub resolution: f64,
    pub error: f64,
    /// defined from consecutive rows only
    pub eoc: Option<f64>,
    /// false when the underlying run hit a terminal event
    pub valid: bool,
}

#[derive(Debug, Clone, Default)]
pub struct EocTable {
    pub rows: Vec<EocRow>,
}

impl EocTable {
    /// Builds a table with EOC = log(e_i/e_{i+1}) / log(r_i/r_{i+1}).
    pub fn from_errors(entries: Vec<(String, f64, f64, bool)>) -> EocTable {
        let mut rows: Vec<EocRow> = Vec::with_capacity(entries.len());
        for (label, resolution, error, valid) in entries {
            let eoc = rows.last().and_then(|prev: &EocRow| {
                if prev.valid && valid && error > 0.0 && prev.error > 0.0 {
                    Some((prev.error / error).ln() / (prev.resolution / resolution).ln())
                } else {
                    None
                }
            });
            rows.push(EocRow {
                label,
                resolution,
                error,
                eoc,
                valid,
            });
        }
        EocTable { rows }
    }

    pub fn mean_eoc(&self) -> Option<f64> {
        let vals: Vec<f64> = self.rows.iter().filter_map(|r| r.eoc).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// ||dh||_L2 + ||dpsi||_L2 on the reference mesh
    L2,
    /// max-norm over fine nodes, h and psi parts added
    Max,
}

/// A chain of uniformly refined meshes; level i+1 refines level i, so fields
/// on coarser levels can be evaluated exactly at reference points of finer
/// ones through the child maps.
pub struct MeshFamily {
    pub meshes: Vec<Arc<ReferenceMesh>>,
}

impl MeshFamily {
    pub fn disc(
        refinements: &[usize],
        degree: usize,
        cell_type: CellType,
    ) -> CoreResult<MeshFamily> {
        Self::from_base(build_disc_mesh(refinements[0], degree, cell_type)?, refinements)
    }

    pub fn ridge(
        length: f64,
        height: f64,
        refinements: &[usize],
        degree: usize,
        cell_type: CellType,
    ) -> CoreResult<MeshFamily> {
        Self::from_base(
            build_ridge_mesh(length, height, refinements[0], degree, cell_type)?,
            refinements,
        )
    }

    fn from_base(base: ReferenceMesh, refinements: &[usize]) -> CoreResult<MeshFamily> {
        for w in refinements.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(CoreError::Config(
                    "mesh family needs consecutive refinement levels".into(),
                ));
            }
        }
        let mut meshes = vec![Arc::new(base)];
        for _ in 1..refinements.len() {
            let next = refine_uniform(meshes.last().expect("nonempty"));
            meshes.push(Arc::new(next));
        }
        Ok(MeshFamily { meshes })
    }

    /// Map a reference point of a cell at one level to the ancestor cell and
    /// point at a coarser level.
    pub fn to_ancestor(
        &self,
        level_from: usize,
        cell: usize,
        xi: [f64; 2],
        level_to: usize,
    ) -> (usize, [f64; 2]) {
        let mut c = cell;
        let mut x = xi;
        for lvl in (level_to + 1..=level_from).rev() {
            let (parent, map) = self.meshes[lvl].child_of[c];
            x = map.to_parent(x);
            c = parent;
        }
        (c, x)
    }
}

/// Error between two states of the same family, the second on the finer level.
/// Comparison happens in the reference coordinates of the common family.
pub fn nested_state_error(
    family: &MeshFamily,
    coarse: &AleState,
    coarse_level: usize,
    fine: &AleState,
    fine_level: usize,
    norm: ErrorNorm,
) -> CoreResult<f64> {
    assert!(fine_level >= coarse_level);
    let fs = &fine.space;
    let cs = &coarse.space;
    let ct = fs.mesh.cell_type;
    let kc = cs.degree;

    let eval_coarse = |cell_f: usize, xi_f: [f64; 2]| -> (f64, [f64; 2]) {
        let (cc, xc) = family.to_ancestor(fine_level, cell_f, xi_f, coarse_level);
        let vals = eval_basis(ct, kc, xc);
        let local_h = gather(&coarse.h.coeffs, &cs.cell_dofs[cc]);
        let local_p = gather_vec(&coarse.psi.coeffs, &cs.cell_dofs[cc]);
        (eval_scalar(&local_h, &vals), eval_vector(&local_p, &vals))
    };

    match norm {
        ErrorNorm::L2 => {
            let mut h2 = 0.0;
            let mut p2 = 0.0;
            for c in 0..fs.mesh.n_cells() {
                let local_h = gather(&fine.h.coeffs, &fs.cell_dofs[c]);
                let local_p = gather_vec(&fine.psi.coeffs, &fs.cell_dofs[c]);
                for q in 0..fs.cell_table.rule.len() {
                    let xi = fs.cell_table.rule.points[q];
                    let w = fs.cell_table.rule.weights[q] * fs.ref_det[c][q];
                    let hf = eval_scalar(&local_h, &fs.cell_table.vals[q]);
                    let pf = eval_vector(&local_p, &fs.cell_table.vals[q]);
                    let (hc, pc) = eval_coarse(c, xi);
                    h2 += w * (hf - hc) * (hf - hc);
                    p2 += w * ((pf[0] - pc[0]).powi(2) + (pf[1] - pc[1]).powi(2));
                }
            }
            Ok(h2.sqrt() + p2.sqrt())
        }
        ErrorNorm::Max => {
            let locals = local_nodes(ct, fs.degree);
            let mut dh: f64 = 0.0;
            let mut dp: f64 = 0.0;
            for c in 0..fs.mesh.n_cells() {
                let local_h = gather(&fine.h.coeffs, &fs.cell_dofs[c]);
                let local_p = gather_vec(&fine.psi.coeffs, &fs.cell_dofs[c]);
                for (ln, &xi) in locals.iter().enumerate() {
                    let (hc, pc) = eval_coarse(c, xi);
                    let hf = local_h[ln];
                    let pf = local_p[ln];
                    dh = dh.max((hf - hc).abs());
                    dp = dp.max((pf[0] - pc[0]).abs()).max((pf[1] - pc[1]).abs());
                }
            }
            Ok(dh + dp)
        }
    }
}

/// Same-space error (time sweeps): both states share the mesh and degree.
pub fn same_space_error(a: &AleState, b: &AleState, norm: ErrorNorm) -> CoreResult<f64> {
    let fs = &a.space;
    match norm {
        ErrorNorm::L2 => {
            let mut h2 = 0.0;
            let mut p2 = 0.0;
            for c in 0..fs.mesh.n_cells() {
                let la = gather(&a.h.coeffs, &fs.cell_dofs[c]);
                let lb = gather(&b.h.coeffs, &fs.cell_dofs[c]);
                let pa = gather_vec(&a.psi.coeffs, &fs.cell_dofs[c]);
                let pb = gather_vec(&b.psi.coeffs, &fs.cell_dofs[c]);
                for q in 0..fs.cell_table.rule.len() {
                    let w = fs.cell_table.rule.weights[q] * fs.ref_det[c][q];
                    let dh = eval_scalar(&la, &fs.cell_table.vals[q])
                        - eval_scalar(&lb, &fs.cell_table.vals[q]);
                    let da = eval_vector(&pa, &fs.cell_table.vals[q]);
                    let db = eval_vector(&pb, &fs.cell_table.vals[q]);
                    h2 += w * dh * dh;
                    p2 += w * ((da[0] - db[0]).powi(2) + (da[1] - db[1]).powi(2));
                }
            }
            Ok(h2.sqrt() + p2.sqrt())
        }
        ErrorNorm::Max => {
            let mut dh: f64 = 0.0;
            for (x, y) in a.h.coeffs.iter().zip(&b.h.coeffs) {
                dh = dh.max((x - y).abs());
            }
            let mut dp: f64 = 0.0;
            for (x, y) in a.psi.coeffs.iter().zip(&b.psi.coeffs) {
                dp = dp.max((x - y).abs());
            }
            Ok(dh + dp)
        }
    }
}

/// Thread cap for sweeps: THINFILM_THREADS, defaulting to the rayon default.
pub fn sweep_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("THINFILM_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("thread pool")
}

fn run_to_end(
    initial: &AleState,
    ctx: &RunContext,
    scheme: Scheme,
    tau: f64,
    t_end: f64,
) -> CoreResult<(AleState, bool)> {
    let config = StepperConfig {
        scheme,
        tau,
        t_end,
        snapshot_every: 0,
        solver: ctx.solver,
    };
    let summary = run(initial, ctx, &config, &mut [], None)?;
    Ok((summary.final_state, summary.exit == ExitReason::Completed))
}

/// Temporal self-convergence: errors of tau-runs against a reference run at
/// tau_min / ref_divisor with the same scheme, one table per scheme.
pub fn eoc_time(
    initial: &AleState,
    ctx: &RunContext,
    t_end: f64,
    taus: &[f64],
    schemes: &[Scheme],
    ref_divisor: usize,
    norm: ErrorNorm,
) -> CoreResult<Vec<(Scheme, EocTable)>> {
    use rayon::prelude::*;
    let pool = sweep_pool();
    let tau_ref = taus.iter().cloned().fold(f64::INFINITY, f64::min) / ref_divisor as f64;

    let results: Vec<CoreResult<(Scheme, EocTable)>> = pool.install(|| {
        schemes
            .par_iter()
            .map(|&scheme| {
                let (reference, ref_ok) = run_to_end(initial, ctx, scheme, tau_ref, t_end)?;
                let runs: Vec<CoreResult<(AleState, bool)>> = taus
                    .par_iter()
                    .map(|&tau| run_to_end(initial, ctx, scheme, tau, t_end))
                    .collect();
                let mut entries = Vec::with_capacity(taus.len());
                for (tau, r) in taus.iter().zip(runs) {
                    let (state, ok) = r?;
                    let err = same_space_error(&state, &reference, norm)?;
                    entries.push((format!("tau={tau}"), *tau, err, ok && ref_ok));
                }
                Ok((scheme, EocTable::from_errors(entries)))
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Spatial self-convergence on a nested family: runs at each level, errors
/// against the finest level (which does not get a table row).
pub struct SpaceEocRun {
    pub level: usize,
    pub state: AleState,
    pub completed: bool,
}

pub fn eoc_space(
    family: &MeshFamily,
    make_initial: &(dyn Fn(Arc<ReferenceMesh>) -> CoreResult<AleState> + Sync),
    ctx: &RunContext,
    scheme: Scheme,
    tau: f64,
    t_end: f64,
    norm: ErrorNorm,
) -> CoreResult<EocTable> {
    use rayon::prelude::*;
    let pool = sweep_pool();
    let levels = family.meshes.len();
    let runs: Vec<CoreResult<SpaceEocRun>> = pool.install(|| {
        (0..levels)
            .into_par_iter()
            .map(|lvl| {
                let initial = make_initial(family.meshes[lvl].clone())?;
                let (state, completed) = run_to_end(&initial, ctx, scheme, tau, t_end)?;
                Ok(SpaceEocRun {
                    level: lvl,
                    state,
                    completed,
                })
            })
            .collect()
    });
    let runs: Vec<SpaceEocRun> = runs.into_iter().collect::<CoreResult<_>>()?;
    let reference = runs.last().expect("at least one level");
    let mut entries = Vec::new();
    for r in &runs[..levels - 1] {
        let err = nested_state_error(
            family,
            &r.state,
            r.level,
            &reference.state,
            reference.level,
            norm,
        )?;
        let h = 0.5f64.powi(r.level as i32);
        entries.push((
            format!("level={}", self_level_label(family, r.level)),
            h,
            err,
            r.completed && reference.completed,
        ));
    }
    Ok(EocTable::from_errors(entries))
}

fn self_level_label(family: &MeshFamily, level: usize) -> usize {
    family.meshes[level].refinement_level
}
