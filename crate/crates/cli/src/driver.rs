//! Drivers wiring configurations to runs, sweeps, and output files.

use crate::config::{Geometry, Model, RunConfig, SchemeName};
use crate::{csv, vtk};
use std::path::{Path, PathBuf};
use thinfilm_core::diagnostics::eoc::{eoc_space, eoc_time, EocTable, ErrorNorm, MeshFamily};
use thinfilm_core::diagnostics::{monitor, ridge_width, ScalarSeries};
use thinfilm_core::error::CoreError;
use thinfilm_core::fem::{FeSpace, Field};
use thinfilm_core::physics::PhysicsParams;
use thinfilm_core::state::{AleState, Event};
use thinfilm_core::stepper::{run, ExitReason, RunContext, RunSink, RunSummary, Scheme, StepInfo};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(#[from] crate::config::ConfigError),
}

pub fn build_initial_state(config: &RunConfig) -> Result<AleState, CoreError> {
    let params = config.physics_params();
    let vol0 = config.volume();
    match &config.geometry {
        Geometry::Disc { refinement } => thinfilm_core::state::initial_droplet_state(
            *refinement,
            config.degree,
            config.cell_type.cell_type(),
            vol0,
            &params,
        ),
        Geometry::Ridge {
            length,
            height,
            delta,
            refinement,
        } => thinfilm_core::state::initial_ridge_state(
            *length,
            *height,
            *delta,
            *refinement,
            config.degree,
            config.cell_type.cell_type(),
            vol0,
            &params,
        ),
    }
}

pub fn run_context(config: &RunConfig) -> RunContext {
    RunContext {
        params: config.physics_params(),
        mobilities: config.mobility_laws(),
        numerics: config.numerics(),
        solver: config.model.solver(),
    }
}

/// Collects the scalar time series and translation estimates.
pub struct MonitorSink {
    pub params: PhysicsParams,
    pub ridge: bool,
    pub series: ScalarSeries,
    pub translation: Vec<(f64, [f64; 2])>,
}

impl MonitorSink {
    pub fn new(params: PhysicsParams, ridge: bool, initial: &AleState) -> Self {
        let mut series = ScalarSeries::default();
        if let Ok(row) = monitor(initial, &params, 0, ridge) {
            series.rows.push(row);
        }
        MonitorSink {
            params,
            ridge,
            series,
            translation: Vec::new(),
        }
    }
}

impl RunSink for MonitorSink {
    fn on_step(&mut self, step: usize, state: &AleState, info: &StepInfo) {
        if let Ok(row) = monitor(state, &self.params, step, self.ridge) {
            self.series.rows.push(row);
        }
        self.translation.push((state.t, info.w));
    }
}

/// Writes VTK snapshots into the output directory.
pub struct VtkSink {
    pub dir: PathBuf,
    pub written: usize,
}

impl RunSink for VtkSink {
    fn on_snapshot(&mut self, step: usize, state: &AleState, pi: Option<&Field>) {
        let path = self.dir.join(format!("snapshot_{step:06}.vtk"));
        if vtk::write_vtk(state, pi, &path).is_ok() {
            self.written += 1;
        }
    }
}

pub struct RunArtifacts {
    pub summary: RunSummary,
    pub series: ScalarSeries,
    pub translation: Vec<(f64, [f64; 2])>,
}

/// Execute a configured trajectory, writing CSV/VTK/manifest into `out_dir`
/// (falling back to the config's output.dir).
pub fn run_config(config: &RunConfig, out_dir: Option<&Path>) -> Result<RunArtifacts, DriverError> {
    let initial = build_initial_state(config)?;
    let ctx = run_context(config);
    let stepper = config.stepper_config();
    let ridge = config.is_ridge();
    let dir = out_dir
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));

    let mut monitor_sink = MonitorSink::new(ctx.params, ridge, &initial);
    let mut vtk_sink = VtkSink {
        dir: dir.clone(),
        written: 0,
    };
    let mut sinks: Vec<&mut dyn RunSink> = vec![&mut monitor_sink];
    if config.output.vtk {
        sinks.push(&mut vtk_sink);
    }

    // ridges stop when the free boundaries touch (loose floor keeps the
    // pinch-off tail measurable without running into a tangled mesh)
    let width_floor = if ridge {
        match &config.geometry {
            Geometry::Ridge { length, .. } => Some(0.02 * length),
            _ => None,
        }
    } else {
        None
    };
    let mut hook = width_floor.map(|floor| {
        move |state: &AleState| -> Option<Event> {
            match ridge_width(state, 64) {
                Ok(w) if w.crossed || w.width < floor => Some(Event::WidthCollapse { t: state.t }),
                _ => None,
            }
        }
    });

    let summary = run(
        &initial,
        &ctx,
        &stepper,
        &mut sinks,
        hook.as_mut().map(|h| h as &mut dyn FnMut(&AleState) -> Option<Event>),
    )?;

    if config.output.csv {
        csv::write_series(&monitor_sink.series, ridge, &dir.join("series.csv"))?;
    }
    write_manifest(config, &summary, &dir)?;
    Ok(RunArtifacts {
        summary,
        series: monitor_sink.series,
        translation: monitor_sink.translation,
    })
}

fn write_manifest(
    config: &RunConfig,
    summary: &RunSummary,
    dir: &Path,
) -> Result<(), DriverError> {
    std::fs::create_dir_all(dir)?;
    let exit = match &summary.exit {
        ExitReason::Completed => "completed".to_string(),
        ExitReason::Terminal(ev) => format!("terminal: {ev:?}"),
    };
    let manifest = serde_json::json!({
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "exit": exit,
        "steps": summary.steps,
        "final_t": summary.final_state.t,
        "events": summary.events.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>(),
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(())
}

pub fn exit_code(summary: &RunSummary) -> i32 {
    match summary.exit {
        ExitReason::Completed => 0,
        ExitReason::Terminal(_) => 3,
    }
}

/// Temporal EOC sweep for a config: one table per scheme, self-convergent
/// against the same scheme at tau_min/16.
pub fn eoc_time_driver(
    config: &RunConfig,
    taus: &[f64],
    schemes: &[SchemeName],
) -> Result<Vec<(Scheme, EocTable)>, DriverError> {
    let initial = build_initial_state(config)?;
    let ctx = run_context(config);
    let schemes: Vec<Scheme> = schemes.iter().map(|s| s.scheme()).collect();
    Ok(eoc_time(
        &initial,
        &ctx,
        config.stepper.t_end,
        taus,
        &schemes,
        16,
        ErrorNorm::L2,
    )?)
}

/// Spatial EOC sweep on the nested family defined by the config's geometry,
/// running each refinement to t_end and comparing against the finest.
pub fn eoc_space_driver(
    config: &RunConfig,
    refinements: &[usize],
    norm: ErrorNorm,
) -> Result<EocTable, DriverError> {
    let ct = config.cell_type.cell_type();
    let family = match &config.geometry {
        Geometry::Disc { .. } => MeshFamily::disc(refinements, config.degree, ct)?,
        Geometry::Ridge { length, height, .. } => {
            MeshFamily::ridge(*length, *height, refinements, config.degree, ct)?
        }
    };
    let params = config.physics_params();
    let vol0 = config.volume();
    let degree = config.degree;
    let geometry = config.geometry.clone();
    let make_initial = move |mesh: std::sync::Arc<thinfilm_core::mesh::ReferenceMesh>| {
        let space = FeSpace::new(mesh, degree)?;
        let psi = match &geometry {
            Geometry::Disc { .. } => Field::identity(space.clone()),
            Geometry::Ridge { height, delta, .. } => {
                let map = thinfilm_core::mesh::ridge_initial_map(*delta, *height);
                Field::vector_from(space.clone(), space.interpolate_vector(map))
            }
        };
        let shape = thinfilm_core::quasistatic::stationary_shape(&space, &psi, vol0, &params)?;
        Ok(AleState::new(space, psi, shape.h, vol0))
    };
    let ctx = run_context(config);
    Ok(eoc_space(
        &family,
        &make_initial,
        &ctx,
        config.stepper.scheme.scheme(),
        config.stepper.tau,
        config.stepper.t_end,
        norm,
    )?)
}

/// Stationary heights on the tilted unit disc: min h per g_x (the positivity
/// counterexample sweep).
pub fn feasibility_sweep(
    gx_values: &[f64],
    refinement: usize,
    degree: usize,
) -> Result<Vec<(f64, f64)>, DriverError> {
    let mesh = std::sync::Arc::new(thinfilm_core::mesh::build_disc_mesh(
        refinement,
        degree,
        thinfilm_core::fem::CellType::Quad,
    )?);
    let space = FeSpace::new(mesh, degree)?;
    let psi = Field::identity(space.clone());
    let mut rows = Vec::with_capacity(gx_values.len());
    for &gx in gx_values {
        let params = PhysicsParams {
            g_x: [gx, 0.0],
            s: 1.0,
            eps_line: 0.01,
            ..Default::default()
        };
        let shape = thinfilm_core::quasistatic::stationary_shape(&space, &psi, 1.0, &params)?;
        rows.push((gx, shape.min_h));
    }
    Ok(rows)
}

/// Named ridge configurations: strong-limit pinch-off for each contact-law
/// exponent and the transient instability for several contact mobilities.
pub fn ridge_preset(name: &str) -> Result<RunConfig, DriverError> {
    let (model, n0, theta, t_end, tau) = match name {
        "strong-theta0" => (Model::Strong, 1.0, 0, 12.0, 0.02),
        "strong-theta-1" => (Model::Strong, 1.0, -1, 12.0, 0.02),
        "strong-theta+1" => (Model::Strong, 1.0, 1, 12.0, 0.02),
        "transient-n0.1" => (Model::Transient, 0.1, 0, 40.0, 0.01),
        "transient-n1" => (Model::Transient, 1.0, 0, 40.0, 0.01),
        "transient-n10" => (Model::Transient, 10.0, 0, 40.0, 0.01),
        other => {
            return Err(crate::config::ConfigError::Invalid(format!(
                "unknown ridge preset {other}; expected strong-theta{{0,-1,+1}} or transient-n{{0.1,1,10}}"
            ))
            .into())
        }
    };
    let text = serde_json::json!({
        "model": match model { Model::Strong => "strong", _ => "transient" },
        "geometry": {"ridge": {"length": 1.0, "height": 2.0, "delta": 0.1, "refinement": 3}},
        "degree": 2,
        "physics": {"s": 1.0, "eps_line": if model == Model::Strong { 0.02 } else { 0.0 }},
        "m": {"power": {"m0": 1.0, "alpha": 2.0}},
        "n": {"n0": n0, "theta": theta},
        "stepper": {"scheme": "SEMI1", "tau": tau, "t_end": t_end},
        "output": {"dir": format!("out/ridge-{name}"), "snapshot_every": 25}
    });
    Ok(crate::config::parse_config(&text.to_string())?)
}
