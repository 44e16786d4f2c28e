//! Drives base steps of either solver with Richardson extrapolation in time
//! and records trajectories through caller-provided sinks.
//!
//! The extrapolated macro step combines the endpoints of sub-step chains of
//! size tau/k coefficient-wise:
//!   SEMI1: q_tau
//!   RICH2: 2 q_{tau/2} - q_tau
//!   RICH3: 8/3 q_{tau/4} - 2 q_{tau/2} + 1/3 q_tau
//! following the general rule q(r+1, tau) = (2^r q(r, tau/2) - q(r, tau)) / (2^r - 1).

use crate::error::CoreResult;
use crate::fem::Field;
use crate::physics::{MobilityLaws, PhysicsParams};
use crate::quasistatic;
use crate::state::{AleState, Event, NumericsParams};
use crate::transient::{self, TransientModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Semi1,
    Rich2,
    Rich3,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Semi1 => "SEMI1",
            Scheme::Rich2 => "RICH2",
            Scheme::Rich3 => "RICH3",
        }
    }
}

/// Which member of the model hierarchy the run advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverModel {
    Transient,
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub tau: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub solver: SolverModel,
}

/// Everything a base step needs besides the state.
#[derive(Debug, Clone, Copy)]
pub struct RunContext {
    pub params: PhysicsParams,
    pub mobilities: MobilityLaws,
    pub numerics: NumericsParams,
    pub solver: SolverModel,
}

/// Per-step information handed to sinks.
pub struct StepInfo {
    pub w: [f64; 2],
    pub pi_hat: Option<f64>,
    pub pi: Option<Field>,
    pub events: Vec<Event>,
}

/// Observer of a trajectory. Snapshots fire on step 0, every snapshot_every
/// steps, and at the end of the run.
pub trait RunSink {
    fn on_step(&mut self, _step: usize, _state: &AleState, _info: &StepInfo) {}
    fn on_snapshot(&mut self, _step: usize, _state: &AleState, _pi: Option<&Field>) {}
}

/// Outcome of one base step, uniform across the model hierarchy.
pub struct BaseOutcome {
    pub state: AleState,
    pub w: [f64; 2],
    pub pi_hat: Option<f64>,
    pub pi: Option<Field>,
    pub events: Vec<Event>,
}

impl BaseOutcome {
    pub fn terminal(&self) -> Option<&Event> {
        self.events.iter().find(|e| e.is_terminal())
    }
}

fn advance_base(state: &AleState, ctx: &RunContext, tau: f64) -> CoreResult<BaseOutcome> {
    match ctx.solver {
        SolverModel::Transient | SolverModel::Weak => {
            let model = if ctx.solver == SolverModel::Transient {
                TransientModel::Full
            } else {
                TransientModel::WeakDissipation
            };
            let out = transient::base_step(
                state,
                &ctx.params,
                &ctx.mobilities,
                &ctx.numerics,
                tau,
                model,
            )?;
            Ok(BaseOutcome {
                state: out.state,
                w: out.rates.w,
                pi_hat: None,
                pi: Some(out.rates.pi),
                events: out.events,
            })
        }
        SolverModel::Strong => {
            let out = quasistatic::quasistatic_step(
                state,
                &ctx.params,
                &ctx.mobilities,
                &ctx.numerics,
                tau,
            )?;
            Ok(BaseOutcome {
                state: out.state,
                w: out.w,
                pi_hat: Some(out.pi_hat),
                pi: None,
                events: out.events,
            })
        }
    }
}

/// k successive base steps of size tau/k; a terminal event aborts the chain.
pub fn substep_chain(
    state: &AleState,
    ctx: &RunContext,
    tau: f64,
    k: usize,
) -> CoreResult<BaseOutcome> {
    assert!(k >= 1);
    let sub = tau / k as f64;
    let mut current = state.clone();
    let mut last: Option<BaseOutcome> = None;
    for _ in 0..k {
        let out = advance_base(&current, ctx, sub)?;
        let stop = out.terminal().is_some();
        current = out.state.clone();
        last = Some(out);
        if stop {
            break;
        }
    }
    let mut out = last.expect("k >= 1");
    out.state = current;
    Ok(out)
}

/// One extrapolated macro step of size tau.
pub fn extrapolated_step(
    state: &AleState,
    ctx: &RunContext,
    tau: f64,
    scheme: Scheme,
) -> CoreResult<BaseOutcome> {
    let chains: &[(usize, f64)] = match scheme {
        Scheme::Semi1 => &[(1, 1.0)],
        Scheme::Rich2 => &[(1, -1.0), (2, 2.0)],
        Scheme::Rich3 => &[(1, 1.0 / 3.0), (2, -2.0), (4, 8.0 / 3.0)],
    };

    let mut endpoints = Vec::with_capacity(chains.len());
    for &(k, _) in chains {
        let out = substep_chain(state, ctx, tau, k)?;
        if let Some(ev) = out.terminal() {
            let ev = ev.clone();
            return Ok(BaseOutcome {
                state: state.clone(),
                w: out.w,
                pi_hat: out.pi_hat,
                pi: out.pi,
                events: vec![ev],
            });
        }
        endpoints.push(out);
    }

    if chains.len() == 1 {
        return Ok(endpoints.pop().expect("one chain"));
    }

    // coefficient-wise affine combination of the (psi, h) endpoints
    let mut psi = vec![0.0; state.psi.coeffs.len()];
    let mut h = vec![0.0; state.h.coeffs.len()];
    for (out, &(_, c)) in endpoints.iter().zip(chains) {
        for (p, v) in psi.iter_mut().zip(&out.state.psi.coeffs) {
            *p += c * v;
        }
        for (p, v) in h.iter_mut().zip(&out.state.h.coeffs) {
            *p += c * v;
        }
    }
    let finest = endpoints.last().expect("at least two chains");
    let mut combined = state.clone();
    combined.psi = Field::vector_from(state.space.clone(), psi);
    combined.h = Field::scalar_from(state.space.clone(), h);
    combined.t = state.t + tau;

    let mut events = Vec::new();
    let mut pi_hat = finest.pi_hat;
    if let Err(cell) = combined.check_untangled() {
        events.push(Event::MeshTangled { t: state.t, cell });
    } else if ctx.solver == SolverModel::Strong {
        // the stationary height is a function of the domain; re-solving on the
        // combined support restores the hard volume constraint
        let shape = quasistatic::stationary_shape(
            &combined.space,
            &combined.psi,
            combined.vol0,
            &ctx.params,
        )?;
        combined.h = shape.h;
        pi_hat = Some(shape.pi_hat);
        if shape.min_h < -ctx.numerics.feasibility_tol {
            events.push(Event::Feasibility {
                t: combined.t,
                min_h: shape.min_h,
            });
        }
    } else {
        let min_h = combined.min_h();
        if min_h < -ctx.numerics.feasibility_tol {
            events.push(Event::Feasibility {
                t: combined.t,
                min_h,
            });
        }
    }

    let has_terminal = events.iter().any(|e| e.is_terminal());
    Ok(BaseOutcome {
        state: if has_terminal { state.clone() } else { combined },
        w: finest.w,
        pi_hat,
        pi: finest.pi.clone(),
        events,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExitReason {
    Completed,
    Terminal(Event),
}

pub struct RunSummary {
    pub exit: ExitReason,
    pub final_state: AleState,
    pub steps: usize,
    pub events: Vec<Event>,
}

/// Steps from the initial state to t_end (or a terminal event), streaming
/// snapshots and per-step data into the sinks. The stop hook can terminate the
/// run with a custom event (for example a ridge width floor).
pub fn run(
    initial: &AleState,
    ctx: &RunContext,
    config: &StepperConfig,
    sinks: &mut [&mut dyn RunSink],
    mut stop_hook: Option<&mut dyn FnMut(&AleState) -> Option<Event>>,
) -> CoreResult<RunSummary> {
    let mut state = initial.clone();
    let mut all_events = Vec::new();
    for sink in sinks.iter_mut() {
        sink.on_snapshot(0, &state, None);
    }
    let mut step = 0usize;
    let t_tol = 1e-12 * config.t_end.max(1.0);
    while state.t < config.t_end - t_tol {
        let tau = config.tau.min(config.t_end - state.t);
        let out = extrapolated_step(&state, ctx, tau, config.scheme)?;
        step += 1;
        let info = StepInfo {
            w: out.w,
            pi_hat: out.pi_hat,
            pi: out.pi,
            events: out.events.clone(),
        };
        all_events.extend(out.events.iter().cloned());
        let terminal = out.events.iter().find(|e| e.is_terminal()).cloned();
        state = out.state;
        for sink in sinks.iter_mut() {
            sink.on_step(step, &state, &info);
        }
        if config.snapshot_every > 0 && step % config.snapshot_every == 0 && terminal.is_none() {
            for sink in sinks.iter_mut() {
                sink.on_snapshot(step, &state, info.pi.as_ref());
            }
        }
        if let Some(ev) = terminal {
            for sink in sinks.iter_mut() {
                sink.on_snapshot(step, &state, info.pi.as_ref());
            }
            return Ok(RunSummary {
                exit: ExitReason::Terminal(ev),
                final_state: state,
                steps: step,
                events: all_events,
            });
        }
        if let Some(hook) = stop_hook.as_mut() {
            if let Some(ev) = hook(&state) {
                all_events.push(ev.clone());
                for sink in sinks.iter_mut() {
                    sink.on_snapshot(step, &state, info.pi.as_ref());
                }
                return Ok(RunSummary {
                    exit: ExitReason::Terminal(ev),
                    final_state: state,
                    steps: step,
                    events: all_events,
                });
            }
        }
    }
    for sink in sinks.iter_mut() {
        sink.on_snapshot(step, &state, None);
    }
    Ok(RunSummary {
        exit: ExitReason::Completed,
        final_state: state,
        steps: step,
        events: all_events,
    })
}
