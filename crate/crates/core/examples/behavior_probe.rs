// temporary probe: pinch-law fits for the acceptance ridge configuration
use thinfilm_core::diagnostics::fit::{fit_power_exponent, FitModel};
use thinfilm_core::diagnostics::ridge_width;
use thinfilm_core::physics::{BulkMobility, ContactMobility, MobilityLaws, PhysicsParams};
use thinfilm_core::state::{initial_ridge_state, Event, NumericsParams, TangentialMode};
use thinfilm_core::stepper::{run, RunContext, RunSink, Scheme, SolverModel, StepInfo, StepperConfig};
use thinfilm_core::fem::CellType;

struct WidthSink { rows: Vec<(f64, f64, f64)> }
impl RunSink for WidthSink {
    fn on_step(&mut self, _s: usize, state: &thinfilm_core::state::AleState, _i: &StepInfo) {
        if let Ok(w) = ridge_width(state, 64) {
            self.rows.push((state.t, w.width, w.y_at_min));
        }
    }
}

fn main() {
    let cases = [
        ("strong th=0 ", SolverModel::Strong, 1.0, 0, 0.02, 0.005, 4.0),
        ("strong th=-1", SolverModel::Strong, 1.0, -1, 0.02, 0.005, 4.0),
        ("strong th=+1", SolverModel::Strong, 1.0, 1, 0.02, 0.005, 20.0),
        ("trans n0=1  ", SolverModel::Transient, 1.0, 0, 0.0, 0.005, 20.0),
    ];
    for (name, solver, n0, theta, eps, tau, t_end) in cases {
        let params = PhysicsParams { s: 1.0, eps_line: eps, ..Default::default() };
        let mob = MobilityLaws {
            bulk: BulkMobility::Power { m0: 1.0, alpha: 2.0 },
            contact: ContactMobility { n0, theta },
        };
        let vol = thinfilm_core::state::ridge_equilibrium_volume(1.0, 4.0, &params);
        let state0 = initial_ridge_state(1.0, 4.0, 0.1, 3, 2, CellType::Quad, vol, &params).unwrap();
        let ctx = RunContext { params, mobilities: mob,
            numerics: NumericsParams { tangential: TangentialMode::Zero, ..Default::default() },
            solver };
        let config = StepperConfig { scheme: Scheme::Semi1, tau, t_end, snapshot_every: 0, solver };
        let mut sink = WidthSink { rows: vec![] };
        let mut hook = |state: &thinfilm_core::state::AleState| -> Option<Event> {
            match ridge_width(state, 64) {
                Ok(w) if w.crossed || w.width < 0.02 => Some(Event::WidthCollapse { t: state.t }),
                _ => None,
            }
        };
        let t0 = std::time::Instant::now();
        match run(&state0, &ctx, &config, &mut [&mut sink], Some(&mut hook)) {
            Ok(s) => {
                let last = sink.rows.last().cloned().unwrap_or((0.0, 0.0, 0.0));
                println!("{name}: t={:.3} w={:.4} y={:.3} |y-H/2|/H={:.3} steps={} [{:.0}s] exit={:?}",
                    s.final_state.t, last.1, last.2, (last.2 - 2.0f64).abs() / 4.0, s.steps,
                    t0.elapsed().as_secs_f64(), s.exit);
                let samples: Vec<(f64,f64)> = sink.rows.iter().map(|r| (r.0, r.1)).collect();
                if let Ok(fit) = fit_power_exponent(&samples, FitModel::Power) {
                    println!("   power: p={:.3} t_c={:.3} R2={:.5}", fit.exponent, fit.t_c.unwrap_or(f64::NAN), fit.r2);
                }
                if let Ok(fit) = fit_power_exponent(&samples, FitModel::Exponential) {
                    println!("   exp: rate={:.3} R2={:.5}", fit.exponent, fit.r2);
                }
            }
            Err(e) => println!("{name}: error {e}"),
        }
    }
}
