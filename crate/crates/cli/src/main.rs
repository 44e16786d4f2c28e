use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use thinfilm_cli::config::SchemeName;
use thinfilm_cli::driver::{
    eoc_space_driver, eoc_time_driver, exit_code, feasibility_sweep, ridge_preset, run_config,
    DriverError,
};
use thinfilm_core::diagnostics::eoc::ErrorNorm;
use thinfilm_core::diagnostics::oned::{appendix_oracle, MuKind};

/// Finite-element simulation of thin-film free boundary problems with dynamic
/// contact angle on moving supports.
#[derive(Parser)]
#[command(name = "thinfilm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured trajectory, writing CSV/VTK/manifest outputs.
    Run {
        /// JSON run configuration
        config: PathBuf,
        /// output directory (overrides the config's output.dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spatial self-convergence sweep over uniform refinements.
    EocSpace {
        config: PathBuf,
        /// consecutive refinement levels, finest is the reference
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
        refinements: Vec<usize>,
        /// error norm: l2 or max
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Temporal self-convergence sweep under step-size bisection.
    EocTime {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec!["SEMI1".to_string(), "RICH2".to_string(), "RICH3".to_string()])]
        schemes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 1d degenerate-elliptic convergence tables.
    AppendixA {
        /// coefficient: x2 (degenerate) or 1+x2 (regular)
        #[arg(long)]
        mu: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4])]
        refinements: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary heights on the tilted disc: min h per in-plane gravity.
    FeasibilitySweep {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 4.0, 6.0, 8.0, 10.0])]
        gx: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        refinement: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Ridge instability presets (strong-theta{0,-1,+1}, transient-n{0.1,1,10}).
    Ridge {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                AppError::Config(_) => 2,
                AppError::Driver(DriverError::Config(_)) => 2,
                AppError::Driver(_) | AppError::Io(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error(transparent)]
    Config(#[from] thinfilm_cli::ConfigError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn load_config(path: &PathBuf) -> Result<thinfilm_cli::RunConfig, AppError> {
    let text = std::fs::read_to_string(path)?;
    Ok(thinfilm_cli::parse_config(&text)?)
}

fn print_table(name: &str, table: &thinfilm_core::diagnostics::eoc::EocTable) {
    println!("{name}");
    println!("{:<14} {:>14} {:>14} {:>8}", "label", "resolution", "error", "EOC");
    for row in &table.rows {
        let eoc = row
            .eoc
            .map(|e| format!("{e:8.3}"))
            .unwrap_or_else(|| "       -".into());
        let flag = if row.valid { "" } else { "  (invalid)" };
        println!(
            "{:<14} {:>14.6e} {:>14.6e} {}{}",
            row.label, row.resolution, row.error, eoc, flag
        );
    }
}

fn dispatch(cli: Cli) -> Result<u8, AppError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let artifacts = run_config(&cfg, out.as_deref())?;
            println!(
                "run finished: {} steps to t = {:.6}, exit = {:?}",
                artifacts.summary.steps, artifacts.summary.final_state.t, artifacts.summary.exit
            );
            Ok(exit_code(&artifacts.summary) as u8)
        }
        Command::EocSpace {
            config,
            refinements,
            norm,
            out,
        } => {
            let cfg = load_config(&config)?;
            let norm = match norm.as_str() {
                "l2" => ErrorNorm::L2,
                "max" => ErrorNorm::Max,
                other => {
                    return Err(thinfilm_cli::ConfigError::Invalid(format!(
                        "norm must be l2 or max, got {other}"
                    ))
                    .into())
                }
            };
            let table = eoc_space_driver(&cfg, &refinements, norm)?;
            print_table("spatial self-convergence", &table);
            if let Some(path) = out {
                thinfilm_cli::csv::write_eoc_table(&table, &path)?;
            }
            Ok(0)
        }
        Command::EocTime {
            config,
            taus,
            schemes,
            out,
        } => {
            let cfg = load_config(&config)?;
            let taus = if taus.is_empty() {
                let t0 = cfg.stepper.tau;
                vec![t0, t0 / 2.0, t0 / 4.0]
            } else {
                taus
            };
            let schemes: Result<Vec<SchemeName>, _> =
                schemes.iter().map(|s| SchemeName::parse(s)).collect();
            let tables = eoc_time_driver(&cfg, &taus, &schemes?)?;
            for (scheme, table) in &tables {
                print_table(&format!("temporal self-convergence, {}", scheme.name()), table);
                if let Some(path) = &out {
                    let p = path.with_file_name(format!(
                        "{}_{}.csv",
                        path.file_stem().and_then(|s| s.to_str()).unwrap_or("eoc"),
                        scheme.name()
                    ));
                    thinfilm_cli::csv::write_eoc_table(table, &p)?;
                }
            }
            Ok(0)
        }
        Command::AppendixA {
            mu,
            degree,
            refinements,
            out,
        } => {
            let mu = match mu.as_str() {
                "x2" => MuKind::Degenerate,
                "1+x2" => MuKind::Regular,
                other => {
                    return Err(thinfilm_cli::ConfigError::Invalid(format!(
                        "mu must be x2 or 1+x2, got {other}"
                    ))
                    .into())
                }
            };
            if !(1..=3).contains(&degree) {
                return Err(thinfilm_cli::ConfigError::Invalid(format!(
                    "degree must be 1, 2 or 3, got {degree}"
                ))
                .into());
            }
            let table = appendix_oracle(mu, degree, &refinements)
                .map_err(DriverError::Core)?;
            print_table(&format!("1d convergence, P{degree}, mu = {mu:?}"), &table);
            if let Some(path) = out {
                thinfilm_cli::csv::write_eoc_table(&table, &path)?;
            }
            Ok(0)
        }
        Command::FeasibilitySweep {
            gx,
            refinement,
            degree,
        } => {
            let rows = feasibility_sweep(&gx, refinement, degree)?;
            println!("{:>8} {:>16}", "g_x", "min h");
            for (gx, min_h) in rows {
                println!("{gx:>8.2} {min_h:>16.6e}");
            }
            Ok(0)
        }
        Command::Ridge { preset, out } => {
            let cfg = ridge_preset(&preset)?;
            let artifacts = run_config(&cfg, out.as_deref())?;
            println!(
                "ridge {preset}: {} steps to t = {:.4}, exit = {:?}",
                artifacts.summary.steps, artifacts.summary.final_state.t, artifacts.summary.exit
            );
            Ok(exit_code(&artifacts.summary) as u8)
        }
    }
}
