//! Command-line interface: report, bounds, sweep, simulate, validate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gravent::config;
use gravent::error::Error;
use gravent::feasibility::{self, Unknown};
use gravent::protocols;
use gravent::quantities::{ExperimentConfig, Protocol, CODATA};
use gravent::rates::{ChannelId, RateBudget};
use gravent::sweep::{self, SweepSpec};

/// Exit codes: 0 feasible/success, 1 completed but infeasible, 2 invalid
/// configuration, 3 numerical failure.
const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_BAD_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gravent",
    version,
    about = "Rate budgets, bounds, sweeps, and simulators for gravitationally \
             induced entanglement experiments"
)]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress human-readable output (files and exit codes still apply).
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the rate budget of a configuration.
    Report { config: PathBuf },
    /// Solve the feasibility bound on one unknown.
    Bounds {
        config: PathBuf,
        /// delta_x, pressure, temp_environment, temp_internal, radius,
        /// gamma, pos_noise_amp, freq_noise_amp, or nbar.
        #[arg(long)]
        unknown: String,
        /// Channel id, or "all" for every channel of the protocol.
        #[arg(long, default_value = "all")]
        channel: String,
    },
    /// Grid-scan two unknowns and extract the feasibility frontier.
    Sweep {
        config: PathBuf,
        spec: PathBuf,
        /// Output directory for grid.csv, frontier.csv, sweep.svg.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a protocol and write the entanglement trace CSV.
    Simulate {
        config: PathBuf,
        /// csign or oscillator.
        #[arg(long)]
        protocol: String,
        #[arg(long = "t-max")]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce the worked numerical examples as a regression table.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Io { .. } => EXIT_BAD_CONFIG,
                _ => EXIT_NUMERICAL,
            }
        }
    };
    ExitCode::from(code)
}

fn run(cli: &Cli) -> gravent::Result<u8> {
    match &cli.command {
        Command::Report { config } => cmd_report(cli, config),
        Command::Bounds {
            config,
            unknown,
            channel,
        } => cmd_bounds(cli, config, unknown, channel),
        Command::Sweep { config, spec, out } => cmd_sweep(cli, config, spec, out),
        Command::Simulate {
            config,
            protocol,
            t_max,
            samples,
            out,
        } => cmd_simulate(cli, config, protocol, *t_max, *samples, out),
        Command::Validate => cmd_validate(cli),
    }
}

fn engineering(v: f64) -> String {
    format!("{v:.2e}")
}

fn print_budget(budget: &RateBudget) {
    println!("Gamma_ent: {} 1/s", engineering(budget.gamma_ent));
    println!("{:<22} {:>12} {:>12}", "channel", "rate [1/s]", "margin");
    for e in &budget.channels {
        let margin = match e.margin {
            Some(m) => engineering(m),
            None => "inf".to_string(),
        };
        let mark = if Some(e.channel) == budget.binding_channel {
            "  << binding"
        } else {
            ""
        };
        println!(
            "{:<22} {:>12} {:>12}{}",
            e.channel.name(),
            engineering(e.rate),
            margin,
            mark
        );
    }
    if let Some(m) = budget.aggregate_margin {
        println!("aggregate margin: {}", engineering(m));
    }
    println!("feasible: {}", if budget.effective_feasible() { "yes" } else { "no" });
    for w in &budget.warnings {
        println!("warning: {w}");
    }
}

fn cmd_report(cli: &Cli, config_path: &Path) -> gravent::Result<u8> {
    let cfg = config::load_config(config_path)?;
    let budget = feasibility::evaluate(&CODATA, &cfg)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&budget).expect("budget serializes"));
    } else if !cli.quiet {
        print_budget(&budget);
    }
    Ok(if budget.effective_feasible() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

fn cmd_bounds(cli: &Cli, config_path: &Path, unknown: &str, channel: &str) -> gravent::Result<u8> {
    let cfg = config::load_config(config_path)?;
    let unknown: Unknown = unknown.parse()?;
    let channels: Vec<ChannelId> = if channel == "all" {
        ChannelId::for_protocol(cfg.protocol()).to_vec()
    } else {
        vec![channel.parse()?]
    };
    let bound = feasibility::solve_bound(&CODATA, &cfg, unknown, &channels)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&bound).expect("bound serializes"));
    } else if !cli.quiet {
        println!(
            "{}: {} ({} bound, binding channel {}, {} iterations)",
            bound.unknown,
            engineering(bound.threshold),
            match bound.direction {
                feasibility::BoundDirection::UpperBound => "upper",
                feasibility::BoundDirection::LowerBound => "lower",
            },
            bound.channel.name(),
            bound.iterations
        );
    }
    Ok(EXIT_OK)
}

fn write_file(path: &Path, contents: &str) -> gravent::Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn cmd_sweep(cli: &Cli, config_path: &Path, spec_path: &Path, out: &Path) -> gravent::Result<u8> {
    let base = config::load_config(config_path)?;
    let spec_file = config::load_sweep_spec(spec_path)?;
    let (axis1, axis2) = spec_file.axes()?;
    let spec = SweepSpec { base, axis1, axis2 };
    let grid = sweep::run_sweep(&CODATA, &spec)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let outputs = spec_file.outputs();
    if outputs.contains(&config::OutputKind::GridCsv) {
        write_file(&out.join("grid.csv"), &sweep::grid_csv(&grid))?;
    }

    let frontier = match sweep::frontier(&CODATA, &spec, &grid) {
        Ok(f) => Some(f),
        Err(Error::Numerical(msg)) => {
            if !cli.quiet {
                eprintln!("warning: {msg}");
            }
            None
        }
        Err(e) => return Err(e),
    };
    if outputs.contains(&config::OutputKind::FrontierCsv) {
        let text = match &frontier {
            Some(f) => sweep::frontier_csv(&grid, f),
            None => sweep::frontier_csv(
                &grid,
                &sweep::Frontier {
                    points: vec![],
                    skipped: vec![],
                },
            ),
        };
        write_file(&out.join("frontier.csv"), &text)?;
    }
    if outputs.contains(&config::OutputKind::Svg) {
        write_file(&out.join("sweep.svg"), &sweep::grid_svg(&grid, frontier.as_ref()))?;
    }

    if cli.json {
        let summary = serde_json::json!({
            "cells": grid.cells.len(),
            "invalid_fraction": grid.invalid_fraction(),
            "frontier_points": frontier.as_ref().map(|f| f.points.len()).unwrap_or(0),
            "out_dir": out.display().to_string(),
        });
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    } else if !cli.quiet {
        println!(
            "swept {} cells ({} invalid), frontier points: {}",
            grid.cells.len(),
            grid.cells.len() as f64 * grid.invalid_fraction(),
            frontier.as_ref().map(|f| f.points.len()).unwrap_or(0)
        );
        if let Some(f) = &frontier {
            for note in &f.skipped {
                println!("note: {note}");
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(
    cli: &Cli,
    config_path: &Path,
    protocol: &str,
    t_max: f64,
    samples: usize,
    out: &Path,
) -> gravent::Result<u8> {
    let cfg = config::load_config(config_path)?;
    let trace = match protocol {
        "csign" => {
            let cfg: ExperimentConfig = cfg.with_protocol(Protocol::CsignPhase)?;
            protocols::simulate_csign(&CODATA, &cfg, t_max, samples)?
        }
        "oscillator" => {
            let cfg = cfg.with_protocol(Protocol::CoupledOscillators)?;
            protocols::simulate_oscillator(&CODATA, &cfg, t_max, samples)?
        }
        other => {
            return Err(Error::config(
                "protocol",
                format!("expected \"csign\" or \"oscillator\", got \"{other}\""),
            ))
        }
    };
    write_file(out, &trace.to_csv())?;
    let onset = trace.onset(1e-6);
    if cli.json {
        let doc = serde_json::json!({
            "onset_s": onset,
            "samples": trace.points.len(),
            "out": out.display().to_string(),
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("doc serializes"));
    } else if !cli.quiet {
        match onset {
            Some(t) => println!("entanglement onset: {} s", engineering(t)),
            None => println!("entanglement onset: none"),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(cli: &Cli) -> gravent::Result<u8> {
    let rows = feasibility::validate_paper_examples();
    let report = feasibility::ValidationReport::new(rows);
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else if !cli.quiet {
        print!("{}", feasibility::validation_table(&report.rows));
        println!(
            "{} of {} cases pass",
            report.rows.iter().filter(|r| r.pass).count(),
            report.rows.len()
        );
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_INFEASIBLE })
}
