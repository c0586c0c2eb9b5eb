use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bresse::cli::{
    parse_config, run_certify, run_simulate, run_spectrum, run_sweep, run_verify, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "bresse",
    about = "Spectral and time-domain stability laboratory for a boundary-damped curved beam",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat JSON configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a single config key, e.g. --set gamma3=0.5 --set n=128.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (defaults to $BRESSE_OUT_DIR or ./bresse-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the damped beam and fit the energy decay rate.
    Simulate,
    /// Compute the spectrum of the first-order operator.
    Spectrum,
    /// Sweep the resolvent norm along the imaginary axis.
    Sweep,
    /// Run the full exponential-stability certificate.
    Certify,
    /// Check the dissipativity, multiplier and boundary-trace residuals.
    Verify,
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<u8, bresse::cli::CliError> {
    match command {
        Command::Simulate => {
            let summary = run_simulate(config)?;
            println!(
                "simulate: {} steps, dt = {:.3e}, E0 = {:.6e}, fitted mu = {:.6} over {:?}",
                summary.steps, summary.dt, summary.initial_energy, summary.mu, summary.fit_window
            );
            Ok(0)
        }
        Command::Spectrum => {
            let summary = run_spectrum(config)?;
            println!(
                "spectrum: {} eigenvalues, abscissa = {:.6e}, clearance = {:.6e}",
                summary.count, summary.spectral_abscissa, summary.imag_axis_clearance
            );
            Ok(0)
        }
        Command::Sweep => {
            let summary = run_sweep(config)?;
            println!(
                "sweep: sup |R(i lambda)| = {:.6} at lambda = {:.3} over [{:+.1}, {:+.1}]",
                summary.sup_norm, summary.argmax, -summary.lambda_max, summary.lambda_max
            );
            Ok(0)
        }
        Command::Certify => {
            let certificate = run_certify(config)?;
            let verdict = if certificate.pass { "PASS" } else { "FAIL" };
            println!(
                "certify: {verdict} (raw abscissa {:.3e}, clearance {:.3e}, mu {:?}, sup {:?})",
                certificate.raw_spectral_abscissa,
                certificate.imag_axis_clearance,
                certificate.mu_candidate,
                certificate.resolvent_sup
            );
            for failure in &certificate.failures {
                println!("  failure: {failure}");
            }
            Ok(if certificate.pass { 0 } else { 1 })
        }
        Command::Verify => {
            let report = run_verify(config)?;
            let verdict = if report.pass { "PASS" } else { "FAIL" };
            println!(
                "verify: {verdict} (dissipativity {:.3e}, multiplier factor {:.3})",
                report.dissipativity_max_relative, report.multiplier_min_factor
            );
            for failure in &report.failures {
                println!("  failure: {failure}");
            }
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match parse_config(cli.config.as_deref(), &cli.set, cli.out.as_deref()) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli.command, &config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
