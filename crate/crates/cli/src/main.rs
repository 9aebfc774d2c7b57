use clap::{Parser, Subcommand};

use doublewell_cli::commands;
use doublewell_cli::config::{parse_pi_number, CommonArgs, RunConfig};
use doublewell_cli::error::CliResult;

#[derive(Parser)]
#[command(
    name = "dwell",
    version,
    about = "Driven symmetric double well: spectra, trapping dynamics, dissipative steady states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field-free spectrum: energies, parities, splittings, dipole table
    Spectrum {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Laser calibration, renormalized parameters, and validity report
    Calibrate {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Exact driven dynamics in the truncated eigenbasis
    Evolve {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Closed-form three-level populations
    Analytic {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Numeric vs closed-form comparison report
    Compare {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Dissipative primed-basis evolution toward the trapped steady state
    Master {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Trapping metrics across re-calibrated intensity ratios
    Sweep {
        #[command(flatten)]
        args: CommonArgs,
        /// Omega12/omega_L values; "0.1pi" style accepted
        ratios: Vec<String>,
    },
}

fn run() -> CliResult<()> {
    match Cli::parse().command {
        Command::Spectrum { args } => commands::cmd_spectrum(&RunConfig::resolve(&args, &[])?),
        Command::Calibrate { args } => commands::cmd_calibrate(&RunConfig::resolve(&args, &[])?),
        Command::Evolve { args } => commands::cmd_evolve(&RunConfig::resolve(&args, &[])?),
        Command::Analytic { args } => commands::cmd_analytic(&RunConfig::resolve(&args, &[])?),
        Command::Compare { args } => {
            commands::cmd_compare(&RunConfig::resolve(&args, &[])?).map(|_| ())
        }
        // reaching the dissipative steady state needs a longer horizon and a
        // step suited to the slow rates, hence master-specific defaults
        Command::Master { args } => commands::cmd_master(&RunConfig::resolve(
            &args,
            &[("tau_end", "5000"), ("dtau", "0.02"), ("stride", "50")],
        )?),
        Command::Sweep { args, ratios } => {
            let cfg = RunConfig::resolve(&args, &[])?;
            let parsed: Vec<f64> =
                ratios.iter().map(|r| parse_pi_number(r)).collect::<CliResult<Vec<f64>>>()?;
            commands::cmd_sweep(&cfg, &parsed)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("dwell: {e}");
        std::process::exit(e.exit_code());
    }
}
