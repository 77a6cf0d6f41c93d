use std::path::PathBuf;
use std::process::ExitCode;

use bdflow_cli::commands::EXIT_USAGE;
use bdflow_cli::{cmd_check, cmd_mms, cmd_run, cmd_sweep, CheckArgs};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bdflow",
    version,
    about = "Radial compressible flow with degenerate viscosity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report whether (gamma, delta) satisfies the admissibility condition.
    Check {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Also test this Lebesgue exponent against the admissible range.
        #[arg(long)]
        p: Option<f64>,
        /// Print the admissibility threshold instead.
        #[arg(long)]
        find_threshold: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Integrate a configured problem and write a snapshot CSV plus summary.
    Run { config: PathBuf, output: PathBuf },
    /// Run a manufactured-solution refinement study.
    Mms { config: PathBuf },
    /// Tabulate admissibility over a parameter range.
    Sweep {
        config: PathBuf,
        /// Write the table here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = match cli.command {
        Command::Check {
            gamma,
            delta,
            p,
            find_threshold,
            tol,
        } => {
            let args = CheckArgs {
                gamma,
                delta,
                p,
                find_threshold,
                tol,
            };
            cmd_check(&args, &mut out, &mut err)
        }
        Command::Run { config, output } => cmd_run(&config, &output, &mut err),
        Command::Mms { config } => cmd_mms(&config, &mut out, &mut err),
        Command::Sweep { config, output } => {
            cmd_sweep(&config, output.as_deref(), &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}
