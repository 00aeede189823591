use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relclock_cli::checks::{report, verify_checks};
use relclock_cli::config::{ConditionalArgs, DecohereArgs, JointPhaseArgs, VerifyArgs};
use relclock_cli::output::write_text;
use relclock_cli::{commands, CliError, CliResult};

/// Relational-time simulations of a two-oscillator universe.
#[derive(Parser)]
#[command(name = "relclock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint phase distribution of |M:N⟩ on a grid (CSV plus JSON sidecar)
    JointPhase(JointPhaseArgs),
    /// Fidelity of the clock-conditioned system state for a sweep of clock widths (JSON)
    Conditional(ConditionalArgs),
    /// Coherence decay under the Poisson clock: exact, expansion and kernel average (CSV)
    Decohere(DecohereArgs),
    /// Run the oracle-equivalence checks and print a report
    Verify(VerifyArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("RELCLOCK_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Validation(format!("RELCLOCK_THREADS must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Validation(format!("RELCLOCK_THREADS: {e}")))
}

fn run(cli: Cli) -> CliResult<String> {
    init_threads()?;
    match cli.command {
        Command::JointPhase(args) => commands::joint_phase(&args.resolve()?),
        Command::Conditional(args) => commands::conditional(&args.resolve()?),
        Command::Decohere(args) => commands::decohere(&args.resolve()?),
        Command::Verify(args) => {
            let cfg = args.resolve()?;
            let outcomes = verify_checks(cfg.seed, cfg.perturb_closed_form);
            let text = report("relclock verify", &outcomes);
            if let Some(path) = &cfg.out {
                write_text(path, &text)?;
            }
            print!("{text}");
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
            if failed.is_empty() {
                Ok(String::new())
            } else {
                Err(CliError::Check(failed.join("; ")))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            if !summary.is_empty() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("relclock: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
