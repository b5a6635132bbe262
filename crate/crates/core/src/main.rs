//! Command-line driver: simulate / verify experiments, run the kernel
//! selftest, re-render reports. Exit codes: 0 all verdicts pass, 1 any
//! verdict fails, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use viscowave::harness::{self, presets};

#[derive(Parser)]
#[command(name = "viscowave", version, about = "Damped elastic wave simulator and decay-rate verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file (or bundled preset name).
    Simulate {
        /// Path to a config file, or a preset name (see `--list-presets`).
        config: String,
        /// Output directory override.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment and require its verification claims to pass.
    Verify {
        config: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Kernel-level oracle suites.
    Kernels {
        #[command(subcommand)]
        command: KernelsCommand,
    },
    /// Re-render the summary of a finished run directory.
    Report { dir: PathBuf },
    /// List the bundled presets.
    ListPresets,
}

#[derive(Subcommand)]
enum KernelsCommand {
    /// Check the multiplier implementations against independent oracles.
    Selftest,
}

fn load_config_text(arg: &str) -> Result<String, viscowave::Error> {
    let path = PathBuf::from(arg);
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    if let Some(text) = presets::preset(arg) {
        return Ok(text.to_string());
    }
    Err(viscowave::Error::ConfigValidation(format!(
        "no config file or preset named {arg:?} (presets: {})",
        presets::preset_names().join(", ")
    )))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, output } => run(&config, output, false),
        Command::Verify { config, output } => run(&config, output, true),
        Command::Kernels { command: KernelsCommand::Selftest } => {
            return if harness::kernels_selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
        Command::Report { dir } => harness::report_dir(&dir),
        Command::ListPresets => {
            for name in presets::preset_names() {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(
    config: &str,
    output: Option<PathBuf>,
    require_claims: bool,
) -> Result<bool, viscowave::Error> {
    let text = load_config_text(config)?;
    if require_claims {
        let parsed = harness::config::parse_config(&text)?;
        if parsed.base.claims.is_empty() {
            return Err(viscowave::Error::ConfigValidation(
                "verify requires a non-empty claims list".into(),
            ));
        }
    }
    let artifacts = harness::execute_config_text(&text, output)?;
    for report in &artifacts.reports {
        println!(
            "{:<5} {:<22} fitted {:+.4}  theoretical {:+.4}  (tolerance {:.3})",
            report.verdict_str(),
            report.claim.id(),
            report.fitted_slope,
            report.theoretical_slope,
            report.tolerance
        );
    }
    if let Some(dir) = &artifacts.output_dir {
        println!("artifacts written to {}", dir.display());
    }
    Ok(artifacts.all_pass)
}
