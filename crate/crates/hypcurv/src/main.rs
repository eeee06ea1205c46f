use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hypcurv::config::{parse_config, Command};
use hypcurv::report::format_row;
use hypcurv::run::{run, EXIT_USAGE};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Solve one problem by ε-continuation and check the solution.
    Solve,
    /// Solve for each σ in `[sweep] sigma_list` and check nesting.
    Sweep,
    /// Randomized structure checks on the curvature functions.
    Verify,
    /// Radial solve on a ball against the closed-form sphere.
    Oracle,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Sweep => Command::Sweep,
            Cmd::Verify => Command::Verify,
            Cmd::Oracle => Command::Oracle,
        }
    }
}

/// Constant-curvature graphs over planar domains in hyperbolic space.
///
/// Exit codes: 0 all checks pass, 1 usage or configuration error,
/// 2 solver did not converge, 3 a check failed.
#[derive(Parser, Debug)]
#[command(name = "hypcurv", version)]
struct Cli {
    command: Cmd,
    /// INI-style configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[run] output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("{}: {} error(s)\n{errs}", cli.config.display(), errs.0.len());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let command = Command::from(cli.command);
    if let Some(c) = cfg.command.filter(|c| *c != command) {
        eprintln!(
            "warning: config says `command = {}`, running `{}`",
            c.as_str(),
            command.as_str()
        );
    }
    if let Some(out) = cli.out {
        cfg.output = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match run(command, &cfg, &text) {
        Ok(o) => {
            for m in &o.messages {
                println!("{m}");
            }
            for r in &o.rows {
                println!("{}", format_row(r));
            }
            println!("wrote {} file(s) to {}", o.files.len() + 1, cfg.output.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
