//! `sturmian` — command-line front end of the spectral laboratory.
//!
//! Exit codes: 0 on success, 2 when a verification check fails, 1 on usage
//! or domain errors.  Every run logs its seed, configuration and versions to
//! standard error; artifacts carry the same information in a header line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{Command, DosOutput, Format, FreqSpec, LyapunovOutput, RunConfig, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "sturmian",
    version,
    about = "Spectral band coverings, dimensions and density of states of Sturmian Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Band tree down to --depth (JSON lines by default).
    Bands(Common),
    /// Gaps with their ratios to the parent band.
    Gaps(Common),
    /// Relativized dimension D̂(λ), or s_n of one frequency with --freq.
    Dims(Common),
    /// Pressure curve on [0, 1] (relativized, or one frequency with --freq).
    Pressure(WithGrid),
    /// Cocycle exponent φ̂ on (0, 1], or ρ̂ with --what rho.
    Lyapunov(LyapunovArgs),
    /// Density of states: dimension, paths, exact masses or eigenvalues.
    Dos(DosArgs),
    /// Run a verification suite; exits 2 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Frequency: `1,periodic`, `1,2,periodic`, `5;1,2`, `3,1,4`, `gauss:SEED[:STREAM]` or `@file.json`.
    #[arg(long)]
    freq: Option<FreqSpec>,
    /// Coupling constant λ.
    #[arg(long, default_value_t = 24.0)]
    lambda: f64,
    /// Depth (order of the covering, or length of digit strings).
    #[arg(long)]
    depth: Option<usize>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Fiber look-ahead m for density-of-states masses.
    #[arg(long, default_value_t = sturmian::dos::DEFAULT_TRUNCATION)]
    truncation: usize,
    /// Random seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file (relative paths resolve against $STURMIAN_OUT_DIR); standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format (default: jsonl for bands and verify, csv otherwise).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct WithGrid {
    #[command(flatten)]
    common: Common,
    /// Number of grid intervals on [0, 1].
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct LyapunovArgs {
    #[command(flatten)]
    inner: WithGrid,
    /// What to emit.
    #[arg(long, value_enum, default_value_t = LyapunovOutput::Curve)]
    what: LyapunovOutput,
}

#[derive(Args, Debug, Clone)]
struct DosArgs {
    #[command(flatten)]
    common: Common,
    /// What to emit.
    #[arg(long, value_enum, default_value_t = DosOutput::Dimension)]
    what: DosOutput,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Suite: cf, coding, covering, chebyshev, gaps, pressure, dos or all.
    #[arg(long, default_value = "all")]
    suite: String,
}

/// Per-command defaults for depth and samples.
fn defaults(command: Command) -> (usize, usize) {
    match command {
        Command::Bands | Command::Gaps | Command::Verify => (8, 200),
        Command::Dims | Command::Pressure => (14, 200),
        Command::Lyapunov => (1000, 100),
        Command::Dos => (12, 200),
    }
}

fn resolve(cmd: Cmd) -> (RunConfig, Option<usize>) {
    let (command, common, grid, suite, dos_output, lyapunov_output) = match cmd {
        Cmd::Bands(c) => (Command::Bands, c, None, None, None, None),
        Cmd::Gaps(c) => (Command::Gaps, c, None, None, None, None),
        Cmd::Dims(c) => (Command::Dims, c, None, None, None, None),
        Cmd::Pressure(g) => (
            Command::Pressure,
            g.common,
            Some(g.grid.unwrap_or(10)),
            None,
            None,
            None,
        ),
        Cmd::Lyapunov(l) => (
            Command::Lyapunov,
            l.inner.common,
            Some(l.inner.grid.unwrap_or(10)),
            None,
            None,
            Some(l.what),
        ),
        Cmd::Dos(d) => (Command::Dos, d.common, None, None, Some(d.what), None),
        Cmd::Verify(v) => (Command::Verify, v.common, None, Some(v.suite), None, None),
    };
    let (depth, samples) = defaults(command);
    let format = common.format.unwrap_or(match command {
        Command::Bands | Command::Verify => Format::Jsonl,
        _ => Format::Csv,
    });
    let cfg = RunConfig {
        command,
        freq: common.freq,
        lambda: common.lambda,
        depth: common.depth.unwrap_or(depth),
        samples: common.samples.unwrap_or(samples),
        truncation: common.truncation,
        seed: common.seed,
        format,
        suite,
        dos_output,
        lyapunov_output,
        grid,
        out: common.out,
    };
    (cfg, common.threads)
}

/// Domain-type library errors are usage errors (exit 1); anything else raised
/// while verifying is a verification failure (exit 2).
fn is_domain_error(e: &anyhow::Error) -> bool {
    use sturmian::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::Domain(_) | E::InsufficientDigits { .. } | E::CapExceeded { .. } | E::Budget(_),
        ) => true,
        Some(_) => false,
        None => true,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cfg, threads) = resolve(cli.command);
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be a positive integer");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot configure {t} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    eprintln!(
        "sturmian-cli {} (library {}) command={} seed={} threads={} out_dir_env={} config={}",
        env!("CARGO_PKG_VERSION"),
        sturmian::VERSION,
        cfg.command.name(),
        cfg.seed,
        rayon::current_num_threads(),
        OUT_DIR_ENV,
        serde_json::to_string(&cfg).unwrap_or_default()
    );
    let result = match cfg.command {
        Command::Bands => commands::bands(&cfg),
        Command::Gaps => commands::gaps(&cfg),
        Command::Dims => commands::dims(&cfg),
        Command::Pressure => commands::pressure(&cfg),
        Command::Lyapunov => commands::lyapunov(&cfg),
        Command::Dos => commands::dos(&cfg),
        Command::Verify => commands::verify(&cfg),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed(n)) => {
            eprintln!("error: {n} verification check(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if cfg.command == Command::Verify && !is_domain_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
