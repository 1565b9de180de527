//! `mbcool`: batch driver for measurement-based cooling simulations.
//!
//! All physical inputs are ratios to the resonator frequency ω.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;
mod plots;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Mode;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "mbcool", version, about = "Measurement-based cooling of a nonlinear resonator")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and perturbative resonator ground state.
    Gs(RunArgs),
    /// Concatenated scheme.
    Cs(RunArgs),
    /// Optimize a single-shot pulse.
    SsOpt(RunArgs),
    /// Single-shot scheme with a pulse file.
    SsRun(RunArgs),
    /// Concatenated scheme over a parameter grid.
    Sweep(RunArgs),
    /// Check a result directory against its manifest.
    Verify {
        dir: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, allow_negative_numbers = true)]
    out: Option<String>,
    /// Spin frequency ω_A/ω [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    omega_a: Option<String>,
    /// Coupling λ/ω [default: 0.02].
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<String>,
    /// Duffing nonlinearity ε/ω [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<String>,
    /// Include counter-rotating terms.
    #[arg(long)]
    crt: bool,
    /// Initial thermal occupation [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    nth: Option<String>,
    /// Fock truncation, integer or `auto` = max(30, 10(n_th+1)) [default: auto].
    #[arg(long, allow_negative_numbers = true)]
    nmax: Option<String>,
    /// Damping rate γ_d/ω; 0 disables noise [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<String>,
    /// Bath occupation [default: n_th].
    #[arg(long, allow_negative_numbers = true)]
    bath_nth: Option<String>,
    /// Concatenated-scheme repetitions [default: 20].
    #[arg(long, allow_negative_numbers = true)]
    nreps: Option<String>,
    /// Observation points per evolution block, 0 for none [default: 20].
    #[arg(long, allow_negative_numbers = true)]
    dense_samples: Option<String>,
    /// Integration step in 1/ω [default: 0.01].
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<String>,
    /// Optimized subspaces N_c [default: 10].
    #[arg(long, allow_negative_numbers = true)]
    nc: Option<String>,
    /// Pulse harmonics N_ω [default: 10].
    #[arg(long, allow_negative_numbers = true)]
    nomega: Option<String>,
    /// Pulse duration in units of π/(2λ) [default: 3].
    #[arg(long, allow_negative_numbers = true)]
    tau_mult: Option<String>,
    /// Optimizer restarts [default: 5].
    #[arg(long, allow_negative_numbers = true)]
    restarts: Option<String>,
    /// Cost evaluations per restart [default: 40000].
    #[arg(long, allow_negative_numbers = true)]
    max_evals: Option<String>,
    /// Pulse file for ss-run, or for single-shot columns in a sweep.
    #[arg(long, allow_negative_numbers = true)]
    pulse: Option<String>,
    /// Optimizer seed [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<String>,
    /// Concurrent sweep cells [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    jobs: Option<String>,
    /// Sweep grid over repetitions, comma separated.
    #[arg(long, allow_negative_numbers = true)]
    sweep_nreps: Option<String>,
    /// Sweep grid over n_th.
    #[arg(long, allow_negative_numbers = true)]
    sweep_nth: Option<String>,
    /// Sweep grid over γ_d/ω.
    #[arg(long, allow_negative_numbers = true)]
    sweep_gamma: Option<String>,
    /// Sweep grid over ε/ω.
    #[arg(long, allow_negative_numbers = true)]
    sweep_epsilon: Option<String>,
    /// Sweep grid over λ/ω.
    #[arg(long, allow_negative_numbers = true)]
    sweep_lambda: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("out", &self.out),
            ("omega_a", &self.omega_a),
            ("lambda", &self.lambda),
            ("epsilon", &self.epsilon),
            ("n_th", &self.nth),
            ("n_max", &self.nmax),
            ("gamma", &self.gamma),
            ("bath_nth", &self.bath_nth),
            ("n_reps", &self.nreps),
            ("dense_samples", &self.dense_samples),
            ("dt", &self.dt),
            ("n_c", &self.nc),
            ("n_omega", &self.nomega),
            ("tau_mult", &self.tau_mult),
            ("restarts", &self.restarts),
            ("max_evals", &self.max_evals),
            ("pulse", &self.pulse),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("sweep_n_reps", &self.sweep_nreps),
            ("sweep_n_th", &self.sweep_nth),
            ("sweep_gamma", &self.sweep_gamma),
            ("sweep_epsilon", &self.sweep_epsilon),
            ("sweep_lambda", &self.sweep_lambda),
        ];
        let mut map: BTreeMap<String, String> =
            pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        if self.crt {
            map.insert("crt".into(), "true".into());
        }
        map
    }
}

fn execute(mode: Mode, args: &RunArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            config::parse_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let cfg = config::build(mode, file, args.flags())?;
    let manifest = run::run(&cfg)?;
    println!("wrote {} artifacts to {}", manifest.artifacts.len(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Gs(a) => execute(Mode::Gs, a),
        Command::Cs(a) => execute(Mode::Cs, a),
        Command::SsOpt(a) => execute(Mode::SsOpt, a),
        Command::SsRun(a) => execute(Mode::SsRun, a),
        Command::Sweep(a) => execute(Mode::Sweep, a),
        Command::Verify { dir } => output::verify(dir).map(|n| println!("{}: {n} artifacts verified", dir.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbcool: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
