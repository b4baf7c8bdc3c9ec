//! `wavebank`: design, verify and run wavelet filter banks from the shell.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on bad input or usage.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

/// Every numeric default in one place.
pub mod defaults {
    /// Torus sample points for unitarity and QMF checks.
    pub const GRID: usize = 1024;
    /// Residual tolerance for verification.
    pub const TOL: f64 = 1e-9;
    /// Cascade grid level: cells of width `2^-J`.
    pub const J_LEVEL: u32 = 10;
    /// Cascade iterations.
    pub const ITERS: usize = 12;
    /// Periodization sum truncation `|n| <= n_max`.
    pub const N_MAX: usize = 10_000;
    /// Frequency samples for the periodization check.
    pub const PER_GRID: usize = wavebank::transfer::DEFAULT_T_GRID;
    /// Seed for randomized designs.
    pub const SEED: u64 = 0;
}

#[derive(Parser, Debug)]
#[command(name = "wavebank", version, about = "Wavelet filter banks from matrix functions on the torus")]
struct Cli {
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = defaults::SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a filter bank and write it as JSON.
    Design(DesignArgs),
    /// Check the quadrature-mirror conditions of a bank.
    Verify(VerifyArgs),
    /// Approximate the scaling function (and wavelets) by cascade iteration.
    Cascade(CascadeArgs),
    /// Wavelet packet decomposition into one CSV per leaf.
    Packets(PacketsArgs),
    /// Transfer operator spectrum and the orthonormality diagnostics.
    Transfer(TransferArgs),
    /// Factor the polyphase matrix of a two-band bank into lifting steps.
    Lift(LiftArgs),
    /// Multilevel pyramid decomposition with a reconstruction check.
    Pyramid(PyramidArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["projections", "d4", "six_tap", "random", "haar"])))]
pub struct DesignArgs {
    /// JSON array of `{"lambda": .., "theta": ..}` projection parameters.
    #[arg(long)]
    pub projections: Option<PathBuf>,
    /// Daubechies four-tap bank.
    #[arg(long)]
    pub d4: bool,
    /// Haar bank.
    #[arg(long)]
    pub haar: bool,
    /// Six-tap bank from two angles.
    #[arg(long, num_args = 2, value_names = ["THETA", "RHO"], allow_negative_numbers = true)]
    pub six_tap: Option<Vec<f64>>,
    /// Random bank from this many projection factors (uses --seed).
    #[arg(long, value_name = "K")]
    pub random: Option<usize>,
    /// Also write the biorthogonal dual bank here.
    #[arg(long)]
    pub dual: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = defaults::GRID)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub bank: PathBuf,
    #[arg(long, default_value_t = defaults::GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
    /// Write the JSON report here as well as to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CascadeArgs {
    pub bank: PathBuf,
    #[arg(long = "j", default_value_t = defaults::J_LEVEL)]
    pub j_level: u32,
    #[arg(long, default_value_t = defaults::ITERS)]
    pub iters: usize,
    /// Scaling function CSV.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Scaling function SVG plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Directory for `psi_<j>.csv` and `psi_<j>.svg`, one per wavelet.
    #[arg(long)]
    pub wavelets: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("tree").args(["depth", "leaves"])))]
pub struct PacketsArgs {
    pub bank: PathBuf,
    /// Input signal CSV (`index, re, im`).
    pub signal: PathBuf,
    /// Full tree of this depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Explicit leaves as `k:n` pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub leaves: Option<Vec<String>>,
    /// Output directory for `k_n.csv` files.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    pub bank: PathBuf,
    #[arg(long, default_value_t = defaults::PER_GRID)]
    pub per_grid: usize,
    #[arg(long, default_value_t = defaults::N_MAX)]
    pub n_max: usize,
    /// Write the JSON report here as well as to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    /// Two-band filter bank JSON.
    pub bank: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct PyramidArgs {
    pub bank: PathBuf,
    pub signal: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Output directory for `coarse.csv` and `detail_<level>_<band>.csv`.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = defaults::TOL)]
    pub tol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Design(a) => commands::design(&a, cli.seed),
        Command::Verify(a) => commands::verify(&a),
        Command::Cascade(a) => commands::cascade(&a),
        Command::Packets(a) => commands::packets(&a),
        Command::Transfer(a) => commands::transfer(&a),
        Command::Lift(a) => commands::lift(&a),
        Command::Pyramid(a) => commands::pyramid(&a),
    };
    match result {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
