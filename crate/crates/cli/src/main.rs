use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod io;

/// Difference-set densities and weighted backward shift dynamics.
///
/// Exit status: 0 when every checked condition holds on the window, 1 on a
/// violation or resource limit, 2 on usage or input errors.
#[derive(Parser)]
#[command(name = "shiftlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Windowed density profile and largest gap of a set.
    Density(DensityArgs),
    /// Return set F, its gaps, and the greedy separated set R.
    Diffset(DiffsetArgs),
    /// Build one of the two counterexample datasets.
    #[command(subcommand)]
    Construct(Construct),
    /// Check the characterising conditions for a weight and a family of sets.
    Verify(VerifyArgs),
    /// Visit set of an orbit near a target.
    Orbit(OrbitArgs),
    /// Necessary-condition witness for a candidate visit set.
    Witness(WitnessArgs),
    /// Large-norm sets of orbits.
    Scan(ScanArgs),
    /// Merge reports and summarise their verdicts.
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
pub struct Dest {
    /// Report file; the manifest is written next to it as <out>.manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table with columns index,value,series.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub set: PathBuf,
    /// Explicit checkpoints (comma separated); default: 16 linear ones.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<i64>,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaKind {
    /// α_n = 1/n
    Harmonic,
    /// α_n = 2^{−n}
    Geometric,
}

#[derive(Args, Serialize)]
pub struct DiffsetArgs {
    #[arg(long)]
    pub set: PathBuf,
    /// Rational in (0, 1), e.g. 0.5 or 1/4.
    #[arg(long)]
    pub epsilon: String,
    /// Range of shifts k; default [−K, K] with K = min(500, window radius).
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub krange: Option<Vec<i64>>,
    /// Also compute weighted return averages with this profile.
    #[arg(long, value_enum)]
    pub alpha: Option<AlphaKind>,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Subcommand)]
pub enum Construct {
    /// Block construction with a U-frequently hypercyclic, non-FHC shift.
    S5(S5Args),
    /// Interval construction with an FHC shift that is not distributionally chaotic.
    S6(S6Args),
}

#[derive(Args, Serialize)]
pub struct S5Args {
    #[arg(long)]
    pub depth: usize,
    /// Multiplicative slack on each free choice; 1 is the minimal choice.
    #[arg(long, default_value = "1")]
    pub slack: String,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Args, Serialize)]
pub struct S6Args {
    #[arg(long, default_value = "60")]
    pub a: String,
    #[arg(long, default_value = "0.01")]
    pub epsilon: String,
    #[arg(long, default_value_t = 5)]
    pub pmax: usize,
    /// Half-width N of the bilateral window [−N, N].
    #[arg(long)]
    pub window: i64,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bilateral,
    Unilateral,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Number of sets to check; default all.
    #[arg(long)]
    pub pmax: Option<usize>,
    /// Cap on enumerated difference pairs for (d).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Also build the FHC vector and check its visits up to this n.
    #[arg(long)]
    pub visits: Option<i64>,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Args, Serialize)]
pub struct OrbitArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub vector: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub tol: f64,
    #[arg(long = "N")]
    pub n: u64,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Args, Serialize)]
pub struct WitnessArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Also run the ℓ^p series test up to this N.
    #[arg(long)]
    pub series: Option<i64>,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Args, Serialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Vector file; exclusive with --random.
    #[arg(long, conflicts_with = "random")]
    pub vector: Option<PathBuf>,
    /// Number of seeded random sparse vectors.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random supports lie in [−spread/10, spread], with one index ≥ 0.
    #[arg(long, default_value_t = 1000)]
    pub spread: i64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub thresholds: Vec<f64>,
    #[arg(long = "N")]
    pub n: i64,
    #[command(flatten)]
    pub dest: Dest,
}

#[derive(Args, Serialize)]
pub struct ReportArgs {
    /// Reports written by other subcommands.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub dest: Dest,
}

/// `SHIFTLAB_THREADS` caps the worker pool.
fn configure_threads() -> io::Outcome<()> {
    let Ok(v) = std::env::var("SHIFTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| io::Failure::usage(format!("SHIFTLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| io::Failure::run(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Density(a) => commands::density(a),
        Command::Diffset(a) => commands::diffset(a),
        Command::Construct(Construct::S5(a)) => commands::construct_s5(a),
        Command::Construct(Construct::S6(a)) => commands::construct_s6(a),
        Command::Verify(a) => commands::verify(a),
        Command::Orbit(a) => commands::orbit(a),
        Command::Witness(a) => commands::witness(a),
        Command::Scan(a) => commands::scan(a),
        Command::Report(a) => commands::report(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("shiftlab: {f}");
            ExitCode::from(f.code)
        }
    }
}
