//! `coarsescope`: batch front end. Every run writes one canonical JSON
//! report; the exit status is 0 when all certificates pass, 1 when one
//! fails and 2 on bad input.

mod commands;
mod oracle_cmd;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{InputError, RunReport, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};

#[derive(Parser)]
#[command(name = "coarsescope", version, about = "Certificates for covers and partitions of unity on finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for generated fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Statistics of a space, a cover and/or a map.
    Analyze(AnalyzeArgs),
    /// Generate a cover at scale R and certify it.
    Cover(CoverArgs),
    /// Barycentric partition of unity of a cover.
    Barycentric(BarycentricArgs),
    /// Fold a map into the n-skeleton near a subset.
    Push(PushArgs),
    /// Build the filler h = alpha r + (1 - alpha) beta.
    Filler(FillerArgs),
    /// Partition of unity from a set family.
    Propa(PropaArgs),
    /// Scale-indexed dimension certificates.
    Asdim(AsdimArgs),
    /// Diff the main path against brute-force reimplementations.
    Oracle(OracleArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub cover: Option<PathBuf>,
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Scale for the variation and dimension checks.
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bound on star-preimage diameters.
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    Auto,
    Brick,
    Greedy,
}

#[derive(Args)]
pub struct CoverArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(short = 'n', long = "n", default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
}

#[derive(Args)]
pub struct BarycentricArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<f64>,
}

#[derive(Args)]
pub struct PushArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub subset: PathBuf,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    /// Variation bound of the input; measured when omitted.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args)]
pub struct FillerArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub subset: PathBuf,
    #[arg(short = 'n', long = "n")]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    /// Cover at scale R; a brick cover is generated when omitted.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    #[arg(long = "k-limit", default_value_t = 1_000_000)]
    pub k_limit: u64,
}

#[derive(Args)]
pub struct PropaArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Set family document; a ball family is built from --S and --depth
    /// when omitted.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long)]
    pub delta: f64,
    /// Star-preimage diameter bound; defaults to 4S.
    #[arg(long = "bound-m")]
    pub bound_m: Option<f64>,
}

#[derive(Args)]
pub struct AsdimArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0, 8.0])]
    pub scales: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub nmax: usize,
    /// Also compute exact lower bounds (spaces of at most 12 points).
    #[arg(long)]
    pub exhaustive: bool,
    /// Certify from this map instead of (in addition to) generated covers.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FixtureSize {
    Small,
    Medium,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value_t = FixtureSize::Small)]
    pub fixture: FixtureSize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

fn run(cli: Cli) -> Result<RunReport, InputError> {
    let seed = cli.common.seed;
    match cli.command {
        Command::Analyze(a) => commands::analyze(a, seed),
        Command::Cover(a) => commands::cover(a, seed),
        Command::Barycentric(a) => commands::barycentric(a, seed),
        Command::Push(a) => commands::push(a, seed),
        Command::Filler(a) => commands::filler(a, seed),
        Command::Propa(a) => commands::propa(a, seed),
        Command::Asdim(a) => commands::asdim(a, seed),
        Command::Oracle(a) => oracle_cmd::oracle(a, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    let start = Instant::now();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    eprintln!("wall_time: {:.3}s", start.elapsed().as_secs_f64());
    let text = report.render();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
        None => print!("{text}"),
    }
    let code = if report.all_pass() { EXIT_PASS } else { EXIT_FAIL };
    ExitCode::from(code as u8)
}
