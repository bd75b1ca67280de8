use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use flowsep::cli::{self, RunConfig};

/// Semidecide expansivity and separation properties of catalog flows and
/// homeomorphisms.
///
/// Exit codes: 0 consistent up to budget, 2 violated, 3 inconclusive,
/// 1 error; `report` exits 4 on cross-check contradictions or pattern
/// mismatches; `witness-replay` exits 2 on drift.
#[derive(Parser, Debug)]
#[command(name = "flowsep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog systems whose name contains FILTER.
    Catalog {
        #[arg(default_value = "")]
        filter: String,
    },
    /// Evaluate one property on one system; a violation is written as a
    /// witness file into --out.
    Classify(Flags),
    /// Run every system against every property, cross-check the results and
    /// write report.jsonl, report.txt and witnesses/ into --out.
    Report(Flags),
    /// Recompute a witness file and report drift.
    WitnessReplay { path: PathBuf },
}

/// Run settings. Unset values come from --config, then from the system's
/// default budget (see `flowsep catalog` and the README).
#[derive(Args, Debug, Default)]
struct Flags {
    /// Catalog name, e.g. annulus-phi (report: restrict to this system).
    #[arg(long)]
    system: Option<String>,
    /// Property: a preset (kinematic, KH-kinematic, ...), strong-<preset>,
    /// bi-expansive, or expansive / separating for homeomorphisms.
    #[arg(long)]
    preset: Option<String>,
    /// Closeness threshold δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Orbit-shift bound ε for local and d_φ conclusions.
    #[arg(long)]
    eps: Option<f64>,
    /// Time horizon T (iterate window N for homeomorphisms).
    #[arg(long)]
    horizon: Option<f64>,
    /// Time step Δt.
    #[arg(long)]
    dt: Option<f64>,
    /// Grid resolution (seeded pair count on the shift).
    #[arg(long)]
    grid: Option<usize>,
    /// Seed of the reparametrization family and random pairs (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Knots per random reparametrization (default 6).
    #[arg(long)]
    knots: Option<usize>,
    /// Largest deviation |s(t) - t| of sampled reparametrizations.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Number of random reparametrizations.
    #[arg(long)]
    family: Option<usize>,
    /// Same-orbit search window W (orbit-search bound for homeomorphisms).
    #[arg(long)]
    window: Option<f64>,
    /// Comma-separated speed factors for strong variants: unit, double,
    /// half, radius, wave, height-wave.
    #[arg(long, value_delimiter = ',')]
    speed_family: Option<Vec<String>>,
    /// JSON file with any of the fields above (snake_case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn resolve(self) -> flowsep::Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig {
            system: self.system,
            preset: self.preset,
            delta: self.delta,
            eps: self.eps,
            horizon: self.horizon,
            dt: self.dt,
            grid: self.grid,
            seed: self.seed,
            knots: self.knots,
            amplitude: self.amplitude,
            family: self.family,
            window: self.window,
            speed_family: self.speed_family,
            out: self.out,
        }))
    }
}

fn run(command: Command) -> flowsep::Result<i32> {
    match command {
        Command::Catalog { filter } => {
            print!("{}", cli::catalog_listing(&filter));
            Ok(0)
        }
        Command::Classify(flags) => {
            let out = cli::classify(&flags.resolve()?)?;
            println!("{}", out.verdict);
            if let Some(path) = out.witness_path {
                println!("witness written to {}", path.display());
            }
            Ok(out.verdict.exit_code())
        }
        Command::Report(flags) => {
            let cfg = flags.resolve()?;
            let report = cli::cmd_report(&cfg)?;
            print!("{}", report.table());
            println!("report written to {}", cfg.out_dir().display());
            Ok(report.exit_code())
        }
        Command::WitnessReplay { path } => {
            let replay = cli::replay_file(&path)?;
            println!("sup = {:?}, margin = {:?}", replay.sup, replay.margin);
            if replay.confirmed() {
                println!("confirmed");
                Ok(0)
            } else {
                for d in &replay.drift {
                    println!("drift: {d}");
                }
                Ok(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let defaults = cli::defaults_help();
    let matches = Cli::command()
        .mut_subcommand("classify", |c| c.after_help(defaults.clone()))
        .mut_subcommand("report", |c| c.after_help(defaults.clone()))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
