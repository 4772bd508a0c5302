use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ghz_witness::cli::{
    self, AnalyzeOptions, ExperimentOverrides, Preset, Protocol, SweepOverrides, WitnessChoice,
};
use ghz_witness::par::Execution;
use ghz_witness::protocol::{read_jsonl, write_jsonl};
use ghz_witness::witness::DEFAULT_SIGNIFICANCE;

#[derive(Parser)]
#[command(
    name = "ghzw",
    version,
    about = "Entanglement witnesses for GHZ-like states under coherent and white noise"
)]
struct Cli {
    /// Run data-parallel loops on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a witness on exact or sampled expectations and write a JSON report.
    Run(ExperimentArgs),
    /// Emit shot records (JSONL) for the configured protocol.
    Sample(ExperimentArgs),
    /// Write tolerance curves as CSV.
    Sweep(SweepArgs),
    /// Evaluate a witness from a JSONL shot file.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML configuration file; flags take precedence.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Radians, or a multiple of pi such as "pi/4".
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// White-noise weight.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<Protocol>,
    #[arg(long, value_parser = parse_witness)]
    witness: Option<WitnessChoice>,
    /// exact | sampled
    #[arg(long)]
    mode: Option<String>,
    /// Shots per setting.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standard errors required below zero to report entanglement.
    #[arg(long)]
    significance: Option<f64>,
    /// Output file (report for `run`, shots for `sample`); stdout if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the sampled shots (`run` only).
    #[arg(long)]
    shots_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// fig3 | fig4-5 | tolerance-map | custom
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    n: Option<usize>,
    /// Add thresholds found by bisection on exact expectations.
    #[arg(long)]
    bisect: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSONL shot file.
    shots: PathBuf,
    #[arg(long, value_parser = parse_witness, default_value = "phi")]
    witness: WitnessChoice,
    /// Evaluate the plain GHZ witness instead.
    #[arg(long)]
    baseline: bool,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    significance: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    match s {
        "full" => Ok(Protocol::Full),
        "efficient" => Ok(Protocol::Efficient),
        "baseline" => Ok(Protocol::Baseline),
        _ => Err(format!(
            "unknown protocol \"{s}\"; expected full, efficient or baseline"
        )),
    }
}

fn parse_witness(s: &str) -> Result<WitnessChoice, String> {
    match s {
        "phi" => Ok(WitnessChoice::Phi),
        "phi-theta" => Ok(WitnessChoice::PhiTheta),
        _ => Err(format!(
            "unknown witness \"{s}\"; expected phi or phi-theta"
        )),
    }
}

fn read_config(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(String::new()),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => match io::stdout().write_all(bytes) {
            // Downstream closed early (e.g. `| head`); not an error.
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing stdout"),
        },
    }
}

fn experiment(args: &ExperimentArgs) -> Result<cli::ExperimentConfig> {
    let text = read_config(args.config.as_deref())?;
    let overrides = ExperimentOverrides {
        n: args.n,
        theta: args.theta.clone(),
        phi: args.phi.clone(),
        p: args.p,
        protocol: args.protocol,
        witness: args.witness,
        mode: args.mode.clone(),
        shots: args.shots,
        seed: args.seed,
        significance: args.significance,
        report: args.output.clone(),
        shots_out: args.shots_out.clone(),
    };
    Ok(cli::parse_experiment(&text, &overrides)?)
}

fn shots_bytes(records: &[ghz_witness::protocol::ShotRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf)?;
    Ok(buf)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Run(args) => {
            let cfg = experiment(&args)?;
            let out = cli::run(&cfg, exec)?;
            if let Some(path) = &cfg.shots_path {
                emit(Some(path), &shots_bytes(&out.records)?)?;
            }
            emit(cfg.report_path.as_deref(), out.report.to_json().as_bytes())?;
        }
        Command::Sample(args) => {
            let cfg = experiment(&args)?;
            let records = cli::sample(&cfg, exec)?;
            emit(args.output.as_deref(), &shots_bytes(&records)?)?;
        }
        Command::Sweep(args) => {
            let text = read_config(args.config.as_deref())?;
            let overrides = SweepOverrides {
                preset: args.preset,
                n: args.n,
                bisect: args.bisect,
                output: args.output,
            };
            let cfg = cli::parse_sweep(&text, &overrides)?;
            let csv = cli::sweep(&cfg, exec)?;
            emit(cfg.output.as_deref(), csv.as_bytes())?;
        }
        Command::Analyze(args) => {
            let file = fs::File::open(&args.shots)
                .with_context(|| format!("opening {}", args.shots.display()))?;
            let records = read_jsonl(BufReader::new(file))?;
            let opts = AnalyzeOptions {
                witness: args.witness,
                baseline: args.baseline,
                significance: args.significance,
            };
            let report = cli::analyze(&records, opts)?;
            emit(args.output.as_deref(), report.to_json().as_bytes())?;
        }
    }
    Ok(())
}
