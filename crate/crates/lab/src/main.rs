use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};

use planetlab::config::{ConfigError, ExperimentConfig};
use planetlab::experiments::{self, Context};
use planetlab::plot::{self, PlotKind, SchemaError};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "PLANETLAB_OUT";
const DEFAULT_OUT: &str = "planetlab-out";

#[derive(Parser)]
#[command(name = "planetlab", version, about = "Run planetary-chart experiments and plot their results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config and $PLANETLAB_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Render a CSV written by `run` as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

enum Failure {
    Assertions,
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn classify(e: anyhow::Error) -> Failure {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<SchemaError>().is_some() {
        Failure::Usage(e)
    } else {
        Failure::Runtime(e)
    }
}

fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

fn run(config: &Path, cli: &Cli) -> Result<(), Failure> {
    let (cfg, src) = ExperimentConfig::load(config).map_err(|e| Failure::Usage(e.into()))?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(default_out);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.into()))?;
    let ctx = Context {
        cfg: &cfg,
        src: &src,
        path: config,
        seed,
    };
    let outcome = pool.install(|| experiments::run(&ctx)).map_err(classify)?;
    outcome
        .write(&out, cfg.experiment.name(), seed)
        .map_err(Failure::Runtime)?;
    print!("{}", outcome.summary(cfg.experiment.name(), seed));
    println!("output: {}", out.display());
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Assertions)
    }
}

fn plot_cmd(csv: &Path, kind: PlotKind, cli: &Cli) -> Result<(), Failure> {
    let name = csv.with_extension("svg");
    let target = match &cli.out {
        Some(dir) => dir.join(name.file_name().context("CSV path has no file name").map_err(Failure::Usage)?),
        None => name,
    };
    plot::plot(csv, kind, &target).map_err(classify)?;
    println!("wrote {}", target.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config, &cli),
        Command::Plot { csv, kind } => plot_cmd(csv, *kind, &cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertions) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
