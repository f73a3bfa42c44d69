use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use radial_lab::generators::GeneratorSpec;
use radial_lab_cli::config::{with_level, with_seed, BoundsParams};
use radial_lab_cli::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "radial-lab", version, about = "Radial projection and incidence experiments on dyadic cube sets")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "RADIAL_LAB_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single level, overriding the config's `levels`.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Grid of every closed-form bound with dominance flags.
    BoundsTable {
        #[command(flatten)]
        common: Common,
        /// Grid step; must be 1/k.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Radial projection sweep (sup over sampled base points).
    Project(Common),
    /// Incidence-exponent sweep across levels.
    Incidence(Common),
    /// Certify input sets and report their profiles.
    Audit(Common),
    /// Run whatever kind the config names.
    Run(Common),
    /// Generate a set from a generator spec (TOML) and write it as DSET1.
    Gen {
        /// Generator spec file.
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        level: Option<u32>,
    },
}

fn load(common: &Common, kind: Option<ExperimentKind>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match (&common.config, kind) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(ExperimentKind::BoundsTable)) => ExperimentConfig::new(ExperimentKind::BoundsTable),
        (None, _) => bail!("--config is required"),
    };
    if let Some(kind) = kind {
        if cfg.kind != kind {
            bail!("config describes a {} experiment, not {}", cfg.kind.name(), kind.name());
        }
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(level) = common.level {
        cfg.levels = vec![level];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    let report = run(cfg)?;
    println!("{} → {}", cfg.kind.name(), report.output.display());
    for a in &report.manifest.artifacts {
        println!("  {}  {}", &a.sha256[..12], a.file);
    }
    if !report.passed {
        eprintln!("warning: a measured value fell below its predicted floor");
    }
    Ok(report.passed)
}

fn generate(config: &Path, out: Option<&Path>, seed: Option<u64>, level: Option<u32>) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut spec: GeneratorSpec = toml::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    if let Some(n) = level {
        spec = with_level(&spec, n);
    }
    if let Some(s) = seed {
        spec = with_seed(&spec, s);
    }
    let gen = spec.generate()?;
    let body = radial_lab::io::write_dset(&gen.set);
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            println!(
                "{} cubes at level {} (s = {}, C = {}) → {}",
                gen.set.len(),
                gen.set.level(),
                gen.certificate.s,
                gen.certificate.c,
                path.display()
            );
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::BoundsTable { common, step } => load(common, Some(ExperimentKind::BoundsTable)).and_then(|mut cfg| {
            if let Some(step) = step {
                cfg.bounds = Some(BoundsParams { step: *step });
                cfg.validate()?;
            }
            execute(&cfg)
        }),
        Command::Project(c) => load(c, Some(ExperimentKind::ProjectionSweep)).and_then(|cfg| execute(&cfg)),
        Command::Incidence(c) => load(c, Some(ExperimentKind::IncidenceSweep)).and_then(|cfg| execute(&cfg)),
        Command::Audit(c) => load(c, Some(ExperimentKind::FrostmanAudit)).and_then(|cfg| execute(&cfg)),
        Command::Run(c) => load(c, None).and_then(|cfg| execute(&cfg)),
        Command::Gen { config, out, seed, level } => {
            generate(config, out.as_deref(), *seed, *level).map(|()| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
