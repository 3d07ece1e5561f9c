use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use isolab::files;
use isolab::runner::{run, Command, ExperimentConfig};

/// Numerical experiments on isothermic surfaces, conservation laws and Wente-type estimates.
///
/// Every subcommand prints one line per check and exits with status 0 iff all checks pass
/// (1 if a check fails, 2 on invalid input).
#[derive(Parser, Debug)]
#[command(name = "isolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Build a surface, certify its conformality and save it.
    Generate(Common),
    /// Weingarten, isothermic and Willmore residuals on the analytic and revolved surfaces.
    Residuals(Targeted),
    /// Conservation laws of the entropy densities over a refinement ladder.
    Entropy(Common),
    /// Wente ratios: the coordinate pair and the ten-pair battery at two resolutions.
    Wente(Common),
    /// Spectral against spatial evaluation of the second-order Riesz operators.
    Riesz(Common),
    /// Defect measures: the Jacobian atom and the transported curve defect.
    Defect(Targeted),
    /// Christoffel duals of the cylinder and the catenoid.
    Dual(Common),
    /// Observed-order tables over a refinement ladder.
    Convergence(Targeted),
}

#[derive(Args, Debug)]
struct Targeted {
    /// Sub-experiment to run; all of them when omitted.
    target: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nodes per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Refinement ladder, strictly increasing, e.g. 64,128,256.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
    /// Tolerance override, e.g. --tol integrability=0.1 (repeatable).
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Seed of the randomized inputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict surface runs to one generator.
    #[arg(long)]
    generator: Option<String>,
    /// Generator parameter, e.g. --param R=3 (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

fn split_pair(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| anyhow!("expected NAME=VALUE, got `{s}`"))
}

fn apply_tolerance(cfg: &mut ExperimentConfig, spec: &str) -> Result<()> {
    let (key, value) = split_pair(spec)?;
    let mut table: toml::Table = toml::to_string(&cfg.tolerances)?.parse()?;
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .ok_or_else(|| anyhow!("tolerance `{key}`: cannot parse `{value}`"))?;
    table.insert(key.to_owned(), parsed);
    cfg.tolerances = toml::from_str(&toml::to_string(&table)?).with_context(|| format!("tolerance `{key}`"))?;
    Ok(())
}

fn configure(command: Command, target: Option<String>, c: Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = files::read(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
            let names_command = text.parse::<toml::Table>().is_ok_and(|t| t.contains_key("command"));
            if names_command && cfg.command != command {
                log::warn!(
                    "configuration is for `{}`, running `{}`",
                    cfg.command.name(),
                    command.name()
                );
            }
            cfg
        }
        None => ExperimentConfig::default(),
    };
    cfg.command = command;
    if target.is_some() {
        cfg.target = target;
    }
    if c.out.is_some() {
        cfg.out = c.out;
    }
    if c.grid.is_some() {
        cfg.grid = c.grid;
    }
    if c.ladder.is_some() {
        cfg.ladder = c.ladder;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if c.generator.is_some() {
        cfg.generator = c.generator;
    }
    for p in &c.params {
        let (key, value) = split_pair(p)?;
        let v: f64 = value.parse().with_context(|| format!("parameter `{key}`"))?;
        cfg.params.insert(key.to_owned(), v);
    }
    for t in &c.tol {
        apply_tolerance(&mut cfg, t)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool> {
    let (command, target, common) = match cli.command {
        Sub::Generate(c) => (Command::Generate, None, c),
        Sub::Residuals(t) => (Command::Residuals, t.target, t.common),
        Sub::Entropy(c) => (Command::Entropy, None, c),
        Sub::Wente(c) => (Command::Wente, None, c),
        Sub::Riesz(c) => (Command::Riesz, None, c),
        Sub::Defect(t) => (Command::Defect, t.target, t.common),
        Sub::Dual(c) => (Command::Dual, None, c),
        Sub::Convergence(t) => (Command::Convergence, t.target, t.common),
    };
    let cfg = configure(command, target, common)?;
    let output = run(&cfg)?;
    print!("{}", output.report.summary());
    match &cfg.out {
        Some(dir) => {
            output
                .write(dir)
                .with_context(|| format!("writing to {}", dir.display()))?;
            log::info!(
                "wrote report and {} artifacts to {}",
                output.artifacts.len(),
                dir.display()
            );
        }
        None if !output.artifacts.is_empty() => {
            log::info!("{} artifacts not written (no --out)", output.artifacts.len());
        }
        None => {}
    }
    Ok(output.report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
