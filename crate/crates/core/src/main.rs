use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qmlab::harness::config::{ComplexLiteral, MatrixLiteral, ModelConfig};
use qmlab::harness::{emit_csv, emit_svg, run_experiment, ExperimentConfig, ExperimentId};
use qmlab::{Error, Result};

/// Singular-perturbation convergence experiments for quantum stochastic evolutions.
#[derive(Debug, Parser)]
#[command(name = "qmlab", version)]
struct Cli {
    /// slh | first-quantized | graph-rate | lemma7-rate | fock-identities | pseudo-rate | weak-convergence | cocycle
    experiment: String,
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// log-log SVG plot of the fitted sweeps
    #[arg(long)]
    svg: Option<PathBuf>,
    /// seed for randomized probes (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// E₁₁ for the algebra-only path, e.g. `2` or `0.5-1i`
    #[arg(long, allow_hyphen_values = true)]
    e11: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e10: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e01: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e00: Option<String>,
}

fn literal(text: &Option<String>) -> Option<MatrixLiteral> {
    text.as_ref().map(|s| MatrixLiteral::Scalar(ComplexLiteral::Text(s.clone())))
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let id = ExperimentId::parse(&cli.experiment)?;
    let flags = [&cli.e11, &cli.e10, &cli.e01, &cli.e00];
    let any_flag = flags.iter().any(|f| f.is_some());
    if any_flag && id != ExperimentId::Slh {
        return Err(Error::Config("--e11/--e10/--e01/--e00 apply only to the slh experiment".into()));
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != id {
                return Err(Error::Config(format!(
                    "config is for experiment '{}', not '{id}'",
                    cfg.experiment
                )));
            }
            cfg
        }
        None if id == ExperimentId::Slh && any_flag => ExperimentConfig::with_defaults(id),
        None => return Err(Error::Config("--config is required".into())),
    };
    if any_flag {
        let (Some(e11), Some(e10)) = (literal(&cli.e11), literal(&cli.e10)) else {
            return Err(Error::Config("the algebra path needs at least --e11 and --e10".into()));
        };
        // E₀₁ defaults to E₁₀† in the scalar case
        let e01 = literal(&cli.e01).unwrap_or_else(|| {
            let z = ComplexLiteral::Text(cli.e10.clone().unwrap_or_default());
            match z.value() {
                Ok(v) => MatrixLiteral::Scalar(ComplexLiteral::Text(format!("{}{:+}i", v.re, -v.im))),
                Err(_) => MatrixLiteral::Scalar(z),
            }
        });
        cfg.model = ModelConfig {
            e11,
            e10,
            e01,
            e00: literal(&cli.e00).unwrap_or(MatrixLiteral::Scalar(ComplexLiteral::Real(0.0))),
            overrides: None,
        };
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    let report = run_experiment(&cfg)?;
    if let Some(text) = emit_csv(&report, cli.out.as_deref())? {
        print!("{text}");
    }
    if let Some(path) = &cli.svg {
        emit_svg(&report, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
