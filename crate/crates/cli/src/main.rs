use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levysym::mc::resolve_workers;
use levysym_cli::sweep::parse_values;
use levysym_cli::{run, ExperimentSpec, Parameter, SchemaError, Sweep};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "levysym", version, about = "Rearrangement comparisons for Lévy trap and capacity functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Replaces the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides LEVYSYM_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(Common),
    /// Run one experiment per value of a parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of m, K, P, n-truncation, q.
        #[arg(long)]
        parameter: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
}

fn load(c: &Common) -> Result<(Value, PathBuf), SchemaError> {
    let text = std::fs::read_to_string(&c.spec).map_err(|e| SchemaError(format!("{}: {e}", c.spec.display())))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| SchemaError(e.to_string()))?;
    if let (Some(seed), Some(obj)) = (c.seed, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    if c.workers == Some(0) {
        return Err(SchemaError("--workers must be positive".into()));
    }
    let base = c.spec.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((value, base))
}

fn execute(cli: Cli) -> Result<bool, SchemaError> {
    match cli.command {
        Command::Run(c) => {
            let (value, base) = load(&c)?;
            let spec = ExperimentSpec::from_value(value, &base)?;
            let report = run(&spec, resolve_workers(c.workers))?;
            let (json, csv) = report.write(&c.out_dir).map_err(|e| SchemaError(format!("writing report: {e}")))?;
            eprintln!("wrote {} and {}", json.display(), csv.display());
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            Ok(report.holds)
        }
        Command::Sweep { common: c, parameter, values } => {
            let parameter = Parameter::parse(&parameter)?;
            let values = parse_values(&values)?;
            let (value, base) = load(&c)?;
            let stem = ExperimentSpec::from_value(value.clone(), &base)?.output.stem;
            let sweep = Sweep::run(&value, &base, parameter, &values, resolve_workers(c.workers))?;
            sweep.write(&c.out_dir, &stem).map_err(|e| SchemaError(format!("writing reports: {e}")))?;
            for row in &sweep.summary {
                eprintln!("{} = {}: holds = {}, min margin = {:?}", row.parameter, row.value, row.holds, row.min_margin);
            }
            Ok(sweep.holds)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
