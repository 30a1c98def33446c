//! `symbreak-sim`: run named experiments and write CSV, JSON and SVG artifacts.
//!
//! Exit codes: 0 on success, 1 for physics errors, 2 for configuration errors.

mod config;
mod output;
mod registry;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{normalize_key, ConfigError, ExperimentConfig, Format, RawValue};
use output::{artifact_path, git_revision, write_svg, Metadata};

#[derive(Parser)]
#[command(name = "symbreak-sim", version, about = "Driven-dissipative bosonic lattice experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment: `run <experiment> [--key value ...] [--config path]
    /// [--out dir] [--seed N] [--format csv|json|svg]`.
    Run {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "ARGS")]
        args: Vec<String>,
    },
    /// Check a config file against the experiment schema without running it.
    Validate { config: PathBuf },
    /// List experiments, or the parameters of one experiment.
    List { experiment: Option<String> },
    /// `symbreak-sim <experiment> ...` is shorthand for `run <experiment> ...`.
    #[command(external_subcommand)]
    External(Vec<String>),
}

enum Failure {
    Config(ConfigError),
    Physics(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

/// Splits `--key value` / `--key=value` pairs. A key followed by another
/// `--key` or by nothing is a flag set to `true`.
fn parse_run_args(args: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let mut experiment = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if let Some(body) = a.strip_prefix("--") {
            let (key, value) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => match args.get(i + 1) {
                    Some(next) if !next.starts_with("--") => {
                        i += 1;
                        (body.to_string(), next.clone())
                    }
                    _ => (body.to_string(), "true".to_string()),
                },
            };
            overrides.push((key, value));
        } else if experiment.is_none() {
            experiment = Some(a.clone());
        } else {
            return Err(ConfigError::Invalid(format!("unexpected argument `{a}`")));
        }
        i += 1;
    }

    let config_path = overrides.iter().rev().find(|(k, _)| normalize_key(k) == "config").map(|(_, v)| v.clone());
    let mut cfg = match &config_path {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::new(
            experiment.as_deref().ok_or_else(|| ConfigError::Missing("experiment".into()))?,
        ),
    };
    if let (Some(name), Some(_)) = (&experiment, &config_path) {
        if *name != cfg.experiment {
            return Err(ConfigError::Invalid(format!(
                "experiment `{name}` conflicts with `{}` in the config file",
                cfg.experiment
            )));
        }
    }
    let mut params: BTreeMap<String, RawValue> =
        std::mem::take(&mut cfg.params).into_iter().map(|(k, v)| (normalize_key(&k), v)).collect();
    let mut formats: Option<Vec<Format>> = None;
    for (key, value) in overrides {
        match normalize_key(&key).as_str() {
            "config" => {}
            "out" => cfg.out = PathBuf::from(value),
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| ConfigError::Invalid(format!("`seed` must be a non-negative integer, got `{value}`")))?
            }
            "format" => {
                let list = formats.get_or_insert_with(Vec::new);
                for f in value.split(',') {
                    list.push(f.parse()?);
                }
            }
            k => {
                params.insert(k.to_string(), RawValue::Text(value));
            }
        }
    }
    if let Some(f) = formats {
        cfg.formats = f;
    }
    cfg.params = params;
    Ok(cfg)
}

fn report(table: &output::ResultTable) {
    if table.rows.len() == 1 {
        let width = table.columns.iter().map(|c| c.len()).max().unwrap_or(0);
        for (c, v) in table.columns.iter().zip(&table.rows[0]) {
            let text = serde_json::to_string(v).unwrap_or_default();
            println!("{c:<width$}  {}", text.trim_matches('"'));
        }
    }
}

fn run(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let (exp, params) = cfg.resolve()?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| ConfigError::Invalid(format!("cannot create {}: {e}", cfg.out.display())))?;
    let start = Instant::now();
    let out = (exp.run)(&params, cfg.seed).map_err(|e| Failure::Physics(format!("{}: {e}", exp.name)))?;
    let runtime = start.elapsed().as_secs_f64();

    let io = |what: &str, e: &dyn std::fmt::Display| Failure::Physics(format!("{}: writing {what}: {e}", exp.name));
    let mut written = Vec::new();
    for f in &cfg.formats {
        let path = match f {
            Format::Csv => {
                let p = artifact_path(&cfg.out, exp.name, "csv");
                out.table.write_csv(&p).map_err(|e| io("csv", &e))?;
                p
            }
            Format::Svg => {
                let p = artifact_path(&cfg.out, exp.name, "svg");
                write_svg(&out.plot, &p).map_err(|e| io("svg", &e))?;
                p
            }
            Format::Json => {
                let meta = Metadata {
                    experiment: exp.name.into(),
                    reference: exp.reference.into(),
                    description: exp.description.into(),
                    seed: cfg.seed,
                    params: serde_json::to_value(&params).unwrap_or_default(),
                    config_hash: params.hash(exp.name, cfg.seed),
                    git_revision: git_revision(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    columns: out.table.columns.clone(),
                    rows: out.table.rows.len(),
                    runtime_seconds: runtime,
                    timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                    summary: out.summary.clone(),
                };
                let p = artifact_path(&cfg.out, exp.name, "json");
                let text = serde_json::to_string_pretty(&meta).map_err(|e| io("json", &e))?;
                std::fs::write(&p, text + "\n").map_err(|e| io("json", &e))?;
                p
            }
        };
        written.push(path);
    }
    report(&out.table);
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn validate(path: &std::path::Path) -> Result<(), ConfigError> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.resolve()?;
    let text = toml::to_string(&cfg).map_err(|e| ConfigError::Invalid(format!("cannot serialize: {e}")))?;
    let back: ExperimentConfig =
        toml::from_str(&text).map_err(|e| ConfigError::Invalid(format!("config does not round-trip: {e}")))?;
    if back.params != cfg.params || back.experiment != cfg.experiment || back.seed != cfg.seed {
        return Err(ConfigError::Invalid("config does not round-trip".into()));
    }
    Ok(())
}

fn list(name: Option<&str>) -> Result<(), ConfigError> {
    match name {
        None => {
            for e in registry::REGISTRY.iter() {
                println!("{:<22} {:<11} {}", e.name, e.reference, e.description);
            }
        }
        Some(n) => {
            let e = registry::find(n)?;
            println!("{}: {}", e.name, e.description);
            for s in e.params {
                let default = s.default.map_or("required".to_string(), |d| format!("default {d}"));
                println!("  --{:<14} {:<28} {}", s.key, default, s.doc);
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), ConfigError> {
    if let Ok(v) = std::env::var("SYMBREAK_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| ConfigError::Invalid(format!("SYMBREAK_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(Failure::from).and_then(|()| match &cli.command {
        Command::Run { args } => parse_run_args(args).map_err(Failure::from).and_then(|cfg| run(&cfg)),
        Command::External(args) => parse_run_args(args).map_err(Failure::from).and_then(|cfg| run(&cfg)),
        Command::Validate { config } => {
            validate(config)?;
            println!("ok");
            Ok(())
        }
        Command::List { experiment } => Ok(list(experiment.as_deref())?),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Physics(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
