mod config;
mod error;
mod experiments;
mod runner;
mod table;
mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{params_from_flags, ExperimentConfig};
use error::{config_err, CliError, CliResult};
use experiments::Registry;
use verify::VerifyOptions;

/// Run integrated-information and autonomy experiments and check them
/// against golden files.
#[derive(Parser)]
#[command(name = "perceptronium", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; `perceptronium <experiment> ...` is shorthand for this.
    Run {
        /// Experiment name; optional when --config names it.
        experiment: Option<String>,
        /// JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Experiment parameters as `--name value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// Re-run every config in a golden directory and diff the results.
    Verify {
        /// Directory of `<name>.json` configs and `<name>.csv` goldens.
        dir: Option<PathBuf>,
        /// Override the magnitude of every numeric column tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Add this to each config's seed before re-running.
        #[arg(long)]
        perturb_seed: Option<u64>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List experiments.
    List,
    /// Print the params schema of an experiment.
    Schema { experiment: String },
}

const SUBCOMMANDS: [&str; 5] = ["run", "verify", "list", "schema", "help"];

/// Inserts `run` when the first argument names an experiment.
fn normalize_args(mut args: Vec<OsString>) -> Vec<OsString> {
    if let Some(first) = args.get(1).and_then(|a| a.to_str()) {
        if !first.starts_with('-') && !SUBCOMMANDS.contains(&first) {
            args.insert(1, OsString::from("run"));
        }
    }
    args
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("PERCEPTRONIUM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_err(format!("PERCEPTRONIUM_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(format!("cannot size thread pool: {e}")))
}

/// Flags that clap leaves among the trailing params once an experiment name
/// has been given.
#[derive(Default)]
struct Reserved {
    config: Option<PathBuf>,
    seed: Option<u64>,
    output: Option<PathBuf>,
}

fn split_reserved(params: Vec<String>) -> CliResult<(Reserved, Vec<String>)> {
    let mut r = Reserved::default();
    let mut rest = Vec::new();
    let mut it = params.into_iter();
    while let Some(arg) = it.next() {
        let (flag, inline) = match arg.split_once('=') {
            Some((f, v)) if f.starts_with('-') => (f.to_string(), Some(v.to_string())),
            _ => (arg.clone(), None),
        };
        if !matches!(flag.as_str(), "--config" | "--seed" | "--output" | "-o") {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| config_err(format!("{flag} needs a value")))?,
        };
        match flag.as_str() {
            "--config" => r.config = Some(value.into()),
            "--seed" => {
                r.seed = Some(value.parse().map_err(|_| config_err(format!("seed must be an integer, got '{value}'")))?)
            }
            _ => r.output = Some(value.into()),
        }
    }
    Ok((r, rest))
}

fn run(
    registry: &Registry,
    experiment: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    params: Vec<String>,
) -> CliResult<()> {
    let (reserved, params) = split_reserved(params)?;
    let config = reserved.config.or(config);
    let seed = reserved.seed.or(seed);
    let output = reserved.output.or(output);
    let mut cfg = match (&config, &experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::new(name),
        (None, None) => return Err(config_err("name an experiment or pass --config")),
    };
    if let Some(name) = experiment {
        if config.is_some() && name != cfg.experiment {
            return Err(config_err(format!("config is for '{}', not '{name}'", cfg.experiment)));
        }
    }
    let exp = registry.get(&cfg.experiment)?;
    cfg.params.extend(params_from_flags(exp.schema(), &params)?);
    if seed.is_some() {
        cfg.seed = seed;
    }
    if output.is_some() {
        cfg.output_path = output;
    }
    let done = runner::execute(&cfg, registry)?;
    match &cfg.output_path {
        Some(path) => {
            fs::write(path, &done.csv).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {} rows to {}", done.table.rows.len(), path.display());
        }
        None => print!("{}", done.csv),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let registry = Registry::default();
    match cli.command {
        Command::Run { experiment, config, seed, output, params } => {
            run(&registry, experiment, config, seed, output, params)
        }
        Command::Verify { dir, tol, perturb_seed, report } => {
            if let Some(t) = tol {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(config_err(format!("bad tolerance {t}")));
                }
            }
            let dir = dir.unwrap_or_else(verify::bundled_goldens);
            let opts = VerifyOptions { tol, perturb_seed };
            let r = verify::verify(&dir, &opts, &registry)?;
            let text = r.render();
            print!("{text}");
            if let Some(path) = report {
                fs::write(&path, &text).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))?;
            }
            if r.failed() {
                return Err(CliError::Mismatch(format!("{} golden(s) failed", r.count("FAIL"))));
            }
            Ok(())
        }
        Command::List => {
            for e in registry.iter() {
                let seeded = if e.randomized(&serde_json::Map::new())? { "seed" } else { "-" };
                println!("{:<24} {:<22} {:<5} {}", e.name(), e.module(), seeded, e.summary());
            }
            Ok(())
        }
        Command::Schema { experiment } => {
            print!("{}", registry.get(&experiment)?.schema());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args_os().collect())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|()| dispatch(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(xs: &[&str]) -> Vec<OsString> {
        xs.iter().map(OsString::from).collect()
    }

    #[test]
    fn bare_experiment_becomes_run() {
        assert_eq!(normalize_args(os(&["p", "code_phi", "--code", "parity"])), os(&["p", "run", "code_phi", "--code", "parity"]));
        assert_eq!(normalize_args(os(&["p", "verify", "d"])), os(&["p", "verify", "d"]));
        assert_eq!(normalize_args(os(&["p", "--help"])), os(&["p", "--help"]));
    }

    #[test]
    fn run_collects_trailing_flags() {
        let cli = Cli::try_parse_from(normalize_args(os(&["p", "dispersion", "--side", "2", "--seed", "3"]))).unwrap();
        match cli.command {
            Command::Run { experiment, params, seed, .. } => {
                assert_eq!(experiment.as_deref(), Some("dispersion"));
                assert_eq!(seed, None);
                let (r, rest) = split_reserved(params).unwrap();
                assert_eq!(r.seed, Some(3));
                assert_eq!(rest, vec!["--side", "2"]);
            }
            _ => panic!("expected run"),
        }
    }
}
