//! Turns a config into a table and its CSV text.

use serde_json::Value;

use crate::config::{canonical_json, config_hash, identity, validate, ExperimentConfig};
use crate::error::CliResult;
use crate::experiments::{Context, Registry};
use crate::table::{to_csv, tolerance_line, Metadata, Table};

pub const VERSION: &str = concat!("perceptronium ", env!("CARGO_PKG_VERSION"));

pub struct Executed {
    pub table: Table,
    pub csv: String,
}

/// Experiment, seed and fully defaulted params, without running anything.
pub fn config_identity(cfg: &ExperimentConfig, registry: &Registry) -> CliResult<Value> {
    let exp = registry.get(&cfg.experiment)?;
    validate(exp.schema(), &cfg.params)?;
    Ok(identity(exp.name(), cfg.seed, &exp.normalize(&cfg.params)?))
}

/// Validates the params against the experiment's schema, then runs it.
pub fn execute(cfg: &ExperimentConfig, registry: &Registry) -> CliResult<Executed> {
    let exp = registry.get(&cfg.experiment)?;
    validate(exp.schema(), &cfg.params)?;
    let ctx = Context { seed: cfg.seed, base_dir: &cfg.base_dir };
    let out = exp.run(&cfg.params, &ctx)?;
    let identity = identity(exp.name(), cfg.seed, &out.params);
    let mut meta = Metadata::default();
    meta.set("version", VERSION);
    meta.set("experiment", exp.name());
    meta.set("config-hash", config_hash(&identity));
    meta.set("seed", cfg.seed.map_or("none".to_string(), |s| s.to_string()));
    meta.set("tolerance", tolerance_line(&out.table.columns));
    meta.set("config", canonical_json(&identity));
    let csv = to_csv(&meta, &out.table)?;
    Ok(Executed { table: out.table, csv })
}
