//! Golden-file regression: re-run each config and diff against its CSV.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{config_hash, ExperimentConfig};
use crate::error::{config_err, CliResult};
use crate::experiments::Registry;
use crate::runner::{config_identity, execute};
use crate::table::{cell_deviation, from_csv, Tol};

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Replaces the magnitude of every numeric column tolerance.
    pub tol: Option<f64>,
    /// Added to the seed of every config that has one.
    pub perturb_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail(String),
    Skip(String),
}

impl Status {
    fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail(_) => "FAIL",
            Status::Skip(_) => "SKIP",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub experiment: String,
    pub status: Status,
    pub rows: usize,
    /// Largest deviation in units of the column tolerance.
    pub worst: f64,
    pub tolerance: String,
}

pub struct Report {
    pub entries: Vec<Entry>,
    pub options: VerifyOptions,
}

impl Report {
    pub fn count(&self, label: &str) -> usize {
        self.entries.iter().filter(|e| e.status.label() == label).count()
    }

    pub fn failed(&self) -> bool {
        self.count("FAIL") > 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        match self.options.tol {
            Some(t) => out.push_str(&format!("tolerance: override {t:e} (numeric columns)\n")),
            None => out.push_str("tolerance: per-column from golden metadata\n"),
        }
        if let Some(p) = self.options.perturb_seed {
            out.push_str(&format!("seed perturbation: +{p}\n"));
        }
        out.push_str(&format!(
            "{:<28} {:<24} {:<6} {:>6} {:>10}  {}\n",
            "golden", "experiment", "status", "rows", "worst/tol", "detail"
        ));
        for e in &self.entries {
            let detail = match &e.status {
                Status::Pass => e.tolerance.clone(),
                Status::Fail(d) | Status::Skip(d) => d.clone(),
            };
            out.push_str(&format!(
                "{:<28} {:<24} {:<6} {:>6} {:>10}  {}\n",
                e.name,
                e.experiment,
                e.status.label(),
                e.rows,
                format!("{:.3}", e.worst),
                detail
            ));
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} skipped\n",
            self.count("PASS"),
            self.count("FAIL"),
            self.count("SKIP")
        ));
        out
    }
}

pub fn verify(dir: &Path, opts: &VerifyOptions, registry: &Registry) -> CliResult<Report> {
    if !dir.is_dir() {
        return Err(config_err(format!("golden directory {} does not exist", dir.display())));
    }
    let mut stems = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(|e| config_err(format!("cannot list {}: {e}", dir.display())))? {
        let path = entry.map_err(|e| config_err(e.to_string()))?.path();
        let is_golden = matches!(path.extension().and_then(|e| e.to_str()), Some("json" | "csv"));
        if let (true, Some(stem)) = (is_golden, path.file_stem().and_then(|s| s.to_str())) {
            stems.insert(stem.to_string());
        }
    }
    let mut entries = Vec::new();
    for stem in stems {
        let cfg_path = dir.join(format!("{stem}.json"));
        let csv_path = dir.join(format!("{stem}.csv"));
        entries.push(check_one(&stem, &cfg_path, &csv_path, dir, opts, registry));
    }
    if entries.is_empty() {
        entries.push(Entry {
            name: dir.display().to_string(),
            experiment: "-".into(),
            status: Status::Skip("no goldens found".into()),
            rows: 0,
            worst: 0.0,
            tolerance: String::new(),
        });
    }
    Ok(Report { entries, options: opts.clone() })
}

fn check_one(stem: &str, cfg_path: &Path, csv_path: &Path, dir: &Path, opts: &VerifyOptions, registry: &Registry) -> Entry {
    let mut entry = Entry {
        name: stem.to_string(),
        experiment: "-".into(),
        status: Status::Pass,
        rows: 0,
        worst: 0.0,
        tolerance: String::new(),
    };
    if !csv_path.exists() {
        entry.status = Status::Skip(format!("golden {} missing", file_name(csv_path)));
        if let Ok(cfg) = ExperimentConfig::load(cfg_path) {
            entry.experiment = cfg.experiment;
        }
        return entry;
    }
    if let Err(msg) = compare(&mut entry, cfg_path, csv_path, dir, opts, registry) {
        entry.status = Status::Fail(msg);
    }
    entry
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn compare(
    entry: &mut Entry,
    cfg_path: &Path,
    csv_path: &Path,
    dir: &Path,
    opts: &VerifyOptions,
    registry: &Registry,
) -> Result<(), String> {
    let text = fs::read_to_string(csv_path).map_err(|e| format!("cannot read golden: {e}"))?;
    let (meta, header, golden_rows) = from_csv(&text).map_err(|e| e.to_string())?;
    let mut cfg = if cfg_path.exists() {
        ExperimentConfig::load(cfg_path).map_err(|e| e.to_string())?
    } else {
        let embedded = meta.get("config").ok_or("golden has neither a config file nor a config line")?;
        let mut c = ExperimentConfig::parse(embedded)?;
        c.base_dir = dir.to_path_buf();
        c
    };
    entry.experiment = cfg.experiment.clone();
    cfg.output_path = None;
    let ident = config_identity(&cfg, registry).map_err(|e| e.to_string())?;
    if let Some(golden_hash) = meta.get("config-hash") {
        if golden_hash != config_hash(&ident) {
            return Err("config differs from the one the golden was made with".into());
        }
    }
    if let (Some(d), Some(s)) = (opts.perturb_seed, cfg.seed) {
        cfg.seed = Some(s.wrapping_add(d));
    }
    let result = execute(&cfg, registry).map_err(|e| format!("re-run failed: {e}"))?;
    let tols = meta.tolerances().map_err(|e| e.to_string())?;
    let tols: Vec<Tol> = header
        .iter()
        .map(|h| {
            let t = tols.get(h).copied().unwrap_or(Tol::Exact);
            opts.tol.map_or(t, |m| t.with_magnitude(m))
        })
        .collect();
    entry.tolerance = header.iter().zip(&tols).map(|(h, t)| format!("{h}={t}")).collect::<Vec<_>>().join(",");
    let table = result.table;
    if table.header() != header {
        return Err(format!("header {:?} differs from golden {:?}", table.header(), header));
    }
    entry.rows = golden_rows.len();
    if table.rows.len() != golden_rows.len() {
        return Err(format!("{} rows, golden has {}", table.rows.len(), golden_rows.len()));
    }
    let mut mismatches = 0;
    let mut first = None;
    for (i, (got, want)) in table.rows.iter().zip(&golden_rows).enumerate() {
        for (j, tol) in tols.iter().enumerate() {
            match cell_deviation(&got[j], &want[j], *tol) {
                Some(d) if d <= 1.0 => entry.worst = entry.worst.max(d),
                Some(d) => {
                    entry.worst = entry.worst.max(d);
                    mismatches += 1;
                    first.get_or_insert((i, j));
                }
                None => {
                    entry.worst = f64::INFINITY;
                    mismatches += 1;
                    first.get_or_insert((i, j));
                }
            }
        }
    }
    if let Some((i, j)) = first {
        return Err(format!(
            "{mismatches} cells outside tolerance; first at row {} column {}: {} vs golden {}",
            i + 1,
            header[j],
            table.rows[i][j],
            golden_rows[i][j]
        ));
    }
    Ok(())
}

/// Goldens directory shipped with the crate.
pub fn bundled_goldens() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens")
}
