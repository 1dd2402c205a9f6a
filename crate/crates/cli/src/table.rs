//! Tabular experiment output: CSV with `#`-prefixed metadata lines.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{config_err, CliResult};

/// Per-column comparison rule used by `verify`. Numeric rules apply to every
/// `;`-separated number in a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tol {
    Exact,
    Abs(f64),
    /// `|a − b| ≤ tol · max(|a|, |b|)`.
    Rel(f64),
}

impl Tol {
    /// Same kind of rule with a new magnitude; exact columns stay exact.
    pub fn with_magnitude(self, t: f64) -> Tol {
        match self {
            Tol::Exact => Tol::Exact,
            Tol::Abs(_) => Tol::Abs(t),
            Tol::Rel(_) => Tol::Rel(t),
        }
    }
}

impl fmt::Display for Tol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tol::Exact => write!(f, "exact"),
            Tol::Abs(t) => write!(f, "abs:{t:e}"),
            Tol::Rel(t) => write!(f, "rel:{t:e}"),
        }
    }
}

impl FromStr for Tol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exact" {
            return Ok(Tol::Exact);
        }
        let bad = || format!("bad tolerance '{s}'");
        let (kind, mag) = s.split_once(':').ok_or_else(bad)?;
        let t: f64 = mag.parse().map_err(|_| bad())?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(bad());
        }
        match kind {
            "abs" => Ok(Tol::Abs(t)),
            "rel" => Ok(Tol::Rel(t)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub tol: Tol,
}

pub fn col(name: &str, tol: Tol) -> Column {
    Column { name: name.to_string(), tol }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Shortest round-trip form, positional for moderate magnitudes and
/// scientific otherwise, with `-0` folded into `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A list of numbers packed into one cell.
pub fn num_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

pub fn int_list(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Header block written above the data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub entries: BTreeMap<String, String>,
}

pub const META_KEYS: [&str; 6] = ["version", "experiment", "config-hash", "seed", "tolerance", "config"];

impl Metadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn tolerances(&self) -> CliResult<BTreeMap<String, Tol>> {
        let line = self.get("tolerance").ok_or_else(|| config_err("golden has no tolerance line"))?;
        line.split(',')
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (k, v) = item.split_once('=').ok_or_else(|| config_err(format!("bad tolerance entry '{item}'")))?;
                Ok((k.to_string(), v.parse::<Tol>().map_err(config_err)?))
            })
            .collect()
    }
}

pub fn tolerance_line(columns: &[Column]) -> String {
    columns.iter().map(|c| format!("{}={}", c.name, c.tol)).collect::<Vec<_>>().join(",")
}

pub fn to_csv(meta: &Metadata, table: &Table) -> CliResult<String> {
    let mut out = String::new();
    for key in META_KEYS {
        if let Some(v) = meta.get(key) {
            out.push_str(&format!("# {key}: {v}\n"));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.header()).map_err(|e| config_err(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| config_err(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| config_err(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// Splits a CSV file back into metadata, header and rows.
pub fn from_csv(text: &str) -> CliResult<(Metadata, Vec<String>, Vec<Vec<String>>)> {
    let mut meta = Metadata::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').trim_start().split_once(": ") {
            meta.set(k, v);
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| config_err(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(|e| config_err(e.to_string())))
        .collect::<CliResult<_>>()?;
    Ok((meta, header, rows))
}

/// Largest tolerance-scaled deviation between two cells, `None` when they
/// cannot be compared at all.
pub fn cell_deviation(a: &str, b: &str, tol: Tol) -> Option<f64> {
    match tol {
        Tol::Exact => (a == b).then_some(0.0),
        Tol::Abs(t) | Tol::Rel(t) => {
            let xs: Vec<&str> = a.split(';').collect();
            let ys: Vec<&str> = b.split(';').collect();
            if xs.len() != ys.len() {
                return None;
            }
            let mut worst = 0.0f64;
            for (x, y) in xs.iter().zip(&ys) {
                match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(x), Ok(y)) => {
                        let gap = (x - y).abs();
                        let d = match tol {
                            Tol::Rel(_) if gap > 0.0 => gap / x.abs().max(y.abs()),
                            _ => gap,
                        };
                        worst = worst.max(if t > 0.0 { d / t } else if d == 0.0 { 0.0 } else { f64::INFINITY });
                    }
                    _ if x == y => {}
                    _ => return None,
                }
            }
            Some(worst)
        }
    }
}
