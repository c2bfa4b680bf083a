//! Parameter sweeps: configuration, named presets, parallel execution and
//! CSV/JSON output.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::ModePair;
use crate::error::{PointError, SweepError};
use crate::model::{scale, SystemSpec};
use crate::pipeline::{evaluate_scaled, Mode, PointResult};

/// Upper bound on the number of grid points in one sweep.
pub const MAX_GRID_POINTS: u64 = 10_000_000;
pub const MAX_AXES: usize = 3;

/// Names accepted as axis parameters.
pub const AXIS_PARAMS: &[&str] = &[
    "nu_p",
    "nu_v",
    "nu_l",
    "kappa",
    "gamma",
    "gamma1",
    "gamma2",
    "g_v",
    "omega",
    "drive_phase",
    "delta",
    "delta_p",
    "n_molecules",
    "m_split",
    "m_fraction",
    "temperature",
    "nbar",
    "n1",
    "n2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(param: &str, min: f64, max: f64, count: usize) -> Self {
        Axis { param: param.to_string(), min, max, count, spacing: Spacing::Linear }
    }

    /// Grid values with both endpoints reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.min];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == n - 1 {
                    self.max
                } else {
                    let t = i as f64 / last;
                    match self.spacing {
                        Spacing::Linear => self.min + (self.max - self.min) * t,
                        Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                    }
                }
            })
            .collect()
    }

    fn validate(&self, k: usize) -> Result<(), SweepError> {
        let field = |f: &str| format!("axes.{k}.{f}");
        if !AXIS_PARAMS.contains(&self.param.as_str()) {
            return Err(SweepError::config(
                field("param"),
                format!("`{}` is not a writable parameter (one of: {})", self.param, AXIS_PARAMS.join(", ")),
            ));
        }
        if self.count < 2 {
            return Err(SweepError::config(field("count"), format!("must be >= 2, got {}", self.count)));
        }
        if !self.min.is_finite() {
            return Err(SweepError::config(field("min"), "must be finite"));
        }
        if !self.max.is_finite() {
            return Err(SweepError::config(field("max"), "must be finite"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0 && self.max > 0.0) {
            return Err(SweepError::config(field("spacing"), "log spacing needs min > 0 and max > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_pairs() -> Vec<ModePair> {
    ModePair::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_pairs")]
    pub pairs: Vec<ModePair>,
    /// Points with `max_l |G_l|` above this are kept but excluded from the
    /// summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
    pub base: SystemSpec,
    #[serde(default)]
    pub axes: Vec<Axis>,
}

impl SweepSpec {
    pub fn grid_size(&self) -> u64 {
        self.axes.iter().map(|a| a.count as u64).product()
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.len() > MAX_AXES {
            return Err(SweepError::config("axes", format!("at most {MAX_AXES} axes, got {}", self.axes.len())));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            axis.validate(k)?;
            if self.axes[..k].iter().any(|a| a.param == axis.param) {
                return Err(SweepError::config(format!("axes.{k}.param"), format!("`{}` appears twice", axis.param)));
            }
        }
        let total = self.axes.iter().try_fold(1u64, |acc, a| acc.checked_mul(a.count as u64));
        match total {
            Some(t) if t <= MAX_GRID_POINTS => {}
            _ => {
                return Err(SweepError::config("axes", format!("grid exceeds {MAX_GRID_POINTS} points")));
            }
        }
        if self.pairs.is_empty() {
            return Err(SweepError::config("pairs", "at least one pair is required"));
        }
        if let Some(cap) = self.max_coupling {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(SweepError::config("max_coupling", format!("must be finite and > 0, got {cap}")));
            }
        }
        // Axes may fill in fields the base leaves open, so only check the
        // base once the first grid point has been applied.
        let mut first = self.base.clone();
        for axis in &self.axes {
            set_param(&mut first, &axis.param, axis.min);
        }
        first.validate().map_err(|e| match e {
            crate::error::ModelError::InvalidParameter { field, reason } => {
                SweepError::config(format!("base.{field}"), reason)
            }
            other => SweepError::config("base", other.to_string()),
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let value: toml::Value = toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self, SweepError> {
        let spec: SweepSpec = value.try_into().map_err(|e: toml::de::Error| SweepError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("sweep specs serialize to TOML")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep specs serialize to TOML")
    }

    /// Applies `key=value` overrides (dotted paths, numeric indices into
    /// arrays) and re-validates.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, SweepError> {
        let mut value = self.to_value();
        for o in overrides {
            apply_override(&mut value, o.as_ref())?;
        }
        Self::from_value(value)
    }
}

/// Edits one dotted path of a TOML document in place.
pub fn apply_override(doc: &mut toml::Value, assignment: &str) -> Result<(), SweepError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SweepError::config(assignment, "expected key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(SweepError::config(key, "empty path segment"));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            toml::Value::Table(t) => {
                if last {
                    t.insert(part.to_string(), value);
                    return Ok(());
                }
                t.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()))
            }
            toml::Value::Array(a) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| SweepError::config(key, format!("`{part}` is not an array index")))?;
                let len = a.len();
                let slot = a
                    .get_mut(idx)
                    .ok_or_else(|| SweepError::config(key, format!("index {idx} out of range (len {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(SweepError::config(key, format!("`{part}` is not inside a table"))),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// Writes an axis value into a parameter set. Integer parameters are
/// rounded; `gamma` and `nbar` set both modes.
pub fn set_param(spec: &mut SystemSpec, param: &str, value: f64) {
    let count = |v: f64| v.round().max(0.0) as u32;
    match param {
        "nu_p" => spec.nu_p = value,
        "nu_v" => spec.nu_v = value,
        "nu_l" => spec.nu_l = value,
        "kappa" => spec.kappa = value,
        "gamma" => {
            spec.gamma1 = value;
            spec.gamma2 = value;
        }
        "gamma1" => spec.gamma1 = value,
        "gamma2" => spec.gamma2 = value,
        "g_v" => spec.g_v = value,
        "omega" => spec.omega = value,
        "drive_phase" => spec.drive_phase = value,
        "delta" => spec.delta = value,
        "delta_p" => spec.nu_l = spec.nu_p - value * spec.nu_v,
        "n_molecules" => spec.n_molecules = count(value),
        "m_split" => {
            spec.m_split = count(value);
            spec.m_fraction = None;
        }
        "m_fraction" => spec.m_fraction = Some(value),
        "temperature" => {
            spec.temperature = Some(value);
            spec.n1 = None;
            spec.n2 = None;
        }
        "nbar" => {
            spec.n1 = Some(value);
            spec.n2 = Some(value);
        }
        "n1" => spec.n1 = Some(value),
        "n2" => spec.n2 = Some(value),
        other => panic!("unvalidated axis parameter `{other}`"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValue {
    pub eta_minus: f64,
    pub log_negativity: f64,
}

/// One evaluated grid point (one row per steady-state branch).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: u64,
    pub axes: Vec<f64>,
    pub branch: String,
    pub delta: f64,
    pub delta_p: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub g1: f64,
    pub g2: f64,
    pub n1: f64,
    pub n2: f64,
    pub n_molecules: u32,
    pub m_split: u32,
    pub omega: f64,
    pub cavity_abs: f64,
    pub g1_abs: f64,
    pub g2_abs: f64,
    pub stable: bool,
    pub abscissa: f64,
    pub marginal: bool,
    pub within_cap: bool,
    pub residual: Option<f64>,
    /// Same order as the spec's pairs; `None` when unstable or failed.
    pub pairs: Vec<Option<PairValue>>,
    pub error: Option<String>,
}

/// Entanglement at or below this is reported as exactly zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

fn error_tag(e: &PointError) -> String {
    let kind = match e {
        PointError::Model(_) => "model",
        PointError::SteadyState(_) => "steady_state",
        PointError::Dynamics(_) => "dynamics",
        PointError::Entanglement(_) => "entanglement",
    };
    format!("{kind}: {e}")
}

impl SweepRow {
    fn failed(index: u64, axes: Vec<f64>, n_pairs: usize, error: &PointError) -> Self {
        SweepRow {
            index,
            axes,
            branch: String::new(),
            delta: f64::NAN,
            delta_p: f64::NAN,
            kappa: f64::NAN,
            gamma1: f64::NAN,
            gamma2: f64::NAN,
            g1: f64::NAN,
            g2: f64::NAN,
            n1: f64::NAN,
            n2: f64::NAN,
            n_molecules: 0,
            m_split: 0,
            omega: f64::NAN,
            cavity_abs: f64::NAN,
            g1_abs: f64::NAN,
            g2_abs: f64::NAN,
            stable: false,
            abscissa: f64::NAN,
            marginal: false,
            within_cap: false,
            residual: None,
            pairs: vec![None; n_pairs],
            error: Some(error_tag(error)),
        }
    }

    fn from_point(index: u64, axes: Vec<f64>, r: &PointResult, pairs: &[ModePair], cap: Option<f64>) -> Self {
        let p = &r.params;
        let ss = &r.steady;
        let g_abs = ss.couplings.map(|g| g.norm());
        let values = pairs
            .iter()
            .map(|pair| {
                r.entanglement.iter().find(|e| e.pair == *pair).map(|e| PairValue {
                    eta_minus: e.eta_minus,
                    log_negativity: if e.log_negativity <= NEGATIVITY_FLOOR { 0.0 } else { e.log_negativity },
                })
            })
            .collect();
        SweepRow {
            index,
            axes,
            branch: ss.branch.as_str().to_string(),
            delta: ss.delta,
            delta_p: ss.delta_p,
            kappa: p.kappa,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            g1: p.g1,
            g2: p.g2,
            n1: p.n1,
            n2: p.n2,
            n_molecules: p.n_molecules,
            m_split: p.m_split,
            omega: p.drive.norm(),
            cavity_abs: ss.cavity.norm(),
            g1_abs: g_abs[0],
            g2_abs: g_abs[1],
            stable: r.stability.stable,
            abscissa: r.stability.abscissa,
            marginal: r.stability.marginal,
            within_cap: cap.is_none_or(|c| g_abs[0].max(g_abs[1]) <= c),
            residual: r.residual,
            pairs: values,
            error: r.error.as_ref().map(error_tag),
        }
    }

    pub fn negativity(&self, k: usize) -> Option<f64> {
        self.pairs.get(k).and_then(|v| v.as_ref()).map(|v| v.log_negativity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMaximum {
    pub pair: ModePair,
    pub log_negativity: f64,
    pub index: u64,
    /// Axis values at the maximum, keyed by parameter.
    pub coordinates: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub stable: usize,
    pub errors: usize,
    pub maxima: Vec<Option<PairMaximum>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepTable {
    pub fn axis_names(&self) -> Vec<&str> {
        self.spec.axes.iter().map(|a| a.param.as_str()).collect()
    }

    pub fn pair_index(&self, pair: ModePair) -> Option<usize> {
        self.spec.pairs.iter().position(|p| *p == pair)
    }

    pub fn max_for(&self, pair: ModePair) -> Option<&PairMaximum> {
        self.pair_index(pair).and_then(|k| self.summary.maxima[k].as_ref())
    }
}

fn summarize(spec: &SweepSpec, rows: &[SweepRow]) -> SweepSummary {
    let maxima = spec
        .pairs
        .iter()
        .enumerate()
        .map(|(k, &pair)| {
            rows.iter()
                .filter(|r| r.stable && r.within_cap)
                .filter_map(|r| r.negativity(k).map(|e| (e, r)))
                // Strict comparison keeps the first row on ties.
                .fold(None::<(f64, &SweepRow)>, |best, (e, r)| match best {
                    Some((b, _)) if e <= b => best,
                    _ => Some((e, r)),
                })
                .map(|(e, r)| PairMaximum {
                    pair,
                    log_negativity: e,
                    index: r.index,
                    coordinates: spec.axes.iter().map(|a| a.param.clone()).zip(r.axes.iter().copied()).collect(),
                })
        })
        .collect();
    SweepSummary {
        rows: rows.len(),
        stable: rows.iter().filter(|r| r.stable).count(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        maxima,
    }
}

/// Axis coordinates of flat grid index `i` (first axis outermost).
pub fn coordinates(values: &[Vec<f64>], mut i: u64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for (k, v) in values.iter().enumerate().rev() {
        let n = v.len() as u64;
        out[k] = v[(i % n) as usize];
        i /= n;
    }
    out
}

fn evaluate_index(spec: &SweepSpec, values: &[Vec<f64>], index: u64) -> Vec<SweepRow> {
    let axes = coordinates(values, index);
    let mut point = spec.base.clone();
    for (axis, &v) in spec.axes.iter().zip(&axes) {
        set_param(&mut point, &axis.param, v);
    }
    let n_pairs = spec.pairs.len();
    let results = scale(&point)
        .map_err(PointError::from)
        .and_then(|p| evaluate_scaled(&p, spec.mode, &spec.pairs));
    match results {
        Ok(points) if !points.is_empty() => points
            .iter()
            .map(|r| SweepRow::from_point(index, axes.clone(), r, &spec.pairs, spec.max_coupling))
            .collect(),
        Ok(_) => vec![SweepRow::failed(
            index,
            axes,
            n_pairs,
            &PointError::SteadyState(crate::error::SteadyStateError::Companion),
        )],
        Err(e) => vec![SweepRow::failed(index, axes, n_pairs, &e)],
    }
}

/// Runs a validated sweep on `jobs` worker threads (0 = rayon default).
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let values: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let total = spec.grid_size();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|i| evaluate_index(spec, &values, i))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    let summary = summarize(spec, &rows);
    Ok(SweepTable { spec: spec.clone(), rows, summary })
}

/// Default worker count: `MOLCAV_JOBS` when set and valid, else all cores.
pub fn default_jobs() -> usize {
    std::env::var("MOLCAV_JOBS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

// ---------------------------------------------------------------- output

const FIXED_COLUMNS: &[&str] = &[
    "index",
    "branch",
    "delta",
    "delta_p",
    "kappa",
    "gamma1",
    "gamma2",
    "g1",
    "g2",
    "n1",
    "n2",
    "n_molecules",
    "m_split",
    "omega",
    "cavity_abs",
    "g1_abs",
    "g2_abs",
    "stable",
    "abscissa",
    "marginal",
    "within_cap",
    "residual",
];

/// CSV/JSON column names for a sweep: `axis_<param>` columns, the fixed
/// columns, `eta_<pair>` and `en_<pair>` for each pair, then `error`.
pub fn columns(spec: &SweepSpec) -> Vec<String> {
    let mut cols: Vec<String> = spec.axes.iter().map(|a| format!("axis_{}", a.param)).collect();
    cols.extend(FIXED_COLUMNS.iter().map(|s| s.to_string()));
    for pair in &spec.pairs {
        cols.push(format!("eta_{pair}"));
        cols.push(format!("en_{pair}"));
    }
    cols.push("error".to_string());
    cols
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(n) => (*n).into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

fn cells(row: &SweepRow) -> Vec<Cell> {
    let mut c: Vec<Cell> = row.axes.iter().map(|&x| Cell::Float(x)).collect();
    c.extend([
        Cell::Int(row.index),
        Cell::Text(row.branch.clone()),
        Cell::Float(row.delta),
        Cell::Float(row.delta_p),
        Cell::Float(row.kappa),
        Cell::Float(row.gamma1),
        Cell::Float(row.gamma2),
        Cell::Float(row.g1),
        Cell::Float(row.g2),
        Cell::Float(row.n1),
        Cell::Float(row.n2),
        Cell::Int(row.n_molecules as u64),
        Cell::Int(row.m_split as u64),
        Cell::Float(row.omega),
        Cell::Float(row.cavity_abs),
        Cell::Float(row.g1_abs),
        Cell::Float(row.g2_abs),
        Cell::Bool(row.stable),
        Cell::Float(row.abscissa),
        Cell::Bool(row.marginal),
        Cell::Bool(row.within_cap),
        row.residual.map_or(Cell::Empty, Cell::Float),
    ]);
    for v in &row.pairs {
        match v {
            Some(v) => c.extend([Cell::Float(v.eta_minus), Cell::Float(v.log_negativity)]),
            None => c.extend([Cell::Empty, Cell::Empty]),
        }
    }
    c.push(row.error.clone().map_or(Cell::Empty, Cell::Text));
    c
}

pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(&table.spec))?;
    for row in &table.rows {
        w.write_record(cells(row).iter().map(Cell::csv))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub name: &'a str,
    pub version: &'static str,
    pub timestamp: u64,
    pub spec: &'a SweepSpec,
    pub summary: &'a SweepSummary,
    pub columns: Vec<String>,
}

pub fn to_json(table: &SweepTable, timestamp: u64) -> serde_json::Value {
    let cols = columns(&table.spec);
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let map: serde_json::Map<String, serde_json::Value> =
                cols.iter().cloned().zip(cells(row).iter().map(Cell::json)).collect();
            serde_json::Value::Object(map)
        })
        .collect();
    let metadata = Metadata {
        name: &table.spec.name,
        version: env!("CARGO_PKG_VERSION"),
        timestamp,
        spec: &table.spec,
        summary: &table.summary,
        columns: cols,
    };
    serde_json::json!({ "metadata": metadata, "rows": rows })
}

pub fn write_results(table: &SweepTable, format: Format, path: &Path) -> Result<(), SweepError> {
    let io = |source| SweepError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => {
            write_csv(table, &mut out).map_err(|source| SweepError::Csv { path: path.to_path_buf(), source })?
        }
        Format::Json => {
            let timestamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            serde_json::to_writer_pretty(&mut out, &to_json(table, timestamp))?;
            out.write_all(b"\n").map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// A CSV written by `write_csv`, read back as named columns of strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self, SweepError> {
        let csv_err = |source| SweepError::Csv { path: path.to_path_buf(), source };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let records = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()
            .map_err(csv_err)?;
        Ok(CsvTable { header, records })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed float column; empty cells become `None`.
    pub fn floats(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.records.iter().map(|r| r[k].parse().ok()).collect())
    }
}

// --------------------------------------------------------------- presets

pub const PRESET_NAMES: &[&str] = &[
    "fig2",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
    "fig4a",
    "fig4b",
    "fig4c",
    "fig4d",
    "fig4e",
    "fig4f",
    "blue_detuned",
];

/// Cavity-vibration settings: κ/ω_v = 1/3, γ/ω_v = 1e-4, n̄ = 0.01 (312 K),
/// N = 100 molecules all in the second collective mode.
pub fn cavity_base() -> SystemSpec {
    SystemSpec {
        nu_p: 312.0,
        nu_v: 30.0,
        nu_l: 300.0,
        kappa: 10.0,
        gamma1: 0.003,
        gamma2: 0.003,
        g_v: 30.0,
        omega: 16.0,
        drive_phase: 0.0,
        delta: 0.4,
        n_molecules: 100,
        m_split: 0,
        m_fraction: None,
        temperature: None,
        n1: Some(0.01),
        n2: Some(0.01),
    }
}

/// Vibration-vibration settings: Ω/ω_v = 60, γ/ω_v = 0.3, Δ/ω_v = 2,
/// M = 50, n̄ = 0.001 (210 K).
pub fn vibration_base() -> SystemSpec {
    SystemSpec {
        nu_p: 360.0,
        gamma1: 9.0,
        gamma2: 9.0,
        omega: 60.0,
        delta: 2.0,
        m_split: 50,
        n1: Some(0.001),
        n2: Some(0.001),
        ..cavity_base()
    }
}

fn sweep(name: &str, base: SystemSpec, axes: Vec<Axis>) -> SweepSpec {
    SweepSpec {
        name: name.to_string(),
        mode: Mode::Effective,
        pairs: default_pairs(),
        max_coupling: None,
        output: None,
        base,
        axes,
    }
}

pub fn preset(name: &str) -> Result<SweepSpec, SweepError> {
    let spec = match name {
        "fig2" => sweep("fig2", cavity_base(), vec![Axis::linear("delta", 0.0, 1.0, 101), Axis::linear("omega", 0.0, 16.0, 81)]),
        "fig3a" => sweep(
            "fig3a",
            cavity_base(),
            vec![Axis::linear("n_molecules", 10.0, 400.0, 40), Axis::linear("kappa", 6.0, 30.0, 41)],
        ),
        "fig3b" => sweep(
            "fig3b",
            cavity_base(),
            vec![Axis::linear("n_molecules", 10.0, 400.0, 40), Axis::linear("nbar", 0.0, 200.0, 41)],
        ),
        "fig3c" => sweep(
            "fig3c",
            cavity_base(),
            vec![Axis::linear("kappa", 10.0, 30.0, 3), Axis::linear("n_molecules", 10.0, 400.0, 40)],
        ),
        "fig3d" => sweep(
            "fig3d",
            cavity_base(),
            vec![Axis::linear("n_molecules", 50.0, 150.0, 3), Axis::linear("nbar", 0.0, 200.0, 41)],
        ),
        "fig4a" => sweep(
            "fig4a",
            vibration_base(),
            vec![Axis::linear("delta", 0.0, 4.0, 81), Axis::linear("omega", 0.0, 80.0, 81)],
        ),
        "fig4b" => sweep(
            "fig4b",
            vibration_base(),
            vec![Axis::linear("delta", 0.0, 4.0, 81), Axis::linear("nbar", 0.0, 0.01, 101)],
        ),
        "fig4c" => sweep(
            "fig4c",
            vibration_base(),
            vec![Axis::linear("m_split", 0.0, 100.0, 101), Axis::linear("kappa", 10.0, 30.0, 5)],
        ),
        "fig4d" => sweep(
            "fig4d",
            SystemSpec { m_fraction: Some(0.5), ..vibration_base() },
            vec![Axis::linear("n_molecules", 20.0, 600.0, 30), Axis::linear("kappa", 10.0, 30.0, 21)],
        ),
        "fig4e" => sweep(
            "fig4e",
            vibration_base(),
            vec![Axis::linear("kappa", 10.0, 30.0, 3), Axis::linear("m_split", 0.0, 100.0, 101)],
        ),
        "fig4f" => sweep(
            "fig4f",
            SystemSpec { m_fraction: Some(0.5), ..vibration_base() },
            vec![Axis::linear("kappa", 10.0, 30.0, 3), Axis::linear("n_molecules", 20.0, 600.0, 30)],
        ),
        "blue_detuned" => SweepSpec {
            max_coupling: Some(0.006),
            ..sweep(
                "blue_detuned",
                cavity_base(),
                vec![Axis::linear("delta", -1.0, -0.01, 100), Axis::linear("omega", 0.0, 0.7, 71)],
            )
        },
        other => return Err(SweepError::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {} (stable {}, errors {})", self.rows, self.stable, self.errors)?;
        for m in self.maxima.iter().flatten() {
            let at: Vec<String> = m.coordinates.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(f, "max E_N[{}] = {:.6e} at {}", m.pair, m.log_negativity, at.join(", "))?;
        }
        Ok(())
    }
}
