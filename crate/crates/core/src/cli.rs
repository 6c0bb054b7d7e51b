//! Experiment front-end behind the `haargp` binary.
//!
//! Settings resolve in the order: command-line flag, `HAARGP_*` environment
//! variable, `--config` JSON file, subcommand default.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::empirics::{
    batch_means, empirical_covariance, gaussianity, histogram, histogram2d_batch, moment_ratio_with_se,
    raw_moment_with_se, tail_frequency, DEFAULT_BATCHES,
};
use crate::exact::{exact_moment, MomentSpec, TableCache};
use crate::gp_inference::{triviality_report, GPModel, KernelMode};
use crate::gp_moments::{
    covariance_matrix, gaussian_reference, orthogonal_states_moment, CovarianceMode, SignMode,
};
use crate::haar::{
    format_float, parameter_shift_gradient_samples, parse_dataset_spec, sample_outputs, Dataset, PauliObservable,
    PureState,
};
use crate::overlap::InnerProductMatrix;
use crate::tails::{gaussian_tail, gradient_bound, loss_bound, output_bounds, output_sigma, paper_literal_tail};
use crate::{Error, Group, Result};

pub const ENV_PREFIX: &str = "HAARGP_";

/// Exit codes of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    /// A pass/fail check failed; the summary lists which.
    pub const CHECK_FAILED: i32 = 1;
    /// Bad flags, configuration or arguments.
    pub const USAGE: i32 = 2;
    /// Capacity, memory guard or numerical failure.
    pub const RESOURCE: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "haargp", version, about = "Moments, Monte Carlo and GP checks for Haar-random QNN outputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Univariate output histograms and moment ratios.
    Figure3,
    /// Joint histograms and covariances of state pairs.
    Figure2,
    /// Exact, asymptotic, paper-literal and Monte Carlo moments side by side.
    VerifyMoments,
    /// GP posterior against prior over (d, N) grids.
    Predictive,
    /// Empirical tail frequencies against every tail bound.
    Tails,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Figure3 => "figure3",
            Command::Figure2 => "figure2",
            Command::VerifyMoments => "verify-moments",
            Command::Predictive => "predictive",
            Command::Tails => "tails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GroupChoice {
    Unitary,
    Orthogonal,
    Both,
}

impl GroupChoice {
    pub fn groups(self) -> Vec<Group> {
        match self {
            GroupChoice::Unitary => vec![Group::Unitary],
            GroupChoice::Orthogonal => vec![Group::Orthogonal],
            GroupChoice::Both => Group::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Asymptotic,
    PaperLiteral,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every field is optional so that flags, environment and config file can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    #[arg(long, global = true, env = "HAARGP_GROUP")]
    pub group: Option<GroupChoice>,
    #[arg(long, global = true, env = "HAARGP_QUBITS", conflicts_with = "dim")]
    pub qubits: Option<usize>,
    #[arg(long, global = true, env = "HAARGP_DIM")]
    pub dim: Option<u64>,
    #[arg(long, global = true, env = "HAARGP_SAMPLES")]
    pub samples: Option<usize>,
    #[arg(long, global = true, env = "HAARGP_SEED")]
    pub seed: Option<u64>,
    /// Highest moment order.
    #[arg(long, global = true, env = "HAARGP_ORDER")]
    pub order: Option<usize>,
    /// zero, ghz-pair, epsilon-pair, basis:M, haar:M, clustered:CxM, computational:i,j,…
    #[arg(long, global = true, env = "HAARGP_STATES")]
    pub states: Option<String>,
    /// Pauli string (ZIII…) or sparse form (Z1, X1Z3).
    #[arg(long, global = true, env = "HAARGP_OBSERVABLE")]
    pub observable: Option<String>,
    #[arg(long, global = true, env = "HAARGP_MODE")]
    pub mode: Option<Mode>,
    /// Output directory.
    #[arg(long, global = true, env = "HAARGP_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "HAARGP_FORMAT")]
    pub format: Option<Format>,
    #[arg(long, global = true, env = "HAARGP_THREADS")]
    pub threads: Option<usize>,
    /// Directory for Weingarten tables.
    #[arg(long, global = true, env = "HAARGP_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Histogram bins.
    #[arg(long, global = true, env = "HAARGP_BINS")]
    pub bins: Option<usize>,
    /// Measurement shots `N` for the predictive model.
    #[arg(long, global = true, env = "HAARGP_SHOTS")]
    pub shots: Option<u64>,
    /// Label `y` for the loss bound.
    #[arg(long, global = true, env = "HAARGP_LABEL", allow_hyphen_values = true)]
    pub label: Option<f64>,
    /// JSON file with any of the options above (kebab-case keys).
    #[arg(long, global = true, env = "HAARGP_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Options {
    /// Fills unset fields from `other`.
    fn or(self, other: Options) -> Options {
        Options {
            group: self.group.or(other.group),
            qubits: self.qubits.or(other.qubits),
            dim: self.dim.or(other.dim),
            samples: self.samples.or(other.samples),
            seed: self.seed.or(other.seed),
            order: self.order.or(other.order),
            states: self.states.or(other.states),
            observable: self.observable.or(other.observable),
            mode: self.mode.or(other.mode),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            threads: self.threads.or(other.threads),
            cache_dir: self.cache_dir.or(other.cache_dir),
            bins: self.bins.or(other.bins),
            shots: self.shots.or(other.shots),
            label: self.label.or(other.label),
            config: self.config.or(other.config),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub groups: Vec<Group>,
    pub qubits: Option<usize>,
    pub d: u64,
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    pub states: Option<String>,
    pub observable: String,
    pub mode: Mode,
    pub out: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub bins: usize,
    pub shots: u64,
    pub label: f64,
}

struct Defaults {
    group: GroupChoice,
    qubits: usize,
    samples: usize,
    order: usize,
    mode: Mode,
    bins: usize,
}

fn defaults(command: Command) -> Defaults {
    let base = Defaults {
        group: GroupChoice::Unitary,
        qubits: 10,
        samples: 10_000,
        order: 8,
        mode: Mode::Asymptotic,
        bins: 50,
    };
    match command {
        Command::Figure3 => Defaults {
            group: GroupChoice::Both,
            ..base
        },
        Command::Figure2 => Defaults {
            qubits: 12,
            order: 2,
            bins: 30,
            ..base
        },
        Command::VerifyMoments => Defaults {
            group: GroupChoice::Both,
            qubits: 3,
            samples: 100_000,
            order: 4,
            mode: Mode::Exact,
            ..base
        },
        Command::Predictive => Defaults {
            qubits: 16,
            order: 2,
            ..base
        },
        Command::Tails => Defaults {
            qubits: 8,
            samples: 100_000,
            order: 6,
            mode: Mode::Asymptotic,
            ..base
        },
    }
}

impl ExperimentConfig {
    pub fn resolve(command: Command, options: Options) -> Result<Self> {
        let file = match &options.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str::<Options>(&text)
                    .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?
            }
            None => Options::default(),
        };
        let o = options.or(file);
        let def = defaults(command);
        let (qubits, d) = match (o.qubits, o.dim) {
            (Some(_), Some(_)) => return Err(Error::InvalidArgument("give --qubits or --dim, not both".into())),
            (Some(n), None) => {
                if n == 0 || n > 40 {
                    return Err(Error::InvalidArgument(format!("unsupported qubit count {n}")));
                }
                (Some(n), 1u64 << n)
            }
            (None, Some(d)) => {
                let q = d.is_power_of_two().then(|| d.trailing_zeros() as usize);
                (q.filter(|&q| q > 0), d)
            }
            (None, None) => (Some(def.qubits), 1u64 << def.qubits),
        };
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} must be at least 2")));
        }
        let samples = o.samples.unwrap_or(def.samples);
        if samples == 0 {
            return Err(Error::InvalidArgument("--samples must be ≥ 1".into()));
        }
        let order = o.order.unwrap_or(def.order);
        if order == 0 {
            return Err(Error::InvalidArgument("--order must be ≥ 1".into()));
        }
        let bins = o.bins.unwrap_or(def.bins);
        if bins == 0 {
            return Err(Error::InvalidArgument("--bins must be ≥ 1".into()));
        }
        let shots = o.shots.unwrap_or(100);
        if shots == 0 {
            return Err(Error::InvalidArgument("--shots must be ≥ 1".into()));
        }
        let label = o.label.unwrap_or(0.5);
        if !(-1.0..=1.0).contains(&label) {
            return Err(Error::InvalidArgument(format!("--label {label} outside [-1, 1]")));
        }
        if o.threads == Some(0) {
            return Err(Error::InvalidArgument("--threads must be ≥ 1".into()));
        }
        Ok(ExperimentConfig {
            command,
            groups: o.group.unwrap_or(def.group).groups(),
            qubits,
            d,
            samples,
            seed: o.seed.unwrap_or(0),
            order,
            states: o.states,
            observable: o.observable.unwrap_or_else(|| "Z1".into()),
            mode: o.mode.unwrap_or(def.mode),
            out: o.out.unwrap_or_else(|| PathBuf::from("out")),
            format: o.format.unwrap_or_default(),
            threads: o.threads,
            cache_dir: o.cache_dir,
            bins,
            shots,
            label,
        })
    }

    fn qubits_required(&self) -> Result<usize> {
        self.qubits.ok_or_else(|| {
            Error::InvalidArgument(format!("sampling needs a power-of-two dimension, got {}", self.d))
        })
    }

    fn observable(&self) -> Result<PauliObservable> {
        PauliObservable::parse(&self.observable, self.qubits_required()?)
    }

    fn dataset(&self, spec: &str, real: bool) -> Result<Dataset> {
        parse_dataset_spec(spec, self.qubits_required()?, self.seed, real)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<Group> for Cell {
    fn from(g: Group) -> Self {
        Cell::Text(g.as_str().into())
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell of the first row whose `key` column equals `value`.
    pub fn lookup(&self, key: &str, value: &str, column: &str) -> Option<&Cell> {
        let k = self.column(key)?;
        let c = self.column(column)?;
        self.rows
            .iter()
            .find(|r| matches!(&r[k], Cell::Text(s) if s == value) || r[k].csv() == value)
            .map(|r| &r[c])
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(&self.header).map_err(|e| Error::io(path, e))?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let map: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| (h.clone(), serde_json::to_value(c).unwrap_or(serde_json::Value::Null)))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    fn new(command: Command) -> Self {
        Report {
            command,
            pass: true,
            checks: Vec::new(),
            files: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Writer<'a> {
    cfg: &'a ExperimentConfig,
    started: Instant,
}

impl Writer<'_> {
    fn metadata(&self, table: &str) -> serde_json::Value {
        serde_json::json!({
            "command": self.cfg.command,
            "table": table,
            "config": self.cfg,
            "seed": self.cfg.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
        })
    }

    fn write(&self, report: &mut Report, table: Table) -> Result<()> {
        let dir = &self.cfg.out;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let meta = self.metadata(&table.name);
        match self.cfg.format {
            Format::Csv => {
                let path = dir.join(format!("{}.csv", table.name));
                table.write_csv(&path)?;
                let side = dir.join(format!("{}.meta.json", table.name));
                write_json(&side, &meta)?;
                report.files.push(path);
                report.files.push(side);
            }
            Format::Json => {
                let path = dir.join(format!("{}.json", table.name));
                write_json(&path, &serde_json::json!({ "metadata": meta, "rows": table.to_json() }))?;
                report.files.push(path);
            }
        }
        report.tables.push(table);
        Ok(())
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn labels(ds: &Dataset) -> Vec<String> {
    ds.labels.clone()
}

pub fn cmd_figure3(cfg: &ExperimentConfig) -> Result<Report> {
    let w = Writer {
        cfg,
        started: Instant::now(),
    };
    let mut report = Report::new(Command::Figure3);
    let obs = cfg.observable()?;
    let d = cfg.d;
    for &group in &cfg.groups {
        let ds = cfg.dataset(cfg.states.as_deref().unwrap_or("zero"), group == Group::Orthogonal)?;
        let state = &ds.states[..1];
        let batch = sample_outputs(state, &ds.labels[..1], &obs, group, cfg.samples, cfg.seed)?;
        let values = batch.column(0);
        let sigma = output_sigma(d, group)?;
        let tag = format!("figure3_{}", group.as_str());

        if cfg.format == Format::Csv {
            std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
            let path = cfg.out.join(format!("{tag}_samples.csv"));
            batch.write_csv(&path)?;
            let side = cfg.out.join(format!("{tag}_samples.meta.json"));
            batch.write_sidecar(&side)?;
            report.files.extend([path, side]);
        }

        let hist = histogram(&values, cfg.bins, Some(sigma))?;
        let mut t = Table::new(format!("{tag}_hist"), &["bin_lo", "bin_hi", "center", "count", "density", "gaussian"]);
        for i in 0..hist.bins() {
            let (a, b) = (hist.edges[i], hist.edges[i + 1]);
            let model = hist.model.as_ref().map_or(f64::NAN, |m| m[i]);
            t.push(row![a, b, 0.5 * (a + b), hist.counts[i], hist.densities[i], model]);
        }
        w.write(&mut report, t)?;

        let batches = DEFAULT_BATCHES.min(cfg.samples / 2).max(2);
        let mut t = Table::new(
            format!("{tag}_moments"),
            &["k", "moment", "moment_se", "gaussian_moment", "ratio", "ratio_se", "reference"],
        );
        let var = sigma * sigma;
        for k in (2..=cfg.order.max(2)).step_by(2) {
            let (m, m_se) = raw_moment_with_se(&values, k, batches)?;
            let ratio = moment_ratio_with_se(&values, k, batches)?;
            let reference = gaussian_reference(k) as f64;
            t.push(row![
                k,
                m,
                m_se,
                reference * var.powi(k as i32 / 2),
                ratio.value,
                ratio.se.unwrap_or(f64::NAN),
                reference
            ]);
        }
        w.write(&mut report, t)?;

        let emp_var = values.iter().map(|x| x * x).sum::<f64>() / values.len() as f64;
        let rel = (emp_var / var - 1.0).abs();
        report.check(
            format!("{} variance", group.as_str()),
            rel <= 0.05,
            format!("E[C^2] = {emp_var:e}, model {var:e}, relative error {rel:.4}"),
        );
        let verdict = gaussianity(&values, batches)?;
        let detail = verdict
            .ratios
            .iter()
            .map(|r| format!("k={}: {:.4} ± {:.4} (ref {})", r.k, r.value, r.se.unwrap_or(f64::NAN), r.reference))
            .collect::<Vec<_>>()
            .join("; ");
        report.check(format!("{} gaussianity", group.as_str()), verdict.gaussian, detail);
    }
    Ok(report)
}

pub fn cmd_figure2(cfg: &ExperimentConfig) -> Result<Report> {
    let w = Writer {
        cfg,
        started: Instant::now(),
    };
    let mut report = Report::new(Command::Figure2);
    let obs = cfg.observable()?;
    let specs: Vec<String> = match &cfg.states {
        Some(s) => vec![s.clone()],
        None => vec!["ghz-pair".into(), "epsilon-pair".into()],
    };
    for &group in &cfg.groups {
        for spec in &specs {
            let ds = cfg.dataset(spec, group == Group::Orthogonal)?;
            if ds.states.len() < 2 {
                return Err(Error::InvalidArgument(format!("'{spec}' has fewer than two states")));
            }
            let batch = sample_outputs(&ds.states, &labels(&ds), &obs, group, cfg.samples, cfg.seed)?;
            let tag = format!("figure2_{}_{}", group.as_str(), spec.replace([':', ','], "_"));

            let h = histogram2d_batch(&batch, 0, 1, cfg.bins)?;
            let mut t = Table::new(format!("{tag}_hist2d"), &["x", "y", "density"]);
            for (i, r) in h.density.iter().enumerate() {
                let x = 0.5 * (h.x_edges[i] + h.x_edges[i + 1]);
                for (j, v) in r.iter().enumerate() {
                    let y = 0.5 * (h.y_edges[j] + h.y_edges[j + 1]);
                    t.push(row![x, y, *v]);
                }
            }
            w.write(&mut report, t)?;

            let model = match cfg.mode {
                Mode::Exact => covariance_matrix(&ds.overlaps, cfg.d, group, CovarianceMode::Exact)?,
                _ => {
                    let regime = crate::gp_moments::classify_regime(&ds.overlaps, cfg.d);
                    let mode = regime.covariance_mode().unwrap_or(CovarianceMode::Exact);
                    covariance_matrix(&ds.overlaps, cfg.d, group, mode)?
                }
            };
            let est = empirical_covariance(&batch, DEFAULT_BATCHES)?;
            let mut t = Table::new(
                format!("{tag}_covariance"),
                &["row", "column", "covariance", "standard_error", "correlation", "model_covariance", "model_correlation"],
            );
            let m = batch.n_columns();
            for i in 0..m {
                for j in 0..m {
                    let mc = model.get(i, j) / (model.get(i, i) * model.get(j, j)).sqrt();
                    t.push(row![
                        est.labels[i].as_str(),
                        est.labels[j].as_str(),
                        est.covariance[i][j],
                        est.standard_errors[i][j],
                        est.correlation[i][j],
                        model.get(i, j),
                        mc
                    ]);
                    if i < j {
                        let gap = (est.correlation[i][j] - mc).abs();
                        report.check(
                            format!("{} {spec} correlation ({}, {})", group.as_str(), est.labels[i], est.labels[j]),
                            gap <= 0.05,
                            format!("empirical {:.4}, model {mc:.4}", est.correlation[i][j]),
                        );
                    }
                }
            }
            w.write(&mut report, t)?;
        }
    }
    Ok(report)
}

fn product_samples(batch: &crate::haar::SampleBatch, assignment: &[usize]) -> Vec<f64> {
    (0..batch.n_samples)
        .map(|s| {
            let r = batch.row(s);
            assignment.iter().map(|&a| r[a]).product()
        })
        .collect()
}

pub fn cmd_verify_moments(cfg: &ExperimentConfig) -> Result<Report> {
    let w = Writer {
        cfg,
        started: Instant::now(),
    };
    let mut report = Report::new(Command::VerifyMoments);
    let n = cfg.qubits_required()?;
    let d = cfg.d;
    let obs = cfg.observable()?;
    let mut t = Table::new(
        "verify_moments",
        &[
            "group", "k", "regime", "exact", "asymptotic", "paper_literal", "monte_carlo", "mc_se", "reference", "pass", "note",
        ],
    );
    for &group in &cfg.groups {
        for k in (2..=cfg.order.max(2)).step_by(2) {
            let mut regimes: Vec<(&str, Vec<PureState>, Vec<usize>)> = vec![
                ("same-state", vec![PureState::basis(d as usize, 0)?], vec![0; k]),
                ("ghz-pair", vec![PureState::basis(d as usize, 0)?, PureState::ghz(n)?], (0..k).map(|i| i % 2).collect()),
            ];
            if k as u64 <= d {
                regimes.push((
                    "orthogonal-states",
                    (0..k).map(|i| PureState::basis(d as usize, i)).collect::<Result<_>>()?,
                    (0..k).collect(),
                ));
            }
            for (name, states, assignment) in regimes {
                let g = crate::haar::overlaps_of(&states)?;
                let exact = exact_moment(&MomentSpec {
                    group,
                    d,
                    assignment: &assignment,
                    overlaps: &g,
                })?
                .re;
                let (asymptotic, literal) = match name {
                    "orthogonal-states" => (
                        orthogonal_states_moment(k, d, group, SignMode::Isserlis)?,
                        orthogonal_states_moment(k, d, group, SignMode::PaperLiteral)?,
                    ),
                    _ => {
                        let v = crate::gp_moments::asymptotic_moment_pairings(&g, &assignment, d, group)?;
                        (v, v)
                    }
                };
                let labels: Vec<String> = (0..states.len()).map(|i| format!("s{i}")).collect();
                let batch = sample_outputs(&states, &labels, &obs, group, cfg.samples, cfg.seed)?;
                let prod = product_samples(&batch, &assignment);
                let batches = DEFAULT_BATCHES.min(cfg.samples / 2).max(2);
                let (mc, se) = batch_means(&prod, batches, |v| Ok(v.iter().sum::<f64>() / v.len() as f64))?;
                let reference = match cfg.mode {
                    Mode::Exact => Some(exact),
                    Mode::Asymptotic => Some(asymptotic),
                    Mode::PaperLiteral => Some(literal),
                    Mode::Mc => None,
                };
                let pass = reference.is_none_or(|r| (mc - r).abs() <= 4.0 * se);
                let mut notes = Vec::new();
                if literal != 0.0 && exact != 0.0 && literal.signum() != exact.signum() {
                    notes.push("paper-literal sign differs from exact");
                }
                let note = notes.join("; ");
                report.check(
                    format!("{} k={k} {name}", group.as_str()),
                    pass,
                    format!("mc {mc:e} ± {se:e}, reference {:e}", reference.unwrap_or(f64::NAN)),
                );
                t.push(row![
                    group,
                    k,
                    name,
                    exact,
                    asymptotic,
                    literal,
                    mc,
                    se,
                    reference.unwrap_or(f64::NAN),
                    pass,
                    note
                ]);
            }
        }
    }
    w.write(&mut report, t)?;
    Ok(report)
}

/// `m` training states with pairwise `Tr[ρρ'] = 1/2` and a new state with the
/// same overlap to each.
fn half_overlap_kernel(m: usize, d: u64, group: Group, kernel: KernelMode, shots: u64) -> Result<(GPModel, Vec<f64>, f64)> {
    let h = 0.5f64.sqrt();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { h }).collect())
        .collect();
    let g = InnerProductMatrix::<Complex64>::from_real(rows)?;
    let gp = GPModel::from_overlaps(&g, d, group, kernel, Some(shots))?;
    let (cross, prior) = gp.extend(&vec![0.5; m], 1.0)?;
    Ok((gp, cross, prior))
}

pub fn cmd_predictive(cfg: &ExperimentConfig) -> Result<Report> {
    let w = Writer {
        cfg,
        started: Instant::now(),
    };
    let mut report = Report::new(Command::Predictive);
    let kernel = match cfg.mode {
        Mode::Exact => KernelMode::Exact,
        _ => KernelMode::Asymptotic,
    };
    let m = 4;
    let mut t = Table::new(
        "predictive",
        &[
            "group", "ladder", "d", "shots", "m", "mean", "variance", "prior_variance", "mean_shift", "variance_shift",
            "relative_variance_reduction", "mean_shift_bound", "variance_shift_bound", "polylog_regime",
        ],
    );
    let d0 = cfg.d;
    let mut grid: Vec<(&str, u64, u64)> = vec![("config", d0, cfg.shots)];
    grid.extend([10u64, 100, 1000].map(|n| ("shots", d0, n)));
    grid.extend((10..=18).step_by(2).map(|e| ("dimension", 1u64 << e, cfg.shots)));
    grid.push(("shots-equal-d", d0, d0));
    for &group in &cfg.groups {
        for &(ladder, d, shots) in &grid {
            let (gp, cross, prior) = half_overlap_kernel(m, d, group, kernel, shots)?;
            let y = vec![1.0; m];
            let r = triviality_report(&gp, &y, &cross, prior)?;
            report.check(
                format!("{} {ladder} d={d} N={shots} bounds hold", group.as_str()),
                r.mean_shift <= r.mean_shift_bound && r.variance_shift <= r.variance_shift_bound * (1.0 + 1e-9),
                format!(
                    "mean shift {:e} ≤ {:e}, variance shift {:e} ≤ {:e}",
                    r.mean_shift, r.mean_shift_bound, r.variance_shift, r.variance_shift_bound
                ),
            );
            t.push(row![
                group,
                ladder,
                d,
                shots,
                m,
                r.predictive.mean,
                r.predictive.variance,
                r.predictive.prior_variance,
                r.mean_shift,
                r.variance_shift,
                r.relative_variance_reduction,
                r.mean_shift_bound,
                r.variance_shift_bound,
                r.polylog_regime
            ]);
        }
    }
    w.write(&mut report, t)?;
    Ok(report)
}

pub fn cmd_tails(cfg: &ExperimentConfig) -> Result<Report> {
    let w = Writer {
        cfg,
        started: Instant::now(),
    };
    let mut report = Report::new(Command::Tails);
    let d = cfg.d;
    let obs = cfg.observable()?;
    let mut t = Table::new(
        "tails",
        &["group", "quantity", "kind", "t", "c", "d", "bound", "empirical", "empirical_se", "sound", "paper_literal"],
    );
    for &group in &cfg.groups {
        let ds = cfg.dataset(cfg.states.as_deref().unwrap_or("zero"), group == Group::Orthogonal)?;
        let batch = sample_outputs(&ds.states[..1], &ds.labels[..1], &obs, group, cfg.samples, cfg.seed)?;
        let values = batch.column(0);
        let sigma = output_sigma(d, group)?;
        for mult in [1.0, 2.0, 3.0, 4.0] {
            let c = mult * sigma;
            let emp = tail_frequency(&values, c)?;
            for b in output_bounds(c, d, group)? {
                let sound = b.value >= emp.frequency - 4.0 * emp.se;
                let tt = b.params.get("t").copied().unwrap_or(f64::NAN);
                report.check(
                    format!("{} output {} t={tt} c={mult}σ", group.as_str(), b.kind.as_str()),
                    sound,
                    format!("bound {:e}, empirical {:e} ± {:e}", b.value, emp.frequency, emp.se),
                );
                t.push(row![
                    group,
                    "output",
                    b.kind.as_str(),
                    tt,
                    c,
                    d,
                    b.value,
                    emp.frequency,
                    emp.se,
                    sound,
                    if group == Group::Unitary { paper_literal_tail(c, d)? } else { f64::NAN }
                ]);
            }
            if mult == 2.0 || mult == 3.0 {
                let g = gaussian_tail(c, sigma)?;
                report.check(
                    format!("{} gaussian tail matches at c={mult}σ", group.as_str()),
                    (g - emp.frequency).abs() <= 4.0 * emp.se,
                    format!("gaussian {g:e}, empirical {:e} ± {:e}", emp.frequency, emp.se),
                );
            }
        }

        let y = cfg.label;
        let loss: Vec<f64> = values.iter().map(|c| (c - y) * (c - y)).collect();
        let mean_loss = y * y + sigma * sigma;
        let deviations: Vec<f64> = loss.iter().map(|l| l - mean_loss).collect();
        for mult in [2.0, 5.0, 10.0, 20.0] {
            let c = mult / d as f64;
            let emp = tail_frequency(&deviations, c)?;
            let b = loss_bound(c, y, d, group)?;
            let sound = b.value >= emp.frequency - 4.0 * emp.se;
            report.check(
                format!("{} loss c={mult}/d", group.as_str()),
                sound,
                format!("bound {:e}, empirical {:e} ± {:e}", b.value, emp.frequency, emp.se),
            );
            t.push(row![group, "loss", "loss", f64::NAN, c, d, b.value, emp.frequency, emp.se, sound, f64::NAN]);
        }

        if group == Group::Unitary {
            let grads = parameter_shift_gradient_samples(&ds.states[0], &obs, group, cfg.samples, cfg.seed ^ 0x9e37)?;
            let gv = grads.column(0);
            for mult in [1.0, 2.0, 4.0, 6.0] {
                let c = mult * sigma;
                let emp = tail_frequency(&gv, c)?;
                let b = gradient_bound(c, d)?;
                let sound = b.value >= emp.frequency - 4.0 * emp.se;
                report.check(
                    format!("gradient union c={mult}σ"),
                    sound,
                    format!("bound {:e}, empirical {:e} ± {:e}", b.value, emp.frequency, emp.se),
                );
                t.push(row![
                    group,
                    "gradient",
                    b.kind.as_str(),
                    f64::NAN,
                    c,
                    d,
                    b.value,
                    emp.frequency,
                    emp.se,
                    sound,
                    b.params["paper_literal"]
                ]);
            }
        }
    }
    w.write(&mut report, t)?;
    Ok(report)
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<Report> {
    if let Some(dir) = &cfg.cache_dir {
        TableCache::global().set_dir(Some(dir.clone()));
    }
    let go = || match cfg.command {
        Command::Figure3 => cmd_figure3(cfg),
        Command::Figure2 => cmd_figure2(cfg),
        Command::VerifyMoments => cmd_verify_moments(cfg),
        Command::Predictive => cmd_predictive(cfg),
        Command::Tails => cmd_tails(cfg),
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(go),
        None => go(),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => exit::IO,
        Error::Capacity { .. }
        | Error::MemoryGuard { .. }
        | Error::SingularGram { .. }
        | Error::SingularKernel
        | Error::DegenerateMoment => exit::RESOURCE,
        _ => exit::USAGE,
    }
}

/// Parses arguments, runs the command and prints a JSON summary to stdout.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let result = ExperimentConfig::resolve(cli.command, cli.options).and_then(|cfg| run_config(&cfg));
    match result {
        Ok(report) => {
            match serde_json::to_string_pretty(&report) {
                Ok(s) => println!("{s}"),
                Err(e) => eprintln!("error: {e}"),
            }
            if report.pass {
                exit::OK
            } else {
                for f in report.failures() {
                    eprintln!("FAIL {}: {}", f.name, f.detail);
                }
                exit::CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
