//! Experiment orchestration: TOML specs, dispatch to the module experiments, result files and
//! plot data.
//!
//! A spec file looks like
//!
//! ```toml
//! kind = "exponent_sweep"
//! seed = 3
//! tier = "smoke"
//! out = "results"
//!
//! [params]
//! law = "radial"
//! ```
//!
//! Parameters form a flat table per kind. Unset keys take the kind's defaults, adjusted by the
//! tier preset; unknown keys are rejected.

mod data;
mod kinds;

use crate::error::{Error, Result};
use crate::util::write_atomic;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use toml::{Table, Value};

pub use data::{band_data, packet_data};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// 64^2 space, about 64 time samples.
    Smoke,
    /// 256^2 space, about 256 time samples.
    Desk,
    /// The kind's defaults, meant to be overridden key by key.
    Heavy,
}

impl std::str::FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tier> {
        match s.trim() {
            "smoke" => Ok(Tier::Smoke),
            "desk" => Ok(Tier::Desk),
            "heavy" => Ok(Tier::Heavy),
            other => Err(Error::Config(format!("unknown tier `{other}`; expected smoke, desk or heavy"))),
        }
    }
}

macro_rules! kinds {
    ($($v:ident => $s:literal),* $(,)?) => {
        /// One experiment per report- or sweep-producing operation.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Kind { $($v),* }

        impl Kind {
            pub const ALL: &'static [Kind] = &[$(Kind::$v),*];

            pub fn name(&self) -> &'static str {
                match self { $(Kind::$v => $s),* }
            }
        }
    };
}

kinds! {
    AssumptionReport => "assumption_report",
    DispersiveDecay => "dispersive_decay",
    L2Constant => "l2_constant",
    ExponentSweep => "exponent_sweep",
    SharpnessSweep => "sharpness_sweep",
    WavePackets => "wave_packets",
    BushExperiment => "bush_experiment",
    VariationOracle => "variation_oracle",
    AtomTransference => "atom_transference",
    DiracIdentities => "dirac_identities",
    ResonanceMinimum => "resonance_minimum",
    NullConstant => "null_constant",
    NullformMultiplier => "nullform_multiplier",
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL.iter().copied().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
            Error::Config(format!("unknown kind `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// Declarative experiment definition; `params` holds the keys as written by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub seed: u64,
    pub out: PathBuf,
    pub tier: Tier,
    pub params: Table,
}

const TOP_KEYS: [&str; 5] = ["kind", "seed", "out", "tier", "params"];

impl ExperimentSpec {
    pub fn new(kind: Kind, seed: u64, out: impl Into<PathBuf>, tier: Tier) -> Self {
        ExperimentSpec { kind, seed, out: out.into(), tier, params: Table::new() }
    }

    /// Parses and validates a spec; every problem found is listed in the error.
    pub fn parse(text: &str) -> Result<Self> {
        let top: Table = text.parse().map_err(|e: toml::de::Error| Error::Validation(vec![e.to_string().trim().to_string()]))?;
        let mut items = vec![];
        for k in top.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                items.push(format!("unknown key `{k}`"));
            }
        }
        let kind = match top.get("kind") {
            Some(Value::String(s)) => match s.parse::<Kind>() {
                Ok(k) => Some(k),
                Err(e) => {
                    items.push(e.to_string().trim_start_matches("config error: ").to_string());
                    None
                }
            },
            Some(_) => {
                items.push("key `kind` must be a string".into());
                None
            }
            None => {
                items.push("missing key `kind`".into());
                None
            }
        };
        let seed = match top.get("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => {
                items.push("key `seed` must be a non-negative integer".into());
                0
            }
        };
        let out = match top.get("out") {
            None => PathBuf::from("results"),
            Some(Value::String(s)) => PathBuf::from(s),
            Some(_) => {
                items.push("key `out` must be a string".into());
                PathBuf::new()
            }
        };
        let tier = match top.get("tier") {
            None => Tier::Smoke,
            Some(Value::String(s)) => s.parse().unwrap_or_else(|e: Error| {
                items.push(e.to_string().trim_start_matches("config error: ").to_string());
                Tier::Smoke
            }),
            Some(_) => {
                items.push("key `tier` must be a string".into());
                Tier::Smoke
            }
        };
        let params = match top.get("params") {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => {
                items.push("key `params` must be a table".into());
                Table::new()
            }
        };
        if let Some(kind) = kind {
            let spec = ExperimentSpec { kind, seed, out, tier, params };
            if let Err(Error::Validation(more)) = spec.resolved_params() {
                items.extend(more);
            }
            if items.is_empty() {
                return Ok(spec);
            }
        }
        Err(Error::Validation(items))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The full parameter table: kind defaults, then the tier preset, then the user keys.
    pub fn resolved_params(&self) -> Result<Table> {
        kinds::resolve(self.kind, self.tier, &self.params).map_err(Error::Validation)
    }

    /// Applies `RLAB_TIER` when it is set.
    pub fn apply_env_tier(&mut self) -> Result<()> {
        if let Ok(t) = std::env::var("RLAB_TIER") {
            self.tier = t.parse()?;
        }
        Ok(())
    }

    fn stem(&self) -> String {
        format!("{}_s{}", self.kind.name(), self.seed)
    }
}

/// A pass/fail check `lo <= value <= hi`; a missing or non-finite value fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: &str, value: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let ok = value.is_finite() && lo.is_none_or(|l| value >= l) && hi.is_none_or(|h| value <= h);
        Verdict { name: name.into(), value: value.is_finite().then_some(value), lo, hi, pass: ok }
    }

    pub fn at_most(name: &str, value: f64, hi: f64) -> Self {
        Self::new(name, value, None, Some(hi))
    }

    pub fn at_least(name: &str, value: f64, lo: f64) -> Self {
        Self::new(name, value, Some(lo), None)
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self::new(name, value, Some(target - tol), Some(target + tol))
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Some(1.0), None)
    }

    pub fn describe(&self) -> String {
        let v = self.value.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
        let range = match (self.lo, self.hi) {
            (Some(l), Some(h)) => format!("in [{l:.6e}, {h:.6e}]"),
            (Some(l), None) => format!(">= {l:.6e}"),
            (None, Some(h)) => format!("<= {h:.6e}"),
            (None, None) => String::new(),
        };
        format!("{} {} = {v} {range}", if self.pass { "PASS" } else { "FAIL" }, self.name)
    }
}

/// A sampled curve for log-log plotting, with its fitted line `y = e^intercept x^slope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl Series {
    pub fn fitted(name: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        let fit = crate::util::fit::loglog_fit(&x, &y).ok();
        Series { name: name.into(), slope: fit.as_ref().map(|f| f.slope), intercept: fit.map(|f| f.intercept), x, y }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// Resolved parameters actually used.
    pub params: Table,
    pub version: String,
    pub metrics: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
    pub series: Vec<Series>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

/// Everything an experiment reports, before it is persisted.
#[derive(Default)]
pub(crate) struct Outcome {
    metrics: BTreeMap<String, f64>,
    labels: BTreeMap<String, String>,
    series: Vec<Series>,
    verdicts: Vec<Verdict>,
    tables: Vec<(String, Vec<String>, Vec<Vec<String>>)>,
    notes: Vec<String>,
}

impl Outcome {
    pub(crate) fn metric(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.metrics.insert(name.into(), v);
        } else {
            self.notes.push(format!("metric {name} is not finite ({v})"));
        }
    }

    pub(crate) fn label(&mut self, name: &str, v: impl Into<String>) {
        self.labels.insert(name.into(), v.into());
    }

    pub(crate) fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub(crate) fn series(&mut self, s: Series) {
        self.series.push(s);
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// A CSV artifact named `<kind>_s<seed>_<name>.csv`.
    pub(crate) fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) {
        self.tables.push((name.into(), header.iter().map(|s| s.to_string()).collect(), rows));
    }
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Validates, dispatches, and writes `<out>/<kind>_s<seed>.json` plus any CSV artifacts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let params = spec.resolved_params()?;
    let start = Instant::now();
    let mut out = Outcome::default();
    kinds::run(spec.kind, &params, spec.seed, &mut out)
        .map_err(|e| Error::Run { context: format!("{} (seed {})", spec.kind.name(), spec.seed), source: Box::new(e) })?;
    let wall = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(&spec.out).map_err(|e| Error::Io(format!("{}: {e}", spec.out.display())))?;
    let stem = spec.stem();
    let mut artifacts = vec![];
    for (name, header, rows) in &out.tables {
        let path = spec.out.join(format!("{stem}_{name}.csv"));
        write_atomic(&path, &csv_bytes(header, rows)?)?;
        artifacts.push(path);
    }
    let json = spec.out.join(format!("{stem}.json"));
    artifacts.push(json.clone());
    let result = ExperimentResult {
        spec: spec.clone(),
        params,
        version: env!("CARGO_PKG_VERSION").into(),
        passed: out.verdicts.iter().all(|v| v.pass),
        metrics: out.metrics,
        labels: out.labels,
        series: out.series,
        verdicts: out.verdicts,
        wall_clock_seconds: wall,
        artifacts,
        notes: out.notes,
    };
    let text = serde_json::to_string_pretty(&result).map_err(|e| Error::Io(e.to_string()))?;
    write_atomic(&json, text.as_bytes())?;
    Ok(result)
}

pub fn read_result(path: &Path) -> Result<ExperimentResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Loglog,
    Table,
}

/// Writes plot data under the result's output directory and returns the file path.
///
/// `loglog` writes `series,x,y,fit` for every series with at least two points; `table` writes
/// the scalar metrics as `metric,value`.
pub fn emit_plot_data(result: &ExperimentResult, kind: PlotKind) -> Result<PathBuf> {
    let (name, header, rows): (&str, Vec<String>, Vec<Vec<String>>) = match kind {
        PlotKind::Loglog => {
            let mut rows = vec![];
            for s in result.series.iter().filter(|s| s.x.len() >= 2) {
                for (x, y) in s.x.iter().zip(&s.y) {
                    let fit = match (s.slope, s.intercept) {
                        (Some(a), Some(b)) => format!("{}", (b + a * x.ln()).exp()),
                        _ => String::new(),
                    };
                    rows.push(vec![s.name.clone(), x.to_string(), y.to_string(), fit]);
                }
            }
            if rows.is_empty() {
                return Err(Error::MissingSeries(format!("{} result has no series to plot", result.spec.kind.name())));
            }
            ("loglog", vec!["series".into(), "x".into(), "y".into(), "fit".into()], rows)
        }
        PlotKind::Table => {
            if result.metrics.is_empty() {
                return Err(Error::MissingSeries("result has no metrics".into()));
            }
            let rows = result.metrics.iter().map(|(k, v)| vec![k.clone(), v.to_string()]).collect();
            ("table", vec!["metric".into(), "value".into()], rows)
        }
    };
    std::fs::create_dir_all(&result.spec.out)?;
    let path = result.spec.out.join(format!("{}_{name}.csv", result.spec.stem()));
    write_atomic(&path, &csv_bytes(&header, &rows)?)?;
    Ok(path)
}

#[derive(Parser)]
#[command(name = "rlab", version, about = "Run, validate and plot workbench experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment; exits 1 when any verdict fails.
    Run {
        spec: PathBuf,
        /// Worker threads for independent sweep points.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a spec file without running it.
    Validate { spec: PathBuf },
    /// Write plot data for a result file.
    Plot {
        result: PathBuf,
        #[arg(long, value_enum, default_value = "loglog")]
        kind: PlotKind,
    },
}

fn load(path: &Path) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_file(path)?;
    spec.apply_env_tier()?;
    spec.resolved_params()?;
    Ok(spec)
}

fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Run { spec, jobs, seed, out } => {
            let mut spec = load(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(o) = out {
                spec.out = o;
            }
            let result = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?
                    .install(|| run_experiment(&spec))?,
                None => run_experiment(&spec)?,
            };
            for v in &result.verdicts {
                println!("{}", v.describe());
            }
            for n in &result.notes {
                println!("note: {n}");
            }
            println!("wrote {}", result.artifacts.last().map(|p| p.display().to_string()).unwrap_or_default());
            Ok(result.passed)
        }
        Cmd::Validate { spec } => {
            let s = load(&spec)?;
            println!("{}: valid {} spec (tier {:?})", spec.display(), s.kind.name(), s.tier);
            Ok(true)
        }
        Cmd::Plot { result, kind } => {
            let path = emit_plot_data(&read_result(&result)?, kind)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}

/// Command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
