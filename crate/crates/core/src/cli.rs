//! Command-line front end and the JSON model-file format.
//!
//! A model file is a JSON object:
//!
//! ```json
//! {
//!   "p": 2, "d": 2,
//!   "x0": [0, 0], "A": [1, 2],
//!   "B": [[-1, 0.5], [0, -2]],
//!   "sigma": [[1, 0], [0, 1]],
//!   "labels": ["X1", "X2"],
//!   "interventions": [{"on": "X2", "value": 0.5}]
//! }
//! ```
//!
//! `labels` and `interventions` are optional; `on` is a label or a 1-based
//! index. Every command applies the file's interventions, then any `--set`
//! flags, before doing its work.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed input or arguments,
//! 3 inconsistent dimensions, 4 intervention failure, 5 analysis precondition
//! not met (for example no stationary distribution).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::dependence_graph;
use crate::matkit::Matrix;
use crate::model::{intervene_seq, intervene_seq_with_record, Intervention, InterventionRecord, OuModel};
use crate::simulate::{
    coupled_paths, path_stats, simulate_paths_recorded, Method, PathBundle, PathStats, Record, TimeGrid,
};
use crate::stability::{classify, screen_principal_submatrices, DEFAULT_SUBSET_BUDGET, DEFAULT_TOL};
use crate::stationary::{stationary_distribution, stationary_exists, Verdict};

pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_INTERVENTION: i32 = 4;
pub const EXIT_ANALYSIS: i32 = 5;

/// A failed command: exit code plus message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DimensionMismatch { .. } | Error::NonFiniteEntry { .. } | Error::DuplicateLabel(_) => {
                EXIT_DIMENSION
            }
            Error::BadCoordinate { .. }
            | Error::UnknownLabel(_)
            | Error::SingularReducedMatrix { .. }
            | Error::DuplicateIntervention { .. } => EXIT_INTERVENTION,
            Error::EmptyGrid | Error::NonPositiveSteps { .. } => EXIT_PARSE,
            _ => EXIT_ANALYSIS,
        };
        let name = match &e {
            Error::SingularReducedMatrix { .. } => "SingularReducedMatrix: ",
            Error::DuplicateIntervention { .. } => "DuplicateIntervention: ",
            Error::NoStationaryDistribution(_) => "NoStationaryDistribution: ",
            _ => "",
        };
        CliError::new(code, format!("{name}{e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Coordinate reference: a label or a 1-based index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordinateRef {
    Index(usize),
    Label(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionSpec {
    pub on: CoordinateRef,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedEntry {
    pub label: String,
    pub value: f64,
}

/// Serialised [`InterventionRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordJson {
    pub original_labels: Vec<String>,
    pub fixed: Vec<FixedEntry>,
    pub surviving: Vec<String>,
}

impl From<&InterventionRecord> for RecordJson {
    fn from(r: &InterventionRecord) -> Self {
        Self {
            original_labels: r.original_labels().to_vec(),
            fixed: r
                .fixed()
                .into_iter()
                .map(|(label, value)| FixedEntry { label, value })
                .collect(),
            surviving: r
                .surviving()
                .iter()
                .map(|&i| r.original_labels()[i].clone())
                .collect(),
        }
    }
}

/// JSON model file, keys in emission order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub p: usize,
    pub d: usize,
    pub x0: Vec<f64>,
    #[serde(rename = "A")]
    pub level: Vec<f64>,
    #[serde(rename = "B")]
    pub speed: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interventions: Option<Vec<InterventionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention_record: Option<RecordJson>,
}

fn dim_err(key: &'static str, expected: impl ToString, found: impl ToString) -> CliError {
    Error::DimensionMismatch {
        key,
        expected: expected.to_string(),
        found: found.to_string(),
    }
    .into()
}

fn matrix_from(key: &'static str, rows: &[Vec<f64>], n_rows: usize, n_cols: usize) -> CliResult<Matrix> {
    if rows.len() != n_rows {
        return Err(dim_err(key, format!("{n_rows} rows"), format!("{} rows", rows.len())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
        return Err(dim_err(
            key,
            format!("{n_cols} columns"),
            format!("{} columns in row {}", r.len(), i + 1),
        ));
    }
    Matrix::from_rows(rows).map_err(|_| dim_err(key, format!("{n_rows}x{n_cols}"), "empty matrix"))
}

impl ModelFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::new(EXIT_PARSE, format!("invalid model file: {e}")))
    }

    /// Validated model as written in the file, before any intervention.
    pub fn model(&self) -> CliResult<OuModel> {
        let (p, d) = (self.p, self.d);
        if p == 0 {
            return Err(dim_err("p", "at least 1", 0));
        }
        if d == 0 {
            return Err(dim_err("d", "at least 1", 0));
        }
        if self.x0.len() != p {
            return Err(dim_err("x0", p, self.x0.len()));
        }
        if self.level.len() != p {
            return Err(dim_err("A", p, self.level.len()));
        }
        let speed = matrix_from("B", &self.speed, p, p)?;
        let sigma = matrix_from("sigma", &self.sigma, p, d)?;
        let mut model = OuModel::new(self.x0.clone(), self.level.clone(), speed, sigma)?;
        if let Some(labels) = &self.labels {
            model = model.with_labels(labels.iter().cloned())?;
        }
        Ok(model)
    }

    /// Record carried by the file, or a fresh one over its labels.
    pub fn record(&self, model: &OuModel) -> CliResult<InterventionRecord> {
        let Some(r) = &self.intervention_record else {
            return Ok(InterventionRecord::identity(model.labels()));
        };
        let fixed: Vec<(String, f64)> = r.fixed.iter().map(|f| (f.label.clone(), f.value)).collect();
        let rec = InterventionRecord::from_parts(r.original_labels.clone(), &fixed)
            .map_err(|e| CliError::new(EXIT_DIMENSION, format!("invalid `intervention_record`: {e}")))?;
        let surviving: Vec<&String> = rec.surviving().iter().map(|&i| &rec.original_labels()[i]).collect();
        if surviving.iter().map(|s| s.as_str()).ne(model.labels().iter().map(|s| s.as_str())) {
            return Err(dim_err(
                "intervention_record",
                format!("surviving labels {:?}", model.labels()),
                format!("{surviving:?}"),
            ));
        }
        Ok(rec)
    }

    /// Serialises a model; `record` is attached when given.
    pub fn from_model(model: &OuModel, record: Option<&InterventionRecord>) -> Self {
        Self {
            p: model.p(),
            d: model.d(),
            x0: model.x0().to_vec(),
            level: model.level().to_vec(),
            speed: model.speed().to_rows(),
            sigma: model.sigma().to_rows(),
            labels: Some(model.labels().to_vec()),
            interventions: None,
            intervention_record: record.map(RecordJson::from),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files serialise");
        s.push('\n');
        s
    }
}

/// A model file together with the interventions requested for it.
pub struct LoadedModel {
    /// The model exactly as written in the file.
    pub base: OuModel,
    pub base_record: InterventionRecord,
    /// Requested interventions as (label, value), file entries first.
    pub requested: Vec<(String, f64)>,
}

impl LoadedModel {
    /// Applies every requested intervention.
    pub fn intervened(&self) -> CliResult<(OuModel, InterventionRecord)> {
        let ivs = self
            .requested
            .iter()
            .map(|(label, c)| {
                let orig = self
                    .base_record
                    .original_index(label)
                    .ok_or_else(|| CliError::from(Error::UnknownLabel(label.clone())))?;
                Ok(Intervention::new(orig + 1, *c))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(intervene_seq_with_record(&self.base, self.base_record.clone(), &ivs)?)
    }

    /// Requested interventions as coordinates of the base model.
    pub fn base_interventions(&self) -> CliResult<Vec<Intervention>> {
        self.requested
            .iter()
            .map(|(label, c)| {
                let m = self.base.coordinate_of(label).ok_or_else(|| {
                    if self.base_record.original_index(label).is_some() {
                        CliError::from(Error::DuplicateIntervention { label: label.clone() })
                    } else {
                        CliError::from(Error::UnknownLabel(label.clone()))
                    }
                })?;
                Ok(Intervention::new(m, *c))
            })
            .collect()
    }
}

fn resolve_ref(model: &OuModel, on: &CoordinateRef) -> CliResult<String> {
    match on {
        CoordinateRef::Label(l) => Ok(l.clone()),
        CoordinateRef::Index(i) => {
            if *i == 0 || *i > model.p() {
                Err(Error::BadCoordinate { m: *i, p: model.p() }.into())
            } else {
                Ok(model.labels()[i - 1].clone())
            }
        }
    }
}

/// Parses `LABEL=VALUE` (or `INDEX=VALUE`).
fn parse_set(s: &str) -> CliResult<(CoordinateRef, f64)> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| CliError::new(EXIT_PARSE, format!("--set expects LABEL=VALUE, got {s:?}")))?;
    let value: f64 = rhs
        .trim()
        .parse()
        .map_err(|_| CliError::new(EXIT_PARSE, format!("--set {s:?}: {rhs:?} is not a number")))?;
    if !value.is_finite() {
        return Err(CliError::new(EXIT_PARSE, format!("--set {s:?}: value must be finite")));
    }
    let lhs = lhs.trim();
    let on = match lhs.parse::<usize>() {
        Ok(i) => CoordinateRef::Index(i),
        Err(_) => CoordinateRef::Label(lhs.to_string()),
    };
    Ok((on, value))
}

pub fn load_model(path: &Path, sets: &[String]) -> CliResult<LoadedModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    load_model_str(&text, sets)
}

pub fn load_model_str(text: &str, sets: &[String]) -> CliResult<LoadedModel> {
    let file = ModelFile::parse(text)?;
    let base = file.model()?;
    let base_record = file.record(&base)?;
    let mut requested = Vec::new();
    for spec in file.interventions.iter().flatten() {
        requested.push((resolve_ref(&base, &spec.on)?, spec.value));
    }
    for s in sets {
        let (on, value) = parse_set(s)?;
        requested.push((resolve_ref(&base, &on)?, value));
    }
    Ok(LoadedModel {
        base,
        base_record,
        requested,
    })
}

#[derive(Parser, Debug)]
#[command(name = "ou-intervene", version, about = "Interventions in Ornstein-Uhlenbeck SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Euler,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimensions, stability, controllability and the stationary law.
    Describe {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Apply interventions and print the reduced model file.
    Intervene {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
    },
    /// Stationary mean and covariance as JSON.
    Stationary {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
    },
    /// Stability classification as CSV.
    Stability {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
        /// Also classify principal submatrices.
        #[arg(long)]
        submatrices: bool,
        /// Largest removal set when screening submatrices (default p - 1).
        #[arg(long)]
        max_removed: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Dependence graph of the mean reversion speed.
    Graph {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
        /// Graphviz output instead of a CSV edge list.
        #[arg(long)]
        dot: bool,
        /// Keep pinned nodes, dropping only their incoming edges.
        #[arg(long)]
        keep_pinned: bool,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Simulate paths (CSV) or their terminal statistics (JSON).
    Simulate {
        model: PathBuf,
        #[arg(long = "set", value_name = "LABEL=VALUE")]
        set: Vec<String>,
        /// Final time.
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to exact, or euler with --coupled.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        stats_only: bool,
        /// Simulate original and intervened processes on shared noise.
        #[arg(long)]
        coupled: bool,
    },
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                0
            } else {
                let _ = err.write_all(text.as_bytes());
                EXIT_PARSE
            };
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return EXIT_IO;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cmd: Command) -> CliResult<String> {
    match cmd {
        Command::Describe { model, set, tol } => cmd_describe(&load_model(&model, &set)?, tol),
        Command::Intervene { model, set } => cmd_intervene(&load_model(&model, &set)?),
        Command::Stationary { model, set } => cmd_stationary(&load_model(&model, &set)?),
        Command::Stability {
            model,
            set,
            submatrices,
            max_removed,
            tol,
        } => cmd_stability(&load_model(&model, &set)?, submatrices, max_removed, tol),
        Command::Graph {
            model,
            set,
            dot,
            keep_pinned,
            tol,
        } => cmd_graph(&load_model(&model, &set)?, dot, keep_pinned, tol),
        Command::Simulate {
            model,
            set,
            t,
            steps,
            paths,
            seed,
            method,
            stats_only,
            coupled,
        } => {
            let opts = SimulateOptions {
                t,
                steps,
                paths,
                seed,
                method: method.map(|m| match m {
                    MethodArg::Exact => Method::Exact,
                    MethodArg::Euler => Method::Euler,
                }),
                stats_only,
                coupled,
            };
            cmd_simulate(&load_model(&model, &set)?, &opts)
        }
    }
}

#[derive(Serialize)]
struct LawJson {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialise");
    s.push('\n');
    s
}

pub fn cmd_describe(loaded: &LoadedModel, tol: f64) -> CliResult<String> {
    #[derive(Serialize)]
    struct StabilityJson {
        classification: &'static str,
        spectral_abscissa: f64,
    }
    #[derive(Serialize)]
    struct Describe {
        p: usize,
        d: usize,
        labels: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        intervention_record: Option<RecordJson>,
        stability: StabilityJson,
        controllability_rank: usize,
        sigma_full_column_span: bool,
        stationarity: &'static str,
        stationary: Option<LawJson>,
    }
    if !(tol > 0.0) {
        return Err(CliError::new(EXIT_PARSE, "--tol must be positive"));
    }
    let (model, record) = loaded.intervened()?;
    let report = classify(model.speed(), tol);
    let verdict = stationary_exists(&model);
    let stationary = if verdict.verdict == Verdict::Exists {
        let law = stationary_distribution(&model)?;
        Some(LawJson {
            mean: law.mean,
            cov: law.cov.to_rows(),
        })
    } else {
        None
    };
    Ok(pretty(&Describe {
        p: model.p(),
        d: model.d(),
        labels: model.labels().to_vec(),
        intervention_record: (!record.fixed().is_empty()).then(|| RecordJson::from(&record)),
        stability: StabilityJson {
            classification: report.classification.as_str(),
            spectral_abscissa: report.spectral_abscissa,
        },
        controllability_rank: verdict.controllability_rank,
        sigma_full_column_span: verdict.sigma_full_column_span,
        stationarity: verdict.verdict.as_str(),
        stationary,
    }))
}

pub fn cmd_intervene(loaded: &LoadedModel) -> CliResult<String> {
    let (model, record) = loaded.intervened()?;
    Ok(ModelFile::from_model(&model, Some(&record)).to_json())
}

pub fn cmd_stationary(loaded: &LoadedModel) -> CliResult<String> {
    let (model, _) = loaded.intervened()?;
    let law = stationary_distribution(&model)?;
    Ok(pretty(&LawJson {
        mean: law.mean,
        cov: law.cov.to_rows(),
    }))
}

fn format_set(removed: &[usize]) -> String {
    let inner: Vec<String> = removed.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", inner.join(" "))
}

pub fn cmd_stability(
    loaded: &LoadedModel,
    submatrices: bool,
    max_removed: Option<usize>,
    tol: f64,
) -> CliResult<String> {
    if !(tol > 0.0) {
        return Err(CliError::new(EXIT_PARSE, "--tol must be positive"));
    }
    let (model, _) = loaded.intervened()?;
    let p = model.p();
    let k = if submatrices {
        max_removed.unwrap_or(p.saturating_sub(1))
    } else {
        0
    };
    let screen = screen_principal_submatrices(model.speed(), k, tol, DEFAULT_SUBSET_BUDGET)?;
    let mut out = String::from("removed_set,classification,abscissa\n");
    for e in &screen.entries {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_set(&e.removed),
            e.report.classification,
            e.report.spectral_abscissa
        );
    }
    Ok(out)
}

pub fn cmd_graph(loaded: &LoadedModel, dot: bool, keep_pinned: bool, tol: f64) -> CliResult<String> {
    if !(tol >= 0.0) {
        return Err(CliError::new(EXIT_PARSE, "--tol must be non-negative"));
    }
    let graph = if keep_pinned {
        let ivs = loaded.base_interventions()?;
        // Surface intervention errors even though the reduced model is unused.
        intervene_seq(&loaded.base, &ivs)?;
        ivs.iter()
            .fold(dependence_graph(&loaded.base, tol), |g, iv| g.with_intervention(iv.m))
    } else {
        dependence_graph(&loaded.intervened()?.0, tol)
    };
    if dot {
        return Ok(graph.to_dot());
    }
    let mut out = String::from("from,to\n");
    for (f, t) in graph.labeled_edges() {
        let _ = writeln!(out, "{f},{t}");
    }
    Ok(out)
}

/// Options of the `simulate` command.
#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub t: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub method: Option<Method>,
    pub stats_only: bool,
    pub coupled: bool,
}

#[derive(Serialize)]
struct StatsJson {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    mean_se: Vec<f64>,
}

impl From<PathStats> for StatsJson {
    fn from(s: PathStats) -> Self {
        Self {
            mean: s.mean,
            cov: s.cov.to_rows(),
            mean_se: s.mean_se,
        }
    }
}

fn write_row(out: &mut String, path: usize, t: f64, cols: &[&[f64]]) {
    let _ = write!(out, "{path},{t}");
    for c in cols {
        for v in *c {
            let _ = write!(out, ",{v}");
        }
    }
    out.push('\n');
}

pub fn cmd_simulate(loaded: &LoadedModel, o: &SimulateOptions) -> CliResult<String> {
    if o.paths < 1 {
        return Err(CliError::new(EXIT_PARSE, "--paths must be at least 1"));
    }
    if o.steps < 1 {
        return Err(CliError::new(EXIT_PARSE, "--steps must be at least 1"));
    }
    if !(o.t > 0.0) || !o.t.is_finite() {
        return Err(CliError::new(EXIT_PARSE, "--t must be a positive number"));
    }
    if o.stats_only && o.paths < 2 {
        return Err(CliError::new(EXIT_PARSE, "--stats-only needs --paths >= 2"));
    }
    let grid = TimeGrid::uniform(o.t, o.steps)?;
    let record = if o.stats_only { Record::Endpoints } else { Record::All };

    if o.coupled {
        if o.method == Some(Method::Exact) {
            return Err(CliError::new(EXIT_PARSE, "--coupled simulates with the Euler scheme"));
        }
        let ivs = loaded.base_interventions()?;
        if ivs.is_empty() {
            return Err(CliError::new(EXIT_PARSE, "--coupled needs at least one intervention"));
        }
        let run = coupled_paths(&loaded.base, &ivs, &grid, o.paths, o.seed, record)?;
        let diff = run.difference();
        if o.stats_only {
            #[derive(Serialize)]
            struct Coupled {
                t: f64,
                paths: usize,
                labels: Vec<String>,
                original: StatsJson,
                difference: StatsJson,
            }
            let last = run.original.grid().len() - 1;
            return Ok(pretty(&Coupled {
                t: o.t,
                paths: o.paths,
                labels: run.original.labels().to_vec(),
                original: path_stats(&run.original, last)?.into(),
                difference: path_stats(&diff, last)?.into(),
            }));
        }
        let mut out = String::from("path,t");
        for l in run.original.labels() {
            let _ = write!(out, ",{l}");
        }
        for i in 1..=run.original.dim() {
            let _ = write!(out, ",D{i}");
        }
        out.push('\n');
        for i in 0..o.paths {
            for (k, &t) in grid.times().iter().enumerate() {
                write_row(&mut out, i, t, &[run.original.value(i, k), diff.value(i, k)]);
            }
        }
        return Ok(out);
    }

    let (model, _) = loaded.intervened()?;
    let method = o.method.unwrap_or(Method::Exact);
    let bundle = simulate_paths_recorded(&model, &grid, o.paths, o.seed, method, record)?;
    if o.stats_only {
        #[derive(Serialize)]
        struct Stats {
            t: f64,
            paths: usize,
            labels: Vec<String>,
            #[serde(flatten)]
            stats: StatsJson,
        }
        let last = bundle.grid().len() - 1;
        return Ok(pretty(&Stats {
            t: o.t,
            paths: o.paths,
            labels: bundle.labels().to_vec(),
            stats: path_stats(&bundle, last)?.into(),
        }));
    }
    Ok(bundle_csv(&bundle))
}

/// `path,t,<labels>` rows for every path and recorded time.
pub fn bundle_csv(bundle: &PathBundle) -> String {
    let mut out = String::from("path,t");
    for l in bundle.labels() {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for i in 0..bundle.n_paths() {
        for (k, &t) in bundle.grid().times().iter().enumerate() {
            write_row(&mut out, i, t, &[bundle.value(i, k)]);
        }
    }
    out
}
