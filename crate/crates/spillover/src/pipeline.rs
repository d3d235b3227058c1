//! Configuration, orchestration, and file outputs.
//!
//! Three entry points mirror the CLI subcommands:
//!
//! - [`run_static`]: full-sample VAR -> FEVD -> spillover tables (overall
//!   and per frequency band) -> networks with centrality rankings.
//! - [`run_dynamic`]: time-varying VAR -> per-month spillover measures,
//!   total and per band.
//! - [`run_diagnostics`]: descriptive statistics, normality and unit-root
//!   tests, and the correlation matrix.
//!
//! Every run writes its outputs plus a `run_report.json` with the resolved
//! settings, per-stage timings, a SHA-256 manifest of the written files,
//! and any per-month gaps skipped during a dynamic run. CSV numbers are
//! written with six decimals; JSON numbers keep full precision. Output
//! bytes are deterministic for a given input and configuration, except for
//! the timing section of the report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::connectedness::{gfevd, spillover_summary, ConnectednessError, SpilloverSummary};
use crate::diagnostics::{
    adf_test, correlation_matrix, descriptive_stats, jarque_bera, kpss_test, pp_test, za_test,
    DiagnosticsError, TestResult,
};
use crate::frequency::{
    band_summary, default_bands, spectral_gfevd, validate_partition, FrequencyBand,
    FrequencyError, DEFAULT_GRID_SIZE,
};
use crate::ingest::{align, load_csv, to_log_returns, IngestError, ReturnPanel};
use crate::network::{
    betweenness_centrality, build_network, closeness_centrality, degree_centrality,
    eigenvector_centrality, CentralityRanking, SpilloverNetwork,
};
use crate::tvpvar::{fit_tvp, TvpConfig, TvpError};
use crate::var::{fit_ols, select_lag_aic, VarError};

/// Error category, mapped to the process exit code by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or arguments (exit code 1).
    Config,
    /// Unreadable, malformed, or insufficient data (exit code 2).
    Data,
    /// Estimation or decomposition failure (exit code 3).
    Numerical,
}

#[derive(Debug)]
pub struct PipelineError {
    pub kind: ErrorKind,
    pub stage: String,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

impl PipelineError {
    fn config(stage: &str, message: impl fmt::Display) -> Self {
        PipelineError {
            kind: ErrorKind::Config,
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }

    fn data(stage: &str, message: impl fmt::Display) -> Self {
        PipelineError {
            kind: ErrorKind::Data,
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }

    fn numerical(stage: &str, message: impl fmt::Display) -> Self {
        PipelineError {
            kind: ErrorKind::Numerical,
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }
}

fn ingest_error(stage: &str, e: IngestError) -> PipelineError {
    PipelineError::data(stage, e)
}

fn var_error(stage: &str, e: VarError) -> PipelineError {
    match e {
        VarError::ZeroLag => PipelineError::config(stage, e),
        VarError::InsufficientData { .. } => PipelineError::data(stage, e),
        _ => PipelineError::numerical(stage, e),
    }
}

fn connectedness_error(stage: &str, e: ConnectednessError) -> PipelineError {
    match e {
        ConnectednessError::ZeroHorizon => PipelineError::config(stage, e),
        _ => PipelineError::numerical(stage, e),
    }
}

fn frequency_error(stage: &str, e: FrequencyError) -> PipelineError {
    match e {
        FrequencyError::UnstableModel(_) => PipelineError::numerical(stage, e),
        _ => PipelineError::config(stage, e),
    }
}

fn tvp_error(stage: &str, e: TvpError) -> PipelineError {
    match e {
        TvpError::InvalidConfig(_) => PipelineError::config(stage, e),
        TvpError::InsufficientData { .. } => PipelineError::data(stage, e),
        TvpError::Var(inner) => var_error(stage, inner),
        _ => PipelineError::numerical(stage, e),
    }
}

fn diagnostics_error(stage: &str, e: DiagnosticsError) -> PipelineError {
    match e {
        DiagnosticsError::SingularRegression(_) => PipelineError::numerical(stage, e),
        DiagnosticsError::InvalidArgument(_) => PipelineError::config(stage, e),
        _ => PipelineError::data(stage, e),
    }
}

/// Lag-order choice: a fixed order or AIC selection up to a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LagSpec {
    Fixed(usize),
    Aic { max_lag: usize },
}

pub const DEFAULT_MAX_LAG: usize = 4;

impl Default for LagSpec {
    fn default() -> Self {
        LagSpec::Aic { max_lag: DEFAULT_MAX_LAG }
    }
}

impl LagSpec {
    /// Parses a CLI value: a positive integer or `aic`.
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.eq_ignore_ascii_case("aic") {
            return Ok(LagSpec::default());
        }
        match text.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(LagSpec::Fixed(n)),
            _ => Err(format!("lag must be a positive integer or \"aic\", got {text:?}")),
        }
    }
}

impl<'de> Deserialize<'de> for LagSpec {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Fixed(usize),
            Keyword(String),
            Aic { aic: usize },
        }
        match Raw::deserialize(deserializer)? {
            Raw::Fixed(n) if n >= 1 => Ok(LagSpec::Fixed(n)),
            Raw::Fixed(n) => Err(serde::de::Error::custom(format!(
                "lag must be at least 1, got {n}"
            ))),
            Raw::Keyword(s) => {
                LagSpec::parse(&s).map_err(serde::de::Error::custom)
            }
            Raw::Aic { aic } if aic >= 1 => Ok(LagSpec::Aic { max_lag: aic }),
            Raw::Aic { aic } => Err(serde::de::Error::custom(format!(
                "aic bound must be at least 1, got {aic}"
            ))),
        }
    }
}

/// One frequency band, in radians or as a month-period range.
/// `{"label", "lower", "upper"}` gives bounds in radians per month;
/// `{"label", "min_months", "max_months"}` gives the cycle-period range,
/// with `max_months` omitted or null meaning unbounded (frequency zero).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BandSpec {
    Radians { label: String, lower: f64, upper: f64 },
    Months {
        label: String,
        min_months: f64,
        #[serde(default)]
        max_months: Option<f64>,
    },
}

impl BandSpec {
    pub fn to_band(&self) -> Result<FrequencyBand, PipelineError> {
        match self {
            BandSpec::Radians { label, lower, upper } => {
                FrequencyBand::new(label, *lower, *upper)
                    .map_err(|e| PipelineError::config("bands", e))
            }
            BandSpec::Months { label, min_months, max_months } => {
                if !min_months.is_finite() || *min_months < 1.0 {
                    return Err(PipelineError::config(
                        "bands",
                        format!("min_months must be at least 1, got {min_months}"),
                    ));
                }
                let upper = std::f64::consts::PI / min_months;
                let lower = match max_months {
                    None => 0.0,
                    Some(max) if *max > *min_months => std::f64::consts::PI / max,
                    Some(max) => {
                        return Err(PipelineError::config(
                            "bands",
                            format!("max_months {max} must exceed min_months {min_months}"),
                        ))
                    }
                };
                FrequencyBand::new(label, lower, upper)
                    .map_err(|e| PipelineError::config("bands", e))
            }
        }
    }
}

/// Time-varying-model settings; the lag order comes from `lag`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TvpSettings {
    pub kappa1: f64,
    pub kappa2: f64,
    pub prior_window: usize,
    pub prior_scale: f64,
}

impl Default for TvpSettings {
    fn default() -> Self {
        let base = TvpConfig::default();
        TvpSettings {
            kappa1: base.kappa1,
            kappa2: base.kappa2,
            prior_window: base.prior_window,
            prior_scale: base.prior_scale,
        }
    }
}

fn default_date_column() -> String {
    "date".to_string()
}

fn default_horizon() -> usize {
    12
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Run configuration, read from JSON. Only `input` is required.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// CSV of monthly price levels, or several to be date-aligned.
    pub input: Vec<PathBuf>,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    /// Subset and order of series to analyze; default is all columns.
    #[serde(default)]
    pub series: Option<Vec<String>>,
    #[serde(default)]
    pub lag: LagSpec,
    /// Forecast horizon for the variance decomposition, in months.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// DFT grid size; default max(1024, 2 x horizon).
    #[serde(default)]
    pub dft_size: Option<usize>,
    /// Frequency bands; default short/medium/long (1-4, 4-12, 12+ months).
    #[serde(default)]
    pub bands: Option<Vec<BandSpec>>,
    #[serde(default)]
    pub tvp: TvpSettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Recorded in the run report; the pipeline itself draws no randomness.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl AnalysisConfig {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| {
            PipelineError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let config: AnalysisConfig = serde_json::from_str(text)
            .map_err(|e| PipelineError::config("config", e))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if self.input.is_empty() {
            return Err(PipelineError::config("config", "no input files"));
        }
        if self.horizon == 0 {
            return Err(PipelineError::config("config", "horizon must be at least 1"));
        }
        if let Some(series) = &self.series {
            if series.is_empty() {
                return Err(PipelineError::config("config", "series list is empty"));
            }
        }
        if let Some(bands) = &self.bands {
            if bands.is_empty() {
                return Err(PipelineError::config("config", "band list is empty"));
            }
        }
        Ok(())
    }

    fn resolved_bands(&self) -> Result<Vec<FrequencyBand>, PipelineError> {
        let bands = match &self.bands {
            None => default_bands(),
            Some(specs) => specs
                .iter()
                .map(|s| s.to_band())
                .collect::<Result<Vec<_>, _>>()?,
        };
        validate_partition(&bands).map_err(|e| PipelineError::config("bands", e))?;
        Ok(bands)
    }
}

#[derive(Debug, Serialize)]
pub struct BandInfo {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    pub months: String,
}

#[derive(Debug, Serialize)]
pub struct TvpInfo {
    pub kappa1: f64,
    pub kappa2: f64,
    pub lag_order: usize,
    pub prior_window: usize,
    pub prior_scale: f64,
    /// First month with output, after the prior window.
    pub start_date: String,
}

#[derive(Debug, Serialize)]
pub struct ResolvedSettings {
    pub input: Vec<String>,
    pub date_column: String,
    pub series: Vec<String>,
    /// Return observations after the log transform and alignment.
    pub n_obs: usize,
    pub sample_start: String,
    pub sample_end: String,
    pub lag: usize,
    pub lag_selection: String,
    pub horizon: usize,
    pub dft_size: usize,
    pub bands: Vec<BandInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tvp: Option<TvpInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// A month skipped during a dynamic run, with the failing stage and cause.
#[derive(Debug, Serialize)]
pub struct GapRecord {
    pub date: String,
    pub stage: String,
    pub reason: String,
}

/// Summary of one run: settings as resolved, stage timings, an output
/// manifest (excluding the report itself), and dynamic gaps.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub mode: String,
    pub settings: ResolvedSettings,
    pub timing: Vec<StageTiming>,
    pub outputs: Vec<OutputRecord>,
    pub gaps: Vec<GapRecord>,
}

/// Collects written files and their digests under one output directory.
struct OutputWriter {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputWriter {
    fn new(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| {
            PipelineError::data("write", format!("cannot create {}: {e}", dir.display()))
        })?;
        Ok(OutputWriter { dir: dir.to_path_buf(), records: Vec::new() })
    }

    fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| {
                PipelineError::data("write", format!("cannot create {}: {e}", parent.display()))
            })?;
        }
        fs::write(&path, bytes).map_err(|e| {
            PipelineError::data("write", format!("cannot write {}: {e}", path.display()))
        })?;
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.records.push(OutputRecord {
            path: relative.to_string(),
            bytes: bytes.len(),
            sha256,
        });
        Ok(())
    }
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_bytes(rows: &[Vec<String>]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(row).expect("in-memory csv write");
    }
    writer.into_inner().expect("in-memory csv flush")
}

/// Tracks wall-clock time per stage.
struct Stopwatch {
    timings: Vec<StageTiming>,
    current: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        Stopwatch { timings: Vec::new(), current: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: now.duration_since(self.current).as_secs_f64(),
        });
        self.current = now;
    }
}

struct Prepared {
    panel: ReturnPanel,
    lag: usize,
    lag_selection: String,
    bands: Vec<FrequencyBand>,
    dft_size: usize,
}

fn prepare(config: &AnalysisConfig, watch: &mut Stopwatch) -> Result<Prepared, PipelineError> {
    let mut panels = Vec::with_capacity(config.input.len());
    for path in &config.input {
        panels.push(load_csv(path, &config.date_column).map_err(|e| ingest_error("ingest", e))?);
    }
    let prices = if panels.len() == 1 {
        panels.into_iter().next().expect("one panel")
    } else {
        align(&panels).map_err(|e| ingest_error("ingest", e))?
    };
    let mut panel = to_log_returns(&prices).map_err(|e| ingest_error("ingest", e))?;
    if let Some(series) = &config.series {
        panel = panel.select(series).map_err(|e| ingest_error("ingest", e))?;
    }
    watch.lap("ingest");

    let (lag, lag_selection) = match config.lag {
        LagSpec::Fixed(n) => (n, "fixed".to_string()),
        LagSpec::Aic { max_lag } => {
            let chosen = select_lag_aic(&panel, max_lag)
                .map_err(|e| var_error("lag selection", e))?;
            (chosen, format!("aic(max_lag={max_lag})"))
        }
    };
    watch.lap("lag selection");

    let bands = config.resolved_bands()?;
    let dft_size = config
        .dft_size
        .unwrap_or_else(|| DEFAULT_GRID_SIZE.max(2 * config.horizon));
    Ok(Prepared { panel, lag, lag_selection, bands, dft_size })
}

fn resolved_settings(
    config: &AnalysisConfig,
    prepared: &Prepared,
    tvp: Option<TvpInfo>,
) -> ResolvedSettings {
    ResolvedSettings {
        input: config.input.iter().map(|p| p.display().to_string()).collect(),
        date_column: config.date_column.clone(),
        series: prepared.panel.names().to_vec(),
        n_obs: prepared.panel.n_obs(),
        sample_start: prepared.panel.dates()[0].to_string(),
        sample_end: prepared.panel.dates()[prepared.panel.n_obs() - 1].to_string(),
        lag: prepared.lag,
        lag_selection: prepared.lag_selection.clone(),
        horizon: config.horizon,
        dft_size: prepared.dft_size,
        bands: prepared
            .bands
            .iter()
            .map(|b| BandInfo {
                label: b.label().to_string(),
                lower: b.lower(),
                upper: b.upper(),
                months: b.month_range(),
            })
            .collect(),
        tvp,
        seed: config.seed,
    }
}

/// Spillover-table rows for one block: the share matrix in percent with a
/// FROM column, then a To row carrying the block TSI, then a Net row.
fn table_block_rows(
    names: &[String],
    shares: &nalgebra::DMatrix<f64>,
    summary: &SpilloverSummary,
    prefix: Option<&str>,
) -> Vec<Vec<String>> {
    let m = names.len();
    let mut rows = Vec::with_capacity(m + 2);
    for i in 0..m {
        let mut row = Vec::with_capacity(m + 3);
        if let Some(label) = prefix {
            row.push(label.to_string());
        }
        row.push(names[i].clone());
        for j in 0..m {
            row.push(fmt6(100.0 * shares[(i, j)]));
        }
        row.push(fmt6(summary.from[i]));
        rows.push(row);
    }
    let mut to_row = Vec::with_capacity(m + 3);
    if let Some(label) = prefix {
        to_row.push(label.to_string());
    }
    to_row.push("To".to_string());
    for j in 0..m {
        to_row.push(fmt6(summary.to[j]));
    }
    to_row.push(fmt6(summary.tsi));
    rows.push(to_row);
    let mut net_row = Vec::with_capacity(m + 3);
    if let Some(label) = prefix {
        net_row.push(label.to_string());
    }
    net_row.push("Net".to_string());
    for j in 0..m {
        net_row.push(fmt6(summary.net[j]));
    }
    net_row.push(String::new());
    rows.push(net_row);
    rows
}

#[derive(Serialize)]
struct NodeJson {
    id: String,
    net: f64,
    role: &'static str,
}

#[derive(Serialize)]
struct EdgeJson {
    source: String,
    target: String,
    weight: f64,
}

#[derive(Serialize)]
struct CentralityEntry {
    /// Scores aligned with the node list.
    scores: Vec<f64>,
    /// Node names by descending score, ties in node order.
    ranking: Vec<String>,
}

#[derive(Serialize)]
struct CentralityJson {
    degree: CentralityEntry,
    closeness: CentralityEntry,
    betweenness: CentralityEntry,
    /// Null when the network has no edges or the iteration fails.
    eigenvector: Option<CentralityEntry>,
}

#[derive(Serialize)]
struct NetworkJson {
    band: Option<String>,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    centrality: CentralityJson,
}

fn centrality_entry(ranking: CentralityRanking) -> CentralityEntry {
    CentralityEntry { scores: ranking.scores, ranking: ranking.ranking }
}

fn network_json(network: &SpilloverNetwork) -> NetworkJson {
    let nodes = network
        .names
        .iter()
        .zip(network.net.iter())
        .map(|(name, net)| NodeJson {
            id: name.clone(),
            net: *net,
            role: if *net > 0.0 {
                "transmitter"
            } else if *net < 0.0 {
                "receiver"
            } else {
                "neutral"
            },
        })
        .collect();
    let edges = network
        .edges
        .iter()
        .map(|e| EdgeJson {
            source: network.names[e.source].clone(),
            target: network.names[e.target].clone(),
            weight: e.weight,
        })
        .collect();
    NetworkJson {
        band: network.band.clone(),
        nodes,
        edges,
        centrality: CentralityJson {
            degree: centrality_entry(degree_centrality(network)),
            closeness: centrality_entry(closeness_centrality(network)),
            betweenness: centrality_entry(betweenness_centrality(network)),
            eigenvector: eigenvector_centrality(network).ok().map(centrality_entry),
        },
    }
}

fn finish(
    mut writer: OutputWriter,
    mode: &str,
    settings: ResolvedSettings,
    mut watch: Stopwatch,
    gaps: Vec<GapRecord>,
) -> Result<RunReport, PipelineError> {
    watch.lap("write");
    let mut report = RunReport {
        mode: mode.to_string(),
        settings,
        timing: Vec::new(),
        outputs: Vec::new(),
        gaps,
    };
    std::mem::swap(&mut report.timing, &mut watch.timings);
    std::mem::swap(&mut report.outputs, &mut writer.records);
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serialization");
    bytes.push(b'\n');
    // The report's own digest cannot be part of itself; write it last
    // and drop the extra manifest entry.
    writer.records.clear();
    writer.write("run_report.json", &bytes)?;
    Ok(report)
}

/// Full-sample analysis: writes `fevd.csv`, `spillover_table.csv`, one
/// table per band under `bands/`, `network.json`, and `run_report.json`.
pub fn run_static(config: &AnalysisConfig) -> Result<RunReport, PipelineError> {
    let mut watch = Stopwatch::new();
    let prepared = prepare(config, &mut watch)?;
    let names = prepared.panel.names().to_vec();
    let m = names.len();

    let model = fit_ols(&prepared.panel, prepared.lag).map_err(|e| var_error("var", e))?;
    watch.lap("var");
    let fevd = gfevd(&model, config.horizon).map_err(|e| connectedness_error("fevd", e))?;
    let overall = spillover_summary(&fevd);
    watch.lap("fevd");
    let spectral = spectral_gfevd(&model, config.horizon, &prepared.bands, Some(prepared.dft_size))
        .map_err(|e| frequency_error("frequency", e))?;
    let band_summaries: Vec<SpilloverSummary> = prepared
        .bands
        .iter()
        .map(|b| band_summary(&spectral, b.label()))
        .collect::<Result<_, _>>()
        .map_err(|e| frequency_error("frequency", e))?;
    watch.lap("frequency");

    let mut networks = vec![build_network(&overall)];
    for summary in &band_summaries {
        networks.push(build_network(summary));
    }
    let network_docs: Vec<NetworkJson> = networks.iter().map(network_json).collect();
    watch.lap("network");

    let mut writer = OutputWriter::new(&config.output_dir)?;

    let mut fevd_rows = vec![{
        let mut header = vec!["series".to_string()];
        header.extend(names.iter().cloned());
        header
    }];
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        for j in 0..m {
            row.push(fmt6(100.0 * fevd.normalized()[(i, j)]));
        }
        fevd_rows.push(row);
    }
    writer.write("fevd.csv", &csv_bytes(&fevd_rows))?;

    let mut table_rows = vec![{
        let mut header = vec!["table".to_string(), "series".to_string()];
        header.extend(names.iter().cloned());
        header.push("from".to_string());
        header
    }];
    table_rows.extend(table_block_rows(
        &names,
        fevd.normalized(),
        &overall,
        Some("overall"),
    ));
    for (band, summary) in prepared.bands.iter().zip(&band_summaries) {
        let shares = spectral
            .band_table(band.label())
            .map_err(|e| frequency_error("frequency", e))?;
        table_rows.extend(table_block_rows(&names, shares, summary, Some(band.label())));
    }
    writer.write("spillover_table.csv", &csv_bytes(&table_rows))?;

    for (band, summary) in prepared.bands.iter().zip(&band_summaries) {
        let shares = spectral
            .band_table(band.label())
            .map_err(|e| frequency_error("frequency", e))?;
        let mut rows = vec![{
            let mut header = vec!["series".to_string()];
            header.extend(names.iter().cloned());
            header.push("from".to_string());
            header
        }];
        rows.extend(table_block_rows(&names, shares, summary, None));
        writer.write(&format!("bands/{}_table.csv", band.label()), &csv_bytes(&rows))?;
    }

    let mut network_bytes =
        serde_json::to_vec_pretty(&network_docs).expect("network serialization");
    network_bytes.push(b'\n');
    writer.write("network.json", &network_bytes)?;

    let settings = resolved_settings(config, &prepared, None);
    finish(writer, "static", settings, watch, Vec::new())
}

/// Time-varying analysis: writes `dynamic_tsi.csv`, `dynamic_net.csv`, and
/// `run_report.json`. Months where the filtered model cannot be decomposed
/// are skipped and recorded as gaps.
pub fn run_dynamic(config: &AnalysisConfig) -> Result<RunReport, PipelineError> {
    let mut watch = Stopwatch::new();
    let prepared = prepare(config, &mut watch)?;
    let names = prepared.panel.names().to_vec();
    let m = names.len();

    let tvp_config = TvpConfig {
        kappa1: config.tvp.kappa1,
        kappa2: config.tvp.kappa2,
        lag_order: prepared.lag,
        prior_window: config.tvp.prior_window,
        prior_scale: config.tvp.prior_scale,
    };
    let path = fit_tvp(&prepared.panel, &tvp_config).map_err(|e| tvp_error("tvp", e))?;
    watch.lap("tvp");

    // The prior window is in-sample for the filter; output starts with the
    // first observation beyond it.
    let first_step = tvp_config.prior_window.saturating_sub(tvp_config.lag_order);
    let band_labels: Vec<String> =
        prepared.bands.iter().map(|b| b.label().to_string()).collect();

    let mut tsi_rows = vec![{
        let mut header = vec!["date".to_string(), "total".to_string()];
        header.extend(band_labels.iter().cloned());
        header
    }];
    let mut net_rows = vec![{
        let mut header = vec!["date".to_string()];
        header.extend(names.iter().cloned());
        for label in &band_labels {
            for name in &names {
                header.push(format!("{name}_{label}"));
            }
        }
        header
    }];
    let mut gaps = Vec::new();
    for step in first_step..path.len() {
        let date = path.dates()[step].to_string();
        let model = match path.model_at(step) {
            Ok(model) => model,
            Err(e) => {
                gaps.push(GapRecord { date, stage: "tvp".to_string(), reason: e.to_string() });
                continue;
            }
        };
        let summary = match gfevd(&model, config.horizon) {
            Ok(fevd) => spillover_summary(&fevd),
            Err(e) => {
                gaps.push(GapRecord { date, stage: "fevd".to_string(), reason: e.to_string() });
                continue;
            }
        };
        let spectral = match spectral_gfevd(
            &model,
            config.horizon,
            &prepared.bands,
            Some(prepared.dft_size),
        ) {
            Ok(s) => s,
            Err(e) => {
                gaps.push(GapRecord {
                    date,
                    stage: "frequency".to_string(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let band_summaries: Vec<SpilloverSummary> = match band_labels
            .iter()
            .map(|label| band_summary(&spectral, label))
            .collect::<Result<_, _>>()
        {
            Ok(list) => list,
            Err(e) => {
                gaps.push(GapRecord {
                    date,
                    stage: "frequency".to_string(),
                    reason: e.to_string(),
                });
                continue;
            }
        };

        let mut tsi_row = vec![date.clone(), fmt6(summary.tsi)];
        for band in &band_summaries {
            tsi_row.push(fmt6(band.tsi));
        }
        tsi_rows.push(tsi_row);

        let mut net_row = vec![date];
        for i in 0..m {
            net_row.push(fmt6(summary.net[i]));
        }
        for band in &band_summaries {
            for i in 0..m {
                net_row.push(fmt6(band.net[i]));
            }
        }
        net_rows.push(net_row);
    }
    watch.lap("dynamic fevd");

    let mut writer = OutputWriter::new(&config.output_dir)?;
    writer.write("dynamic_tsi.csv", &csv_bytes(&tsi_rows))?;
    writer.write("dynamic_net.csv", &csv_bytes(&net_rows))?;

    let start_date = path.dates()[first_step.min(path.len() - 1)].to_string();
    let tvp_info = TvpInfo {
        kappa1: tvp_config.kappa1,
        kappa2: tvp_config.kappa2,
        lag_order: tvp_config.lag_order,
        prior_window: tvp_config.prior_window,
        prior_scale: tvp_config.prior_scale,
        start_date,
    };
    let settings = resolved_settings(config, &prepared, Some(tvp_info));
    finish(writer, "dynamic", settings, watch, gaps)
}

/// Diagnostics: writes `diagnostics.csv`, `correlation.csv`, and
/// `run_report.json`.
pub fn run_diagnostics(config: &AnalysisConfig) -> Result<RunReport, PipelineError> {
    let mut watch = Stopwatch::new();
    let prepared = prepare(config, &mut watch)?;
    let panel = &prepared.panel;
    let names = panel.names().to_vec();

    let stats = descriptive_stats(panel).map_err(|e| diagnostics_error("diagnostics", e))?;
    let mut rows = vec![vec![
        "series".to_string(),
        "nobs".to_string(),
        "mean".to_string(),
        "median".to_string(),
        "std_dev".to_string(),
        "skewness".to_string(),
        "kurtosis".to_string(),
        "jarque_bera".to_string(),
        "jarque_bera_rejected_at".to_string(),
        "adf".to_string(),
        "adf_rejected_at".to_string(),
        "pp".to_string(),
        "pp_rejected_at".to_string(),
        "kpss".to_string(),
        "kpss_rejected_at".to_string(),
        "za".to_string(),
        "za_rejected_at".to_string(),
        "za_break_date".to_string(),
    ]];
    let rejected_label = |r: &TestResult| {
        r.rejected_at.map(|l| l.to_string()).unwrap_or_default()
    };
    for (idx, stat) in stats.iter().enumerate() {
        let series = panel.series(idx);
        let jb = jarque_bera(&series, &stat.name)
            .map_err(|e| diagnostics_error("diagnostics", e))?;
        let adf = adf_test(&series, None).map_err(|e| diagnostics_error("diagnostics", e))?;
        let pp = pp_test(&series).map_err(|e| diagnostics_error("diagnostics", e))?;
        let kpss = kpss_test(&series).map_err(|e| diagnostics_error("diagnostics", e))?;
        let za = za_test(&series).map_err(|e| diagnostics_error("diagnostics", e))?;
        let break_date = za
            .nuisance
            .get("break_index")
            .map(|idx| panel.dates()[*idx as usize].to_string())
            .unwrap_or_default();
        rows.push(vec![
            stat.name.clone(),
            stat.n_obs.to_string(),
            fmt6(stat.mean),
            fmt6(stat.median),
            fmt6(stat.std_dev),
            fmt6(stat.skewness),
            fmt6(stat.kurtosis),
            fmt6(jb.statistic),
            rejected_label(&jb),
            fmt6(adf.statistic),
            rejected_label(&adf),
            fmt6(pp.statistic),
            rejected_label(&pp),
            fmt6(kpss.statistic),
            rejected_label(&kpss),
            fmt6(za.statistic),
            rejected_label(&za),
            break_date,
        ]);
    }
    let corr = correlation_matrix(panel).map_err(|e| diagnostics_error("diagnostics", e))?;
    let mut corr_rows = vec![{
        let mut header = vec!["series".to_string()];
        header.extend(names.iter().cloned());
        header
    }];
    for i in 0..names.len() {
        let mut row = vec![names[i].clone()];
        for j in 0..names.len() {
            row.push(fmt6(corr[(i, j)]));
        }
        corr_rows.push(row);
    }
    watch.lap("diagnostics");

    let mut writer = OutputWriter::new(&config.output_dir)?;
    writer.write("diagnostics.csv", &csv_bytes(&rows))?;
    writer.write("correlation.csv", &csv_bytes(&corr_rows))?;

    let settings = resolved_settings(config, &prepared, None);
    finish(writer, "diagnostics", settings, watch, Vec::new())
}
