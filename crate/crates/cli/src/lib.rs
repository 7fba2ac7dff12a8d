//! Command-line front end for the csqvr toolkit.
//!
//! Exit codes: 0 success, 1 validation failure, 2 analysis not computable.

pub mod server;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csqvr::analysis::{analyze, digest_inputs, tables, AnalysisConfig, AnalysisReport};
use csqvr::io::{ingest, write_dataset, IngestError};
use csqvr::psychometrics::{decline_criterion, optimal_cutoff, reliability_report, ReliabilityScheme};
use csqvr::scoring::score_all_variants;
use csqvr::session::{replay_log, SessionStore};
use csqvr::simulate::{simulate_cohort, write_simulation, SimConfig};
use csqvr::stats::{fit_random_intercept, orq_fit, LmmMethod, PlottingPosition};
use csqvr::{items_from_reals, Instrument, Metric, Stage, Timepoint};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_COMPUTABLE: i32 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "csqvr", version, about = "Cybersickness questionnaire scoring and validation toolkit")]
pub struct Cli {
    /// Seed for simulation and session creation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with `simulate` and `analysis` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one questionnaire response.
    Score(ScoreArgs),
    /// Run the full validation pipeline over dataset files.
    Analyze(InputArgs),
    /// Optimal cut-off and AUC for a score column against a 0/1 label column.
    Roc(RocArgs),
    /// Cronbach's alpha table for one instrument in a responses file.
    Reliability(ReliabilityArgs),
    /// Two-SD decline criteria and flags for a dataset.
    Decline(DeclineArgs),
    /// Random-intercept mixed model from a CSV file.
    Lmm(LmmArgs),
    /// Ordered-quantile normalisation of one CSV column.
    Normalize(NormalizeArgs),
    /// Generate a synthetic cohort with ground truth.
    Simulate(SimulateArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
    /// Rebuild a session from its event log.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub instrument: Instrument,
    /// Comma-separated item values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub items: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset directory or individual CSV/JSON files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "score")]
    pub score_column: String,
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    /// A responses.csv file.
    pub file: PathBuf,
    #[arg(long)]
    pub instrument: Instrument,
    /// Restrict to one timepoint; all timepoints when absent.
    #[arg(long)]
    pub timepoint: Option<Timepoint>,
}

#[derive(Debug, Args)]
pub struct DeclineArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Metrics to check; all when absent.
    #[arg(long = "metric")]
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Args)]
pub struct LmmArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub group: String,
    /// Ordered-quantile transform both variables first.
    #[arg(long)]
    pub transform: bool,
    #[arg(long)]
    pub reml: bool,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub column: String,
    /// Use (r - 0.5)/n instead of r/(n + 1).
    #[arg(long)]
    pub hazen: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub participants: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: std::net::SocketAddr,
    /// Directory holding one event log per session.
    #[arg(long, default_value = "sessions")]
    pub store: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub log: PathBuf,
}

/// Contents of `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    pub simulate: SimConfig,
    pub analysis: AnalysisConfig,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let mut message = e.to_string();
        for r in e.rejections() {
            message.push_str(&format!("\n  {r}"));
        }
        Failure::invalid(message)
    }
}

type CmdResult = Result<i32, Failure>;

struct Ctx {
    seed: Option<u64>,
    config: CliConfig,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn write_out(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let dir = self.out.as_ref().expect("checked by caller");
        fs::create_dir_all(dir).map_err(|e| Failure::invalid(format!("{}: {e}", dir.display())))?;
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))
    }

    /// Prints, or writes to `--out/<name>` when an output directory is set.
    fn emit(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        if self.out.is_some() {
            self.write_out(name, bytes)
        } else {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(Failure::invalid)
        }
    }

    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.emit(name, s.as_bytes())
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Named columns of a CSV file as strings.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<String>>, Failure> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(Failure::invalid)?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h.trim() == *n)
                .ok_or_else(|| Failure::invalid(format!("{}: missing column `{n}`", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(Failure::invalid)?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            c.push(rec.get(i).unwrap_or("").trim().to_owned());
        }
    }
    Ok(cols)
}

fn parse_f64(col: &[String], name: &str) -> Result<Vec<f64>, Failure> {
    col.iter()
        .enumerate()
        .map(|(i, s)| s.parse::<f64>().map_err(|_| Failure::invalid(format!("row {}: bad `{name}` value `{s}`", i + 2))))
        .collect()
}

fn parse_label(col: &[String], name: &str) -> Result<Vec<bool>, Failure> {
    col.iter()
        .enumerate()
        .map(|(i, s)| match s.to_ascii_lowercase().as_str() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            _ => Err(Failure::invalid(format!("row {}: bad `{name}` value `{s}`", i + 2))),
        })
        .collect()
}

fn not_computable(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_NOT_COMPUTABLE, message: e.to_string() }
}

fn cmd_score(ctx: &Ctx, a: &ScoreArgs) -> CmdResult {
    let items = items_from_reals(a.instrument, &a.items).map_err(Failure::invalid)?;
    let reports = score_all_variants(a.instrument, &items).map_err(Failure::invalid)?;
    match ctx.format {
        Format::Json => ctx.emit_json("score.json", &reports)?,
        Format::Csv => {
            let rows = reports.iter().flat_map(|r| {
                std::iter::once(("total".to_owned(), r.total))
                    .chain(r.subscales.iter().map(|(k, v)| (k.clone(), *v)))
                    .map(move |(k, v)| vec![r.instrument.to_string(), serde_json::to_value(r.variant).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(), k, v.to_string()])
            });
            ctx.emit("score.csv", &csv_bytes(&["instrument", "variant", "score", "value"], rows))?;
        }
    }
    Ok(EXIT_OK)
}

pub fn run_analysis(inputs: &[PathBuf], config: &AnalysisConfig) -> Result<AnalysisReport, Failure> {
    let data = ingest(inputs)?;
    let digests = digest_inputs(inputs)?;
    let mut report = analyze(&data, config, digests);
    report.provenance.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    Ok(report)
}

fn cmd_analyze(ctx: &Ctx, a: &InputArgs) -> CmdResult {
    let mut config = ctx.config.analysis.clone();
    if ctx.seed.is_some() {
        config.seed = ctx.seed;
    }
    let report = run_analysis(&a.inputs, &config)?;
    if ctx.out.is_some() {
        ctx.write_out("report.json", report.to_json().as_bytes())?;
        for (name, bytes) in tables::all_tables(&report) {
            ctx.write_out(name, &bytes)?;
        }
    } else {
        match ctx.format {
            Format::Json => ctx.emit("report.json", format!("{}\n", report.to_json()).as_bytes())?,
            Format::Csv => ctx.emit("roc.csv", &tables::roc_csv(&report))?,
        }
    }
    let missing = report.not_computable();
    for m in &missing {
        eprintln!("not computable: {m}");
    }
    Ok(if missing.is_empty() { EXIT_OK } else { EXIT_NOT_COMPUTABLE })
}

fn cmd_roc(ctx: &Ctx, a: &RocArgs) -> CmdResult {
    let cols = read_columns(&a.file, &[&a.score_column, &a.label_column])?;
    let scores = parse_f64(&cols[0], &a.score_column)?;
    let labels = parse_label(&cols[1], &a.label_column)?;
    let r = optimal_cutoff(&scores, &labels).map_err(not_computable)?;
    match ctx.format {
        Format::Json => ctx.emit_json("roc.json", &r)?,
        Format::Csv => {
            let row = vec![
                r.cutoff.to_string(),
                r.sensitivity.to_string(),
                r.specificity.to_string(),
                r.ppv.map(|v| v.to_string()).unwrap_or_default(),
                r.npv.map(|v| v.to_string()).unwrap_or_default(),
                r.auc.to_string(),
                r.metric_score.to_string(),
                u8::from(r.suitable).to_string(),
            ];
            let header = ["cutoff", "sensitivity", "specificity", "ppv", "npv", "auc", "metric_score", "suitable"];
            ctx.emit("roc.csv", &csv_bytes(&header, [row]))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_reliability(ctx: &Ctx, a: &ReliabilityArgs) -> CmdResult {
    let data = ingest(std::slice::from_ref(&a.file))?;
    let rows: Vec<Vec<f64>> = data
        .responses
        .iter()
        .filter(|r| r.instrument == a.instrument && a.timepoint.is_none_or(|t| t == r.timepoint))
        .map(|r| r.items.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let table = reliability_report(&ReliabilityScheme::for_instrument(a.instrument), &rows).map_err(not_computable)?;
    match ctx.format {
        Format::Json => ctx.emit_json("reliability.json", &table)?,
        Format::Csv => {
            let rows = table.iter().map(|r| {
                vec![r.instrument.clone(), r.score.clone(), r.alpha.to_string(), serde_json::to_value(r.band).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(), r.n.to_string(), r.k.to_string()]
            });
            ctx.emit("reliability.csv", &csv_bytes(&["instrument", "score", "alpha", "band", "n", "k"], rows))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_decline(ctx: &Ctx, a: &DeclineArgs) -> CmdResult {
    let data = ingest(&a.inputs)?;
    let (records, _) = csqvr::analysis::assemble_records(&data);
    let metrics = if a.metrics.is_empty() { Metric::ALL.to_vec() } else { a.metrics.clone() };
    let mut criteria = Vec::new();
    for &m in &metrics {
        let baseline: Vec<f64> = records.iter().filter(|r| r.stage == Stage::Baseline).filter_map(|r| r.metric(m)).collect();
        criteria.push(decline_criterion(m.as_str(), &baseline, m.direction()).map_err(|e| not_computable(format!("{m}: {e}")))?);
    }
    let flags = csqvr::psychometrics::flag_declines(&records, &criteria, &metrics).map_err(not_computable)?;
    match ctx.format {
        Format::Json => ctx.emit_json("declines.json", &serde_json::json!({ "criteria": criteria, "flags": flags }))?,
        Format::Csv => {
            let rows = flags.iter().map(|f| {
                vec![
                    f.participant.to_string(),
                    f.stage.to_string(),
                    f.metric.to_string(),
                    f.value.to_string(),
                    f.threshold.to_string(),
                    u8::from(f.declined).to_string(),
                ]
            });
            ctx.emit("declines.csv", &csv_bytes(&["participant", "stage", "metric", "value", "threshold", "declined"], rows))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_lmm(ctx: &Ctx, a: &LmmArgs) -> CmdResult {
    let cols = read_columns(&a.file, &[&a.y, &a.x, &a.group])?;
    let mut y = parse_f64(&cols[0], &a.y)?;
    let mut x = parse_f64(&cols[1], &a.x)?;
    if a.transform {
        let pos = ctx.config.analysis.plotting_position;
        y = csqvr::stats::orq_normalize(&y, pos).map_err(not_computable)?;
        x = csqvr::stats::orq_normalize(&x, pos).map_err(not_computable)?;
    }
    let method = if a.reml { LmmMethod::Reml } else { LmmMethod::Ml };
    let fit = fit_random_intercept(&y, &x, &cols[2], method).map_err(not_computable)?;
    match ctx.format {
        Format::Json => ctx.emit_json("lmm.json", &fit)?,
        Format::Csv => {
            let header = ["beta0", "beta1", "var_group", "var_resid", "r2_marginal", "r2_conditional", "log_likelihood"];
            let row = [fit.beta0, fit.beta1, fit.var_group, fit.var_resid, fit.r2_marginal, fit.r2_conditional, fit.log_likelihood]
                .iter()
                .map(f64::to_string)
                .collect();
            ctx.emit("lmm.csv", &csv_bytes(&header, [row]))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_normalize(ctx: &Ctx, a: &NormalizeArgs) -> CmdResult {
    let cols = read_columns(&a.file, &[&a.column])?;
    let values = parse_f64(&cols[0], &a.column)?;
    let pos = if a.hazen { PlottingPosition::Hazen } else { ctx.config.analysis.plotting_position };
    let t = orq_fit(&values, pos).map_err(not_computable)?;
    let out = t.apply_all(&values);
    match ctx.format {
        Format::Json => ctx.emit_json("normalized.json", &serde_json::json!({ "values": values, "normalized": out }))?,
        Format::Csv => {
            let rows = values.iter().zip(&out).map(|(v, z)| vec![v.to_string(), z.to_string()]);
            ctx.emit("normalized.csv", &csv_bytes(&[a.column.as_str(), "normalized"], rows))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> CmdResult {
    let mut cfg = ctx.config.simulate.clone();
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if let Some(n) = a.participants {
        cfg.n_participants = n;
    }
    let sim = simulate_cohort(&cfg).map_err(Failure::invalid)?;
    match &ctx.out {
        Some(dir) => write_simulation(dir, &sim)?,
        None => ctx.emit_json("simulation.json", &sim)?,
    }
    Ok(EXIT_OK)
}

fn cmd_serve(a: &ServeArgs) -> CmdResult {
    let store = SessionStore::open(&a.store).map_err(Failure::invalid)?;
    let rt = tokio::runtime::Runtime::new().map_err(Failure::invalid)?;
    rt.block_on(server::serve(a.addr, Arc::new(store))).map_err(Failure::invalid)?;
    Ok(EXIT_OK)
}

fn cmd_replay(ctx: &Ctx, a: &ReplayArgs) -> CmdResult {
    let session = replay_log(&a.log).map_err(Failure::invalid)?;
    let report = session.report();
    if let Some(dir) = &ctx.out {
        write_dataset(dir, session.dataset())?;
        ctx.write_out("session_report.json", serde_json::to_string_pretty(&report).expect("serializable").as_bytes())?;
    } else {
        ctx.emit_json("session_report.json", &report)?;
    }
    Ok(EXIT_OK)
}

fn load_config(path: Option<&Path>) -> Result<CliConfig, Failure> {
    let Some(path) = path else { return Ok(CliConfig::default()) };
    let bytes = fs::read(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Parses arguments and runs a command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = load_config(cli.config.as_deref()).and_then(|config| {
        let ctx = Ctx { seed: cli.seed, config, out: cli.out.clone(), format: cli.format };
        match &cli.command {
            Command::Score(a) => cmd_score(&ctx, a),
            Command::Analyze(a) => cmd_analyze(&ctx, a),
            Command::Roc(a) => cmd_roc(&ctx, a),
            Command::Reliability(a) => cmd_reliability(&ctx, a),
            Command::Decline(a) => cmd_decline(&ctx, a),
            Command::Lmm(a) => cmd_lmm(&ctx, a),
            Command::Normalize(a) => cmd_normalize(&ctx, a),
            Command::Simulate(a) => cmd_simulate(&ctx, a),
            Command::Serve(a) => cmd_serve(a),
            Command::Replay(a) => cmd_replay(&ctx, a),
        }
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
