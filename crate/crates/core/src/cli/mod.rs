//! Command-line front end. Every run writes `<out>.manifest.json` next to its output.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{
    CompletionClient, FixedBackend, HttpBackend, OracleBackend, RandomTextBackend, RateLimiter, ResponseCache,
    RetryPolicy, ScriptedBackend, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT, DEFAULT_MODEL,
};
use crate::eval::{evaluate_synthetic, EvalError, EvalRecord, Outcome, SyntheticConfig};
use crate::oracle::{sample_batch, Rendering, TestItem};
use crate::prompt::PhrasingVariant;
use crate::rng;
use crate::sara::{self, SaraConfig, SaraError, SaraMode};
use crate::stats::{aggregate, render_csv, render_json, render_text, ReportFormat, Summary};
use crate::statute::{StatuteSpec, TermMode};
use crate::usc::{self, IdentifyRecord, IdentifyTally, RecitationRecord, RecitationSummary, UscError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Backend(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SaraError> for CliError {
    fn from(e: SaraError) -> Self {
        match e {
            SaraError::InsufficientShots { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<UscError> for CliError {
    fn from(e: UscError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "statute-bench", version, about = "Statutory-reasoning benchmarks for text-completion models")]
pub struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a balanced batch of synthetic test items as JSONL.
    Gen(GenArgs),
    /// Ask a backend every synthetic item and score the answers.
    EvalSynthetic(EvalSyntheticArgs),
    /// Run one SARA prompting setting over the test split.
    EvalSara(EvalSaraArgs),
    /// Knowledge probes.
    Probe {
        #[command(subcommand)]
        probe: ProbeCommand,
    },
    /// Summarize a transcript file.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// U.S. Code identification and recitation.
    Usc(UscArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BackendArgs {
    /// oracle, off-by-one, fixed:<text>, scripted:<jsonl>, random:<seed> or http.
    #[arg(long, default_value = "oracle")]
    pub backend: String,
    #[arg(long, default_value = DEFAULT_MODEL)]
    pub model: String,
    #[arg(long, default_value = DEFAULT_ENDPOINT)]
    pub endpoint: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
    pub api_key_env: String,
    /// Response cache directory; reruns with the same requests never hit the backend.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    #[arg(long, default_value_t = 4)]
    pub retries: u32,
    /// Requests per minute.
    #[arg(long)]
    pub rate_limit: Option<u32>,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, default_value = "nonce")]
    pub terms: TermMode,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "statute")]
    pub rendering: Rendering,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalSyntheticArgs {
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub shots: u8,
    /// Re-render every item this way before asking.
    #[arg(long)]
    pub rendering: Option<Rendering>,
    #[arg(long, default_value = "P1")]
    pub phrasing: PhrasingVariant,
    /// Seeds the two-shot example choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transcript JSONL.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the summary here, in `--format`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatuteChoice {
    Include,
    Omit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalSaraArgs {
    /// SARA v1 directory (statutes/, cases/, splits/).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "zero")]
    pub mode: SaraMode,
    #[arg(long, value_enum, default_value = "include")]
    pub statute: StatuteChoice,
    #[arg(long)]
    pub step_by_step: bool,
    /// Extract with "Therefore the answer is".
    #[arg(long)]
    pub short_suffix: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the normalized binary cases here as JSONL.
    #[arg(long)]
    pub export_cases: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UscProbe {
    Identify,
    Recite,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct UscArgs {
    #[arg(value_enum)]
    pub probe: UscProbe,
    /// JSONL of sections.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub per_title: usize,
    #[arg(long, default_value_t = usc::MIN_WORDS)]
    pub min_words: usize,
    #[arg(long, default_value_t = usc::MAX_WORDS)]
    pub max_words: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Transcript JSONL from eval-synthetic, eval-sara or probe usc.
    #[arg(long)]
    pub transcripts: PathBuf,
    #[arg(long, default_value = "text")]
    pub format: ReportFormat,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written beside every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub backend_id: Option<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest<C: Serialize>(
    command: &str,
    seed: Option<u64>,
    backend_id: Option<String>,
    config: &C,
    outputs: &[&Path],
) -> Result<(), CliError> {
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        seed,
        backend_id,
        config: serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?,
        outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
    };
    let path = manifest_path(outputs[0]);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&path, &(text + "\n"))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| CliError::Data(e.to_string()))?);
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}

/// Builds a client from a backend descriptor and the shared options.
pub fn build_client(args: &BackendArgs) -> Result<CompletionClient, CliError> {
    let descriptor = args.backend.as_str();
    let mut client = match descriptor.split_once(':') {
        _ if descriptor == "oracle" => CompletionClient::new(OracleBackend::new()),
        _ if descriptor == "off-by-one" => CompletionClient::new(OracleBackend::off_by_one()),
        _ if descriptor == "http" => CompletionClient::new(HttpBackend::new(
            args.endpoint.clone(),
            std::env::var(&args.api_key_env).ok(),
            Duration::from_secs(args.timeout_secs),
        )),
        Some(("fixed", text)) => CompletionClient::new(FixedBackend::new(text)),
        Some(("scripted", path)) => {
            let path = Path::new(path);
            CompletionClient::new(ScriptedBackend::from_jsonl(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?)
        }
        Some(("random", seed)) => {
            let seed = seed.parse().map_err(|_| CliError::Config(format!("bad random seed `{seed}`")))?;
            CompletionClient::new(RandomTextBackend::new(seed))
        }
        _ => return Err(CliError::Config(format!("unknown backend `{descriptor}`"))),
    };
    client = client.with_model(args.model.clone()).with_retry(RetryPolicy { max_retries: args.retries, ..RetryPolicy::default() });
    if let Some(rpm) = args.rate_limit {
        if rpm == 0 {
            return Err(CliError::Config("--rate-limit must be positive".into()));
        }
        client = client.with_rate_limit(RateLimiter::per_minute(rpm));
    }
    if let Some(dir) = &args.cache_dir {
        client = client.with_cache(ResponseCache::open(dir).map_err(|e| io_err(dir, e))?);
    }
    if args.parallelism == 0 {
        return Err(CliError::Config("--parallelism must be at least 1".into()));
    }
    Ok(client)
}

pub fn render_summary(summary: &Summary, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(summary),
        ReportFormat::Text => render_text(summary),
        ReportFormat::Json => render_json(summary),
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            stdout.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn failures(records: &[EvalRecord]) -> Result<(), CliError> {
    let failed = records.iter().filter(|r| r.outcome == Outcome::Failed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Backend(format!("{failed} of {} cases failed; see the transcript", records.len())))
    }
}

fn call_failures(errors: usize, total: usize) -> Result<(), CliError> {
    if errors == 0 {
        Ok(())
    } else {
        Err(CliError::Backend(format!("{errors} of {total} probes failed; see the transcript")))
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let spec = StatuteSpec::new(args.width, args.depth, args.terms, args.seed).map_err(|e| CliError::Config(e.to_string()))?;
    let items = sample_batch(&spec, args.count, args.rendering).map_err(|e| CliError::Config(e.to_string()))?;
    write_jsonl(&args.out, &items)?;
    write_manifest("gen", Some(args.seed), None, args, &[&args.out])?;
    let positive = items.iter().filter(|i| i.label.applicable).count();
    log::info!("wrote {} items ({positive} applicable) to {}", items.len(), args.out.display());
    Ok(())
}

pub fn cmd_eval_synthetic(args: &EvalSyntheticArgs) -> Result<(), CliError> {
    let items: Vec<TestItem> = read_jsonl(&args.items)?;
    let client = build_client(&args.backend)?;
    let mut config = SyntheticConfig::new(args.shots, args.phrasing, args.seed);
    config.rendering = args.rendering;
    let records = evaluate_synthetic(&items, &config, &client, args.backend.parallelism)?;
    finish_eval("eval-synthetic", Some(args.seed), &client, args, &records, &args.out, args.summary.as_deref(), args.format)
}

#[allow(clippy::too_many_arguments)]
fn finish_eval<C: Serialize>(
    command: &str,
    seed: Option<u64>,
    client: &CompletionClient,
    config: &C,
    records: &[EvalRecord],
    out: &Path,
    summary_path: Option<&Path>,
    format: ReportFormat,
) -> Result<(), CliError> {
    write_jsonl(out, records)?;
    let summary = aggregate(records);
    let text = render_summary(&summary, format);
    let mut outputs = vec![out];
    if let Some(p) = summary_path {
        write_file(p, &text)?;
        outputs.push(p);
    }
    write_manifest(command, seed, Some(client.backend_id()), config, &outputs)?;
    emit(&text, None)?;
    failures(records)
}

pub fn cmd_eval_sara(args: &EvalSaraArgs) -> Result<(), CliError> {
    let (cases, statutes) = sara::ingest_sara(&args.data)?;
    if let Some(p) = &args.export_cases {
        write_jsonl(p, &cases)?;
    }
    let mut config = SaraConfig::new(args.mode, args.statute == StatuteChoice::Include, args.step_by_step);
    config.short_suffix = args.short_suffix;
    let client = build_client(&args.backend)?;
    let records = sara::evaluate_sara(&cases, &config, &statutes, &client, args.backend.parallelism)?;
    let [numbers, no_numbers, all] = sara::table_row(&records);
    log::info!("numbers {numbers} | no numbers {no_numbers} | aggregate {all}");
    finish_eval("eval-sara", None, &client, args, &records, &args.out, args.summary.as_deref(), args.format)
}

pub fn cmd_probe_usc(args: &UscArgs) -> Result<(), CliError> {
    let corpus = usc::load_corpus(&args.corpus)?;
    let sample = usc::sample_sections(&corpus, args.per_title, args.min_words, args.max_words, &mut rng::seeded(args.seed))?;
    for (title, n) in &sample.short_titles {
        log::warn!("title {title} has only {n} sections in the word range");
    }
    let client = build_client(&args.backend)?;
    let (text, failed, total) = match args.probe {
        UscProbe::Identify => {
            let records = usc::identify_all(&sample.sections, &client, args.backend.parallelism);
            write_jsonl(&args.out, &records)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            (identify_report(&records, args.format), failed, records.len())
        }
        UscProbe::Recite => {
            let records = usc::recite_all(&sample.sections, &corpus, &client, args.backend.parallelism);
            write_jsonl(&args.out, &records)?;
            let failed = records.iter().filter(|r| r.call.error.is_some()).count();
            (recitation_report(&records, args.format), failed, records.len())
        }
    };
    let mut outputs = vec![args.out.as_path()];
    if let Some(p) = &args.summary {
        write_file(p, &text)?;
        outputs.push(p);
    }
    write_manifest("probe usc", Some(args.seed), Some(client.backend_id()), args, &outputs)?;
    emit(&text, None)?;
    call_failures(failed, total)
}

fn identify_report(records: &[IdentifyRecord], format: ReportFormat) -> String {
    let tally = IdentifyTally::from_records(records);
    match format {
        ReportFormat::Csv => tally.to_csv(),
        ReportFormat::Text => tally.to_text(),
        ReportFormat::Json => serde_json::to_string_pretty(&tally).expect("tally serializes") + "\n",
    }
}

fn recitation_report(records: &[RecitationRecord], format: ReportFormat) -> String {
    let summary = RecitationSummary::from_records(records);
    match format {
        ReportFormat::Csv => summary.to_csv(),
        ReportFormat::Text => summary.to_text(),
        ReportFormat::Json => serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    }
}

/// The kinds of transcript `report` understands, tried in this order.
enum RecordKind {
    Eval,
    Identify,
    Recitation,
}

/// Kind of the first record in a transcript. Untagged serde enums cannot
/// buffer the u128 call timestamps, so each type is tried in turn.
fn transcript_kind(path: &Path) -> Result<Option<RecordKind>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let Some(line) = text.lines().find(|l| !l.trim().is_empty()) else {
        return Ok(None);
    };
    if serde_json::from_str::<EvalRecord>(line).is_ok() {
        Ok(Some(RecordKind::Eval))
    } else if serde_json::from_str::<IdentifyRecord>(line).is_ok() {
        Ok(Some(RecordKind::Identify))
    } else if serde_json::from_str::<RecitationRecord>(line).is_ok() {
        Ok(Some(RecordKind::Recitation))
    } else {
        Err(CliError::Data(format!("{}:1: not an evaluation, identification or recitation record", path.display())))
    }
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let path = &args.transcripts;
    let text = match transcript_kind(path)? {
        None => render_summary(&aggregate(&[]), args.format),
        Some(RecordKind::Eval) => render_summary(&aggregate(&read_jsonl::<EvalRecord>(path)?), args.format),
        Some(RecordKind::Identify) => identify_report(&read_jsonl::<IdentifyRecord>(path)?, args.format),
        Some(RecordKind::Recitation) => recitation_report(&read_jsonl::<RecitationRecord>(path)?, args.format),
    };
    emit(&text, args.out.as_deref())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::EvalSynthetic(a) => cmd_eval_synthetic(a),
        Command::EvalSara(a) => cmd_eval_sara(a),
        Command::Probe { probe: ProbeCommand::Usc(a) } => cmd_probe_usc(a),
        Command::Report(a) => cmd_report(a),
    }
}
