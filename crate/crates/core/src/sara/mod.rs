//! Tax-law entailment cases in the SARA v1 layout: ingestion, few-shot
//! retrieval, prompt assembly and scoring.

mod statutes;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{map_bounded, CompletionClient};
use crate::eval::{run_two_stage, EvalRecord, ExtractionPolicy};
use crate::prompt::{Expects, PromptBundle, Verdict, ENTAIL_CONTRA_SUFFIX, STEP_BY_STEP};

pub use statutes::{extract_provision, StatuteLibrary, COT10_EXTRACTS};

/// The shorter extraction suffix some runs used.
pub const SHORT_EXTRACTION_SUFFIX: &str = "Therefore the answer is";

static COT10_ASSET: &str = include_str!("../../assets/sara_cot10.txt");

#[derive(Debug, Error)]
pub enum SaraError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed case {id}: {message}")]
    MalformedCase { id: String, message: String },
    #[error("expected 9 statute sections, found {0}")]
    StatuteCount(usize),
    #[error("no statute text for section {0}")]
    MissingStatute(String),
    #[error("hypothesis cites no section: {0}")]
    NoCitedSection(String),
    #[error("need at least 2 training cases per label, have {entailment} entailment and {contradiction} contradiction")]
    InsufficientShots { entailment: usize, contradiction: usize },
    #[error("no cases found under {0}")]
    Empty(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SaraLabel {
    Entailment,
    Contradiction,
}

impl SaraLabel {
    pub fn verdict(self) -> Verdict {
        match self {
            SaraLabel::Entailment => Verdict::Entailment,
            SaraLabel::Contradiction => Verdict::Contradiction,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            SaraLabel::Entailment => "Entailment",
            SaraLabel::Contradiction => "Contradiction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaraCase {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: SaraLabel,
    pub split: Split,
    pub numeric: bool,
}

impl SaraCase {
    pub fn new(id: &str, premise: &str, hypothesis: &str, label: SaraLabel, split: Split) -> Self {
        let numeric = classify_numeric(premise, hypothesis);
        SaraCase {
            id: id.to_string(),
            premise: premise.to_string(),
            hypothesis: hypothesis.to_string(),
            label,
            split,
            numeric,
        }
    }
}

static CITATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bsections?\s+\d+[A-Za-z]*(?:\s*\([0-9A-Za-z]+\))*|\b\d+[A-Za-z]*(?:\([0-9A-Za-z]+\))+|\([0-9A-Za-z]+\)").expect("valid regex")
});
static DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)
        \b(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\.?
            \s+\d{1,2}(?:st|nd|rd|th)?(?:,?\s*\d{4})?
        | \b\d{1,2}/\d{1,2}/\d{2,4}\b
        | \b(?:19|20)\d{2}\b",
    )
    .expect("valid regex")
});

/// True when premise or hypothesis has a number other than a statutory
/// citation, a calendar date or a year.
pub fn classify_numeric(premise: &str, hypothesis: &str) -> bool {
    [premise, hypothesis].iter().any(|text| {
        let no_citations = CITATION.replace_all(text, " ");
        let no_dates = DATE.replace_all(&no_citations, " ");
        no_dates.chars().any(|c| c.is_ascii_digit())
    })
}

fn read(path: &Path) -> Result<String, SaraError> {
    std::fs::read_to_string(path).map_err(|e| SaraError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn comment_block(text: &str, header: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| l.trim() != format!("% {header}"));
    lines.next()?;
    let body: Vec<&str> = lines
        .take_while(|l| l.trim_start().starts_with('%') && l.trim() != "%")
        .map(|l| l.trim_start().trim_start_matches('%').trim())
        .take_while(|l| !l.is_empty())
        .collect();
    (!body.is_empty()).then(|| body.join(" "))
}

/// Parses one `.pl` case file. `Ok(None)` for dollar-amount cases.
pub fn parse_case(id: &str, text: &str, split: Split) -> Result<Option<SaraCase>, SaraError> {
    let bad = |message: &str| SaraError::MalformedCase { id: id.to_string(), message: message.to_string() };
    let premise = comment_block(text, "Text").ok_or_else(|| bad("no % Text block"))?;
    let question = comment_block(text, "Question").ok_or_else(|| bad("no % Question block"))?;
    let (hypothesis, answer) = question.trim().rsplit_once(char::is_whitespace).ok_or_else(|| bad("question has no answer"))?;
    let label = match answer.trim_matches(|c: char| !c.is_alphanumeric() && c != '$') {
        "Entailment" => SaraLabel::Entailment,
        "Contradiction" => SaraLabel::Contradiction,
        _ => return Ok(None),
    };
    Ok(Some(SaraCase::new(id, &premise, hypothesis.trim(), label, split)))
}

fn read_split(path: &Path) -> Result<Vec<String>, SaraError> {
    Ok(read(path)?
        .lines()
        .map(|l| l.trim().trim_end_matches(".pl").to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

/// Reads `statutes/source/section*`, `cases/*.pl` and `splits/{train,test}`.
pub fn ingest_sara(root: &Path) -> Result<(Vec<SaraCase>, StatuteLibrary), SaraError> {
    let library = StatuteLibrary::load(&root.join("statutes").join("source"))?;
    let mut split_of: HashMap<String, Split> = HashMap::new();
    for (file, split) in [("train", Split::Train), ("test", Split::Test)] {
        for id in read_split(&root.join("splits").join(file))? {
            split_of.insert(id, split);
        }
    }
    let cases_dir = root.join("cases");
    let entries = std::fs::read_dir(&cases_dir)
        .map_err(|e| SaraError::Io { path: cases_dir.display().to_string(), message: e.to_string() })?;
    let mut paths: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    paths.sort();
    let mut cases = Vec::new();
    for path in paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let Some(&split) = split_of.get(&id) else {
            log::warn!("case {id} is in neither split; skipped");
            continue;
        };
        if let Some(case) = parse_case(&id, &read(&path)?, split)? {
            cases.push(case);
        }
    }
    if cases.is_empty() {
        return Err(SaraError::Empty(root.display().to_string()));
    }
    Ok((cases, library))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub total: usize,
    pub numeric: usize,
    pub non_numeric: usize,
}

pub fn split_counts(cases: &[SaraCase]) -> BTreeMap<Split, SplitCounts> {
    let mut out: BTreeMap<Split, SplitCounts> = BTreeMap::new();
    for c in cases {
        let e = out.entry(c.split).or_default();
        e.total += 1;
        if c.numeric {
            e.numeric += 1;
        } else {
            e.non_numeric += 1;
        }
    }
    out
}

fn term_frequencies(text: &str) -> HashMap<String, f64> {
    let mut tf = HashMap::new();
    for w in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        *tf.entry(w.to_lowercase()).or_insert(0.0) += 1.0;
    }
    tf
}

fn cosine(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().map(|(k, v)| v * b.get(k).copied().unwrap_or(0.0)).sum();
    let norm = |m: &HashMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Cosine similarity of term-frequency vectors over premise and hypothesis.
pub fn similarity(a: &SaraCase, b: &SaraCase) -> f64 {
    let text = |c: &SaraCase| format!("{} {}", c.premise, c.hypothesis);
    cosine(&term_frequencies(&text(a)), &term_frequencies(&text(b)))
}

/// The two most similar Entailment and two most similar Contradiction
/// training cases, alternating labels and led by the closer pair.
pub fn select_dynamic_shots(test: &SaraCase, train: &[SaraCase]) -> Result<Vec<SaraCase>, SaraError> {
    let target = term_frequencies(&format!("{} {}", test.premise, test.hypothesis));
    let ranked = |label: SaraLabel| {
        let mut v: Vec<(f64, &SaraCase)> = train
            .iter()
            .filter(|c| c.label == label && c.id != test.id)
            .map(|c| (cosine(&target, &term_frequencies(&format!("{} {}", c.premise, c.hypothesis))), c))
            .collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
        v.truncate(2);
        v
    };
    let ent = ranked(SaraLabel::Entailment);
    let con = ranked(SaraLabel::Contradiction);
    if ent.len() < 2 || con.len() < 2 {
        return Err(SaraError::InsufficientShots { entailment: ent.len(), contradiction: con.len() });
    }
    let (first, second) = if ent[0].0 >= con[0].0 { (ent, con) } else { (con, ent) };
    Ok(vec![first[0].1.clone(), second[0].1.clone(), first[1].1.clone(), second[1].1.clone()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaraMode {
    Dynamic4,
    Zero,
    Cot10,
}

impl std::str::FromStr for SaraMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic4" => Ok(SaraMode::Dynamic4),
            "zero" => Ok(SaraMode::Zero),
            "cot10" => Ok(SaraMode::Cot10),
            other => Err(format!("unknown mode `{other}` (expected dynamic4, zero or cot10)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaraConfig {
    pub mode: SaraMode,
    pub include_statute: bool,
    /// Ignored for cot10.
    pub step_by_step: bool,
    /// Use "Therefore the answer is" instead of the longer extraction suffix.
    pub short_suffix: bool,
}

impl SaraConfig {
    pub fn new(mode: SaraMode, include_statute: bool, step_by_step: bool) -> Self {
        SaraConfig { mode, include_statute, step_by_step, short_suffix: false }
    }

    /// The ten settings evaluated on SARA, as (mode, statute, step by step).
    pub fn grid() -> Vec<SaraConfig> {
        let mut out = Vec::new();
        for mode in [SaraMode::Dynamic4, SaraMode::Zero] {
            for include_statute in [true, false] {
                for step in [true, false] {
                    out.push(SaraConfig::new(mode, include_statute, step));
                }
            }
        }
        out.push(SaraConfig::new(SaraMode::Cot10, true, false));
        out.push(SaraConfig::new(SaraMode::Cot10, false, false));
        out
    }
}

static SECTION_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(I\.R\.C\. )?\b(sections?)\b").expect("valid regex"));
static CITED_SECTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bsection\s+(\d+[A-Za-z]*)").expect("valid regex"));

/// Prefixes every "section" with "I.R.C.".
pub fn irc_substitute(text: &str) -> String {
    SECTION_WORD
        .replace_all(text, |caps: &regex::Captures| match caps.get(1) {
            Some(_) => caps[0].to_string(),
            None => format!("I.R.C. {}", caps[2].to_lowercase()),
        })
        .into_owned()
}

/// The section number cited in a hypothesis.
pub fn cited_section(hypothesis: &str) -> Option<String> {
    CITED_SECTION.captures(hypothesis).map(|c| c[1].to_string())
}

fn case_block(premise: &str, hypothesis: &str, answer: Option<&str>) -> String {
    match answer {
        Some(a) => format!("Premise: {premise}\nHypothesis: {hypothesis}\nAnswer: {a}"),
        None => format!("Premise: {premise}\nHypothesis: {hypothesis}\nAnswer:"),
    }
}

/// The hand-written chain-of-thought examples, one per blank-line-separated block.
pub fn cot10_examples() -> Vec<&'static str> {
    COT10_ASSET.trim().split("\n\n").collect()
}

/// Statute block, example cases, then the test case ending in "Answer:".
pub fn build_sara_prompt(
    case: &SaraCase,
    config: &SaraConfig,
    shots: &[SaraCase],
    statutes: &StatuteLibrary,
) -> Result<PromptBundle, SaraError> {
    let mut parts: Vec<String> = Vec::new();
    if config.include_statute {
        match config.mode {
            SaraMode::Cot10 => parts.push(statutes.cot10_block()?),
            SaraMode::Dynamic4 | SaraMode::Zero => {
                let section = cited_section(&case.hypothesis).ok_or_else(|| SaraError::NoCitedSection(case.hypothesis.clone()))?;
                let text = statutes.get(&section).ok_or(SaraError::MissingStatute(section))?;
                parts.push(text.trim_end().to_string());
            }
        }
    }
    let rewrite = |s: &str| if config.include_statute { s.to_string() } else { irc_substitute(s) };
    match config.mode {
        SaraMode::Dynamic4 => {
            for shot in shots {
                parts.push(case_block(&rewrite(&shot.premise), &rewrite(&shot.hypothesis), Some(shot.label.word())));
            }
        }
        SaraMode::Cot10 => parts.extend(cot10_examples().into_iter().map(rewrite)),
        SaraMode::Zero => {}
    }
    let mut test = case_block(&rewrite(&case.premise), &rewrite(&case.hypothesis), None);
    if config.step_by_step && config.mode != SaraMode::Cot10 {
        test.push(' ');
        test.push_str(STEP_BY_STEP);
    }
    parts.push(test);
    let mut bundle = PromptBundle::new(parts.join("\n\n"), Expects::EntailContra);
    if config.short_suffix {
        bundle.extraction_suffix = SHORT_EXTRACTION_SUFFIX.to_string();
    } else {
        debug_assert_eq!(bundle.extraction_suffix, ENTAIL_CONTRA_SUFFIX);
    }
    Ok(bundle)
}

pub fn sara_stratum(case: &SaraCase) -> Vec<(String, String)> {
    vec![("cases".into(), if case.numeric { "numbers" } else { "no numbers" }.into())]
}

/// Scores every test case; prompts are all built before the first call.
pub fn evaluate_sara(
    cases: &[SaraCase],
    config: &SaraConfig,
    statutes: &StatuteLibrary,
    client: &CompletionClient,
    parallelism: usize,
) -> Result<Vec<EvalRecord>, SaraError> {
    let train: Vec<SaraCase> = cases.iter().filter(|c| c.split == Split::Train).cloned().collect();
    let prepared: Vec<(&SaraCase, PromptBundle)> = cases
        .iter()
        .filter(|c| c.split == Split::Test)
        .map(|c| {
            let shots = match config.mode {
                SaraMode::Dynamic4 => select_dynamic_shots(c, &train)?,
                _ => Vec::new(),
            };
            Ok((c, build_sara_prompt(c, config, &shots, statutes)?))
        })
        .collect::<Result<_, SaraError>>()?;
    Ok(map_bounded(&prepared, parallelism, |(case, bundle)| {
        run_two_stage(
            client,
            bundle,
            ExtractionPolicy::WhenIndeterminate,
            case.label.verdict(),
            case.id.clone(),
            sara_stratum(case),
        )
    }))
}

/// Cells in the order numbers, no numbers, aggregate.
pub fn table_row(records: &[EvalRecord]) -> [String; 3] {
    let summary = crate::stats::aggregate(records);
    let cell = |label: &str| {
        summary
            .rows
            .iter()
            .find(|r| r.stratum.iter().any(|(_, v)| v == label))
            .map(|r| r.cell_text())
            .unwrap_or_else(|| "-".into())
    };
    [cell("numbers"), cell("no numbers"), summary.overall.cell_text()]
}
