//! Probes of what a model knows about the U.S. Code: naming the source of a
//! section's text, and reciting a section from its citation.

pub mod bleu;
pub mod rank;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{map_bounded, CallRecord, CompletionClient, CompletionRequest};
use crate::prompt::{parse_answer, Expects, Verdict};
use crate::rng;

pub use bleu::{bleu, tokenize, unpenalized_bleu};
pub use rank::{normalized_rank, rank_metrics, recall_at_k, section_order};

pub const MIN_WORDS: usize = 100;
pub const MAX_WORDS: usize = 1000;

pub const WHERE_FROM: &str = "Where is the text above from?";
pub const IS_USC: &str = "So is it from the U.S. Code? The answer (Yes or No) is";
pub const WHICH_TITLE: &str = "What title of the U.S. Code is it from? The answer (arabic numerals) is";

#[derive(Debug, Error)]
pub enum UscError {
    #[error("corpus {path}: {message}")]
    Corpus { path: String, message: String },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("ranking needs at least 2 sections in the title, found {0}")]
    TooFewSections(usize),
    #[error("section {0} is not in the title")]
    SectionNotInTitle(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UscSection {
    pub title: u32,
    pub section: String,
    pub heading: String,
    pub body: String,
    /// Whitespace tokens in `body`.
    pub word_count: usize,
}

impl UscSection {
    pub fn new(title: u32, section: impl Into<String>, heading: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let word_count = body.split_whitespace().count();
        UscSection { title, section: section.into(), heading: heading.into(), body, word_count }
    }
}

#[derive(Deserialize)]
struct RawSection {
    title: u32,
    section: String,
    #[serde(default)]
    heading: String,
    body: String,
    #[serde(default)]
    word_count: Option<usize>,
}

/// Reads a JSONL corpus of `{title, section, heading, body}` objects. A stored
/// `word_count` must agree with the body.
pub fn load_corpus(path: &Path) -> Result<Vec<UscSection>, UscError> {
    let err = |message: String| UscError::Corpus { path: path.display().to_string(), message };
    let raw = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut out = Vec::new();
    for (no, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: RawSection = serde_json::from_str(line).map_err(|e| err(format!("line {}: {e}", no + 1)))?;
        let section = UscSection::new(r.title, r.section, r.heading, r.body);
        if let Some(stored) = r.word_count {
            if stored != section.word_count {
                return Err(err(format!(
                    "line {}: word_count {stored} but body has {} words",
                    no + 1,
                    section.word_count
                )));
            }
        }
        out.push(section);
    }
    if out.is_empty() {
        return Err(UscError::EmptyCorpus);
    }
    Ok(out)
}

/// Sections grouped by title, each title in natural section order.
pub fn by_title(corpus: &[UscSection]) -> BTreeMap<u32, Vec<&UscSection>> {
    let mut titles: BTreeMap<u32, Vec<&UscSection>> = BTreeMap::new();
    for s in corpus {
        titles.entry(s.title).or_default().push(s);
    }
    for v in titles.values_mut() {
        v.sort_by(|a, b| section_order(&a.section, &b.section));
    }
    titles
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub sections: Vec<UscSection>,
    /// Titles that had fewer than `per_title` qualifying sections, with how many they had.
    pub short_titles: Vec<(u32, usize)>,
}

/// Up to `per_title` sections from each title whose bodies have
/// `min_words..=max_words` words, drawn uniformly without replacement.
pub fn sample_sections<R: Rng + ?Sized>(
    corpus: &[UscSection],
    per_title: usize,
    min_words: usize,
    max_words: usize,
    rng: &mut R,
) -> Result<SampleReport, UscError> {
    if corpus.is_empty() {
        return Err(UscError::EmptyCorpus);
    }
    let mut sections = Vec::new();
    let mut short_titles = Vec::new();
    for (title, all) in by_title(corpus) {
        let eligible: Vec<&UscSection> =
            all.into_iter().filter(|s| (min_words..=max_words).contains(&s.word_count)).collect();
        if eligible.len() < per_title {
            short_titles.push((title, eligible.len()));
        }
        let mut chosen = rng::sample(rng, &eligible, per_title.min(eligible.len()));
        chosen.sort_by(|a, b| section_order(&a.section, &b.section));
        sections.extend(chosen.into_iter().cloned());
    }
    Ok(SampleReport { sections, short_titles })
}

pub fn which_section(title: u32) -> String {
    format!("What section of title {title} of the U.S. Code is it from? The answer (arabic numerals) is")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentifyClass {
    NotUsc,
    WrongTitle,
    RightTitleWrongSection,
    Correct,
}

impl IdentifyClass {
    pub const ALL: [IdentifyClass; 4] =
        [IdentifyClass::NotUsc, IdentifyClass::WrongTitle, IdentifyClass::RightTitleWrongSection, IdentifyClass::Correct];

    pub fn label(self) -> &'static str {
        match self {
            IdentifyClass::NotUsc => "Not from U.S. Code",
            IdentifyClass::WrongTitle => "Wrong title",
            IdentifyClass::RightTitleWrongSection => "Right title, wrong section",
            IdentifyClass::Correct => "Title and section correct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifyOutcome {
    pub class: IdentifyClass,
    pub predicted_title: Option<u32>,
    pub predicted_section: Option<String>,
    /// |predicted - true| for a wrong but numeric section in the right title.
    pub off_by: Option<u64>,
    /// A stage's answer could not be read and was classed conservatively.
    pub unparseable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyRecord {
    pub title: u32,
    pub section: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<IdentifyOutcome>,
    pub calls: Vec<CallRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

static FIRST_INT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").expect("valid regex"));
static FIRST_SECTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+[A-Za-z]*").expect("valid regex"));

fn first_int(text: &str) -> Option<u32> {
    FIRST_INT.find(text).and_then(|m| m.as_str().parse().ok())
}

fn first_section(text: &str) -> Option<String> {
    FIRST_SECTION.find(text).map(|m| m.as_str().to_string())
}

fn pure_number(s: &str) -> Option<u64> {
    if s.chars().all(|c| c.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

/// Runs the four-question dialogue on a section's body. Each prompt is the
/// previous prompt, its response, a newline and the next question.
pub fn identify_dialogue(section: &UscSection, client: &CompletionClient) -> IdentifyRecord {
    let mut calls = Vec::new();
    let result = run_dialogue(section, client, &mut calls);
    let (outcome, error) = match result {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e)),
    };
    IdentifyRecord { title: section.title, section: section.section.clone(), outcome, calls, error }
}

fn run_dialogue(section: &UscSection, client: &CompletionClient, calls: &mut Vec<CallRecord>) -> Result<IdentifyOutcome, String> {
    let mut ask = |prompt: &str| -> Result<String, String> {
        let call = client.call(CompletionRequest::new(client.model(), prompt));
        let result = match (&call.response, &call.error) {
            (Some(r), _) => Ok(r.text.clone()),
            (None, e) => Err(e.clone().unwrap_or_default()),
        };
        calls.push(call);
        result
    };
    let extend = |prompt: &mut String, reply: &str, question: &str| {
        prompt.push_str(reply);
        prompt.push('\n');
        prompt.push_str(question);
    };
    let outcome = |class, predicted_title, predicted_section, off_by, unparseable| IdentifyOutcome {
        class,
        predicted_title,
        predicted_section,
        off_by,
        unparseable,
    };

    let mut prompt = format!("{}\n{WHERE_FROM}", section.body);
    let reply = ask(&prompt)?;
    extend(&mut prompt, &reply, IS_USC);

    let reply = ask(&prompt)?;
    let is_usc = parse_answer(&reply, Expects::YesNo).verdict;
    if is_usc != Verdict::Yes {
        return Ok(outcome(IdentifyClass::NotUsc, None, None, None, is_usc == Verdict::Indeterminate));
    }
    extend(&mut prompt, &reply, WHICH_TITLE);

    let reply = ask(&prompt)?;
    let Some(title) = first_int(&reply) else {
        return Ok(outcome(IdentifyClass::WrongTitle, None, None, None, true));
    };
    if title != section.title {
        return Ok(outcome(IdentifyClass::WrongTitle, Some(title), None, None, false));
    }
    extend(&mut prompt, &reply, &which_section(section.title));

    let reply = ask(&prompt)?;
    let Some(predicted) = first_section(&reply) else {
        return Ok(outcome(IdentifyClass::RightTitleWrongSection, Some(title), None, None, true));
    };
    if predicted.eq_ignore_ascii_case(&section.section) {
        return Ok(outcome(IdentifyClass::Correct, Some(title), Some(predicted), None, false));
    }
    let off_by = match (pure_number(&predicted), pure_number(&section.section)) {
        (Some(p), Some(t)) => Some(p.abs_diff(t)),
        _ => None,
    };
    Ok(outcome(IdentifyClass::RightTitleWrongSection, Some(title), Some(predicted), off_by, false))
}

pub fn identify_all(sections: &[UscSection], client: &CompletionClient, parallelism: usize) -> Vec<IdentifyRecord> {
    map_bounded(sections, parallelism, |s| identify_dialogue(s, client))
}

/// Counts of each identification class over a set of records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifyTally {
    pub counts: BTreeMap<IdentifyClass, u64>,
    pub failed: u64,
    pub unparseable: u64,
    /// Right-title, wrong-section answers that named a numeric section.
    pub numeric_wrong_section: u64,
    pub off_by_one: u64,
    pub off_by_at_most_nine: u64,
}

impl IdentifyTally {
    pub fn from_records(records: &[IdentifyRecord]) -> Self {
        let mut t = IdentifyTally::default();
        for c in IdentifyClass::ALL {
            t.counts.insert(c, 0);
        }
        for r in records {
            let Some(o) = &r.outcome else {
                t.failed += 1;
                continue;
            };
            *t.counts.entry(o.class).or_default() += 1;
            t.unparseable += o.unparseable as u64;
            if let Some(d) = o.off_by {
                t.numeric_wrong_section += 1;
                t.off_by_one += (d == 1) as u64;
                t.off_by_at_most_nine += (d <= 9) as u64;
            }
        }
        t
    }

    pub fn scored(&self) -> u64 {
        self.counts.values().sum()
    }

    /// One `label,percent,count` row per class.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["outcome", "percent", "count"]).expect("in-memory write");
        let total = self.scored();
        for (class, n) in &self.counts {
            let pct = crate::stats::percent(*n, total);
            w.write_record([class.label().to_string(), pct.to_string(), n.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let total = self.scored();
        let mut lines: Vec<String> = self
            .counts
            .iter()
            .map(|(class, n)| format!("{:<28}{:>3}% ({n})", class.label(), crate::stats::percent(*n, total)))
            .collect();
        lines.push(format!(
            "numeric wrong sections: {}; off by 1: {}; off by <= 9: {}; unparseable: {}; failed: {}",
            self.numeric_wrong_section, self.off_by_one, self.off_by_at_most_nine, self.unparseable, self.failed
        ));
        lines.join("\n") + "\n"
    }
}

pub fn recitation_prompt(title: u32, section: &str) -> String {
    format!("The text of {title} U.S. Code section {section} is:")
}

/// Asks for the text of a section.
pub fn recite(title: u32, section: &str, client: &CompletionClient) -> CallRecord {
    client.call(CompletionRequest::new(client.model(), recitation_prompt(title, section)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecitationRecord {
    pub title: u32,
    pub section: String,
    pub call: CallRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub title_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_rank: Option<f64>,
}

/// Recites every sampled section and scores it against all sections of its title in `corpus`.
pub fn recite_all(
    sections: &[UscSection],
    corpus: &[UscSection],
    client: &CompletionClient,
    parallelism: usize,
) -> Vec<RecitationRecord> {
    let titles = by_title(corpus);
    map_bounded(sections, parallelism, |s| {
        let call = recite(s.title, &s.section, client);
        let in_title = titles.get(&s.title).map(Vec::as_slice).unwrap_or(&[]);
        let mut rec = RecitationRecord {
            title: s.title,
            section: s.section.clone(),
            bleu: None,
            rank: None,
            title_size: in_title.len(),
            normalized_rank: None,
            call,
        };
        if let Some(text) = rec.call.response.as_ref().map(|r| r.text.clone()) {
            rec.bleu = Some(unpenalized_bleu(&text, &s.body));
            if let Ok((rank, norm)) = rank_metrics(&text, in_title, &s.section) {
                rec.rank = Some(rank);
                rec.normalized_rank = Some(norm);
            }
        }
        rec
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecitationSummary {
    pub scored: usize,
    pub mean_bleu: f64,
    pub median_bleu: f64,
    pub above_20: usize,
    pub recall_at_1: f64,
    pub recall_at_5: f64,
    pub mean_normalized_rank: f64,
    pub median_normalized_rank: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

impl RecitationSummary {
    pub fn from_records(records: &[RecitationRecord]) -> Self {
        let bleus: Vec<f64> = records.iter().filter_map(|r| r.bleu).collect();
        let ranks: Vec<usize> = records.iter().filter_map(|r| r.rank).collect();
        let norms: Vec<f64> = records.iter().filter_map(|r| r.normalized_rank).collect();
        RecitationSummary {
            scored: bleus.len(),
            mean_bleu: mean(&bleus),
            median_bleu: median(bleus.clone()),
            above_20: bleus.iter().filter(|&&b| b > 20.0).count(),
            recall_at_1: recall_at_k(&ranks, 1),
            recall_at_5: recall_at_k(&ranks, 5),
            mean_normalized_rank: mean(&norms),
            median_normalized_rank: median(norms),
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "recited: {}\nunpenalized BLEU mean {:.2}, median {:.2}, above 20: {}\nrecall@1 {:.3}, recall@5 {:.3}\nnormalized rank mean {:.3}, median {:.3}\n",
            self.scored,
            self.mean_bleu,
            self.median_bleu,
            self.above_20,
            self.recall_at_1,
            self.recall_at_5,
            self.mean_normalized_rank,
            self.median_normalized_rank
        )
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "scored",
            "mean_bleu",
            "median_bleu",
            "above_20",
            "recall_at_1",
            "recall_at_5",
            "mean_normalized_rank",
            "median_normalized_rank",
        ])
        .expect("in-memory write");
        w.write_record([
            self.scored.to_string(),
            format!("{:.4}", self.mean_bleu),
            format!("{:.4}", self.median_bleu),
            self.above_20.to_string(),
            format!("{:.4}", self.recall_at_1),
            format!("{:.4}", self.recall_at_5),
            format!("{:.4}", self.mean_normalized_rank),
            format!("{:.4}", self.median_normalized_rank),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
