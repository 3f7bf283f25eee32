//! Offline backends for tests and dry runs.

use std::collections::HashMap;
use std::path::Path;
use std::sync::LazyLock;

use rand::Rng;
use regex::Regex;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, CompletionRequest, CompletionResponse};
use crate::oracle::{applies, next_sibling, parse_rendered, OracleError, Target};
use crate::prompt::YES_NO_SUFFIX;
use crate::rng;
use crate::statute::{indefinite_article, is_id_term, list_of_terms, parse_citation, DefNode, DefTree, TermMode};

/// Returns the same text for every prompt.
#[derive(Debug, Clone)]
pub struct FixedBackend {
    text: String,
}

impl FixedBackend {
    pub fn new(text: impl Into<String>) -> Self {
        FixedBackend { text: text.into() }
    }
}

impl Backend for FixedBackend {
    fn id(&self) -> String {
        format!("fixed:{}", self.text)
    }

    fn complete(&self, _request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        Ok(CompletionResponse::new(self.text.clone(), self.id()))
    }
}

/// Delegates to a closure.
pub struct FnBackend<F> {
    id: String,
    f: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&CompletionRequest) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(id: impl Into<String>, f: F) -> Self {
        FnBackend { id: id.into(), f }
    }
}

impl<F> Backend for FnBackend<F>
where
    F: Fn(&CompletionRequest) -> Result<String, BackendError> + Send + Sync,
{
    fn id(&self) -> String {
        self.id.clone()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (self.f)(request).map(|text| CompletionResponse::new(text, self.id.clone()))
    }
}

/// Looks prompts up in a prompt-to-completion table.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    table: HashMap<String, String>,
}

fn collect_pairs(value: &Value, out: &mut HashMap<String, String>) {
    if let (Some(p), Some(c)) = (value.get("prompt").and_then(Value::as_str), value.get("completion").and_then(Value::as_str)) {
        out.insert(p.to_string(), c.to_string());
    }
    let prompt = value.pointer("/request/prompt").and_then(Value::as_str);
    let text = value.pointer("/response/text").and_then(Value::as_str);
    if let (Some(p), Some(t)) = (prompt, text) {
        out.insert(p.to_string(), t.to_string());
    }
    if let Some(calls) = value.get("calls").and_then(Value::as_array) {
        for call in calls {
            collect_pairs(call, out);
        }
    }
}

impl ScriptedBackend {
    pub fn from_pairs<I, P, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (P, C)>,
        P: Into<String>,
        C: Into<String>,
    {
        ScriptedBackend { table: pairs.into_iter().map(|(p, c)| (p.into(), c.into())).collect() }
    }

    /// Reads JSON lines holding `{"prompt", "completion"}` pairs, call records
    /// (`{"request": {"prompt"}, "response": {"text"}}`) or evaluation records
    /// with a `calls` array.
    pub fn from_jsonl(path: &Path) -> std::io::Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let mut table = HashMap::new();
        for (no, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), no + 1))
            })?;
            collect_pairs(&value, &mut table);
        }
        Ok(ScriptedBackend { table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Backend for ScriptedBackend {
    fn id(&self) -> String {
        "scripted".into()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        self.table
            .get(&request.prompt)
            .map(|t| CompletionResponse::new(t.clone(), self.id()))
            .ok_or_else(|| BackendError::UnknownPrompt(request.prompt.chars().take(60).collect()))
    }
}

const DEFAULT_VOCABULARY: &[&str] = &[
    "Yes", "No", "Entailment", "Contradiction", "the", "section", "applies", "does", "not", "because", "term",
    "means", "maybe", "so", "any", "is", "a", "of", "it", "unclear",
];

/// Seeded random word salad; the same prompt always gets the same text.
#[derive(Debug, Clone)]
pub struct RandomTextBackend {
    seed: u64,
    vocabulary: Vec<String>,
    min_words: usize,
    max_words: usize,
}

impl RandomTextBackend {
    pub fn new(seed: u64) -> Self {
        RandomTextBackend {
            seed,
            vocabulary: DEFAULT_VOCABULARY.iter().map(|w| w.to_string()).collect(),
            min_words: 1,
            max_words: 12,
        }
    }

    pub fn with_vocabulary(mut self, vocabulary: Vec<String>, min_words: usize, max_words: usize) -> Self {
        assert!(!vocabulary.is_empty() && min_words <= max_words);
        self.vocabulary = vocabulary;
        self.min_words = min_words;
        self.max_words = max_words;
        self
    }
}

impl Backend for RandomTextBackend {
    fn id(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let digest = Sha256::digest(request.prompt.as_bytes());
        let salt = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut r = rng::seeded(self.seed ^ salt);
        let n = r.gen_range(self.min_words..=self.max_words);
        let words: Vec<&str> = (0..n).map(|_| self.vocabulary[rng::pick(&mut r, self.vocabulary.len())].as_str()).collect();
        Ok(CompletionResponse::new(format!(" {}", words.join(" ")), self.id()))
    }
}

static FACT_QUESTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Z][A-Za-z]*) is an? ([a-z0-9]+)\. ([^?]*\?)").expect("valid regex"));
static SUBJECT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(section \d+(?:\([0-9A-Za-z]+\))*)|\bsentence (\d+)\b").expect("valid regex"));

/// Reads the synthetic statute out of a zero-shot, two-shot or extraction
/// prompt and answers from the ground truth. With `off_by_one`, it reasons
/// about the sibling after the asked provision (or the next sentence) while
/// still citing the one asked about.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleBackend {
    off_by_one: bool,
}

struct Question {
    tree: DefTree,
    name: String,
    term: String,
    target: Target,
}

fn unparseable(msg: impl Into<String>) -> BackendError {
    BackendError::UnparseablePrompt(msg.into())
}

fn rebuild_tree(text: &str) -> Result<DefTree, BackendError> {
    let parsed = parse_rendered(text).map_err(|e| unparseable(e.to_string()))?;
    let defs: HashMap<&str, &[String]> =
        parsed.definitions().iter().map(|d| (d.definiendum.as_str(), d.rhs.as_slice())).collect();
    let root = parsed
        .definitions()
        .iter()
        .map(|d| d.definiendum.as_str())
        .find(|t| !parsed.definitions().iter().any(|d| d.rhs.iter().any(|r| r == t)))
        .ok_or_else(|| unparseable("no root term"))?;
    fn build(term: &str, defs: &HashMap<&str, &[String]>, budget: &mut usize) -> Result<DefNode, BackendError> {
        *budget = budget.checked_sub(1).ok_or_else(|| unparseable("cyclic definitions"))?;
        let children = match defs.get(term) {
            Some(rhs) => rhs.iter().map(|t| build(t, defs, budget)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        Ok(DefNode::new(term, children))
    }
    let mut budget = 10_000;
    let root = build(root, &defs, &mut budget)?;
    let mode = if defs.keys().all(|t| is_id_term(t)) { TermMode::Ids } else { TermMode::Nonce };
    DefTree::from_root(root, mode, 0).map_err(|e| unparseable(e.to_string()))
}

fn parse_question(prompt: &str) -> Result<Question, BackendError> {
    let (text, _) = prompt.split_once("\n\n").ok_or_else(|| unparseable("no blank line after the statute"))?;
    let tree = rebuild_tree(text)?;
    let caps = prompt
        .split("\n\n")
        .skip(1)
        .filter_map(|p| FACT_QUESTION.captures(p))
        .last()
        .ok_or_else(|| unparseable("no fact and question"))?;
    let subject = SUBJECT.captures(&caps[3]).ok_or_else(|| unparseable("question names no provision"))?;
    let target = match (subject.get(1), subject.get(2)) {
        (Some(c), _) => Target::Provision(parse_citation(c.as_str()).map_err(|e| unparseable(e.to_string()))?),
        (None, Some(k)) => Target::Sentence(k.as_str().parse().map_err(|_| unparseable("bad sentence number"))?),
        _ => unreachable!("regex has two alternatives"),
    };
    Ok(Question { tree, name: caps[1].to_string(), term: caps[2].to_string(), target })
}

fn capitalized_subject(target: &Target) -> String {
    match target {
        Target::Provision(c) => c.to_sentence_start(),
        Target::Sentence(k) => format!("Sentence {k}"),
    }
}

impl OracleBackend {
    pub fn new() -> Self {
        OracleBackend { off_by_one: false }
    }

    pub fn off_by_one() -> Self {
        OracleBackend { off_by_one: true }
    }

    fn reasoned_about(&self, q: &Question) -> Result<Target, BackendError> {
        if self.off_by_one {
            next_sibling(&q.tree, &q.target).map_err(|e| unparseable(e.to_string()))
        } else {
            Ok(q.target.clone())
        }
    }

    fn verdict(&self, q: &Question) -> Result<bool, BackendError> {
        let used = self.reasoned_about(q)?;
        match applies(&q.tree, &used, &q.term) {
            Ok(truth) => Ok(truth.applicable),
            Err(OracleError::UnknownTerm(_)) => Ok(false),
            Err(e) => Err(unparseable(e.to_string())),
        }
    }

    fn explanation(&self, q: &Question) -> Result<String, BackendError> {
        let used = self.reasoned_about(q)?;
        let indices = crate::oracle::resolve_target(&q.tree, &used).map_err(|e| unparseable(e.to_string()))?;
        let defs: Vec<_> = indices.iter().map(|&i| &q.tree.definitions()[i]).collect();
        let asked = q.target.to_string();
        let name = &q.name;
        let holds = defs.iter().find(|d| d.rhs_terms.contains(&q.term));
        let conclusion = match holds {
            Some(_) => format!(
                "{name} is {} {}, so {asked} does apply to {name}.",
                indefinite_article(&q.term),
                q.term
            ),
            None => format!("{name} is none of these, so {asked} does NOT apply to {name}."),
        };
        let premise = match defs.as_slice() {
            [d] => format!("{} says that {} means {}.", capitalized_subject(&q.target), d.definiendum, list_of_terms(&d.rhs_terms)),
            _ => defs
                .iter()
                .map(|d| format!("{} means {}.", capitalize_first(&d.definiendum), list_of_terms(&d.rhs_terms)))
                .collect::<Vec<_>>()
                .join(" "),
        };
        Ok(format!(" {premise} {conclusion}"))
    }
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl Backend for OracleBackend {
    fn id(&self) -> String {
        if self.off_by_one { "off-by-one" } else { "oracle" }.into()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        let text = match request.prompt.strip_suffix(YES_NO_SUFFIX) {
            Some(stage1) => {
                let q = parse_question(stage1)?;
                if self.verdict(&q)? { " Yes." } else { " No." }.to_string()
            }
            None => self.explanation(&parse_question(&request.prompt)?)?,
        };
        Ok(CompletionResponse::new(text, self.id()))
    }
}
