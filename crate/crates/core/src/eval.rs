//! Running prompts through a backend and scoring the answers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{map_bounded, CallRecord, CompletionClient, CompletionRequest};
use crate::oracle::{Rendering, TestItem};
use crate::prompt::{
    build_two_shot, build_zero_shot, parse_answer, ExtractedAnswer, PhrasingVariant, PromptBundle, PromptError, Verdict,
};
use crate::rng;
use crate::statute::TermMode;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    FalsePositive,
    FalseNegative,
    Indeterminate,
    /// The backend call itself failed; excluded from accuracy.
    Failed,
}

impl Outcome {
    pub fn score(expected: Verdict, predicted: Verdict) -> Outcome {
        match (expected.is_positive(), predicted.is_positive()) {
            (_, None) => Outcome::Indeterminate,
            (Some(e), Some(p)) if e == p => Outcome::Correct,
            (_, Some(true)) => Outcome::FalsePositive,
            (_, Some(false)) => Outcome::FalseNegative,
        }
    }
}

/// Ordered key/value labels grouping records for aggregation.
pub type Stratum = Vec<(String, String)>;

/// Full transcript and verdict for one test item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub stratum: Stratum,
    pub calls: Vec<CallRecord>,
    pub expected: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted: Option<ExtractedAnswer>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// When the second, answer-extraction call is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionPolicy {
    Always,
    WhenIndeterminate,
}

/// Sends the stage-1 prompt, then the extraction prompt per `policy`, and scores the result.
pub fn run_two_stage(
    client: &CompletionClient,
    bundle: &PromptBundle,
    policy: ExtractionPolicy,
    expected: Verdict,
    id: String,
    stratum: Stratum,
) -> EvalRecord {
    let failed = |calls: Vec<CallRecord>, error: String| EvalRecord {
        id: id.clone(),
        stratum: stratum.clone(),
        calls,
        expected,
        extracted: None,
        outcome: Outcome::Failed,
        error: Some(error),
    };
    let first = client.call(CompletionRequest::new(client.model(), bundle.stage1_prompt.clone()));
    let Some(first_text) = first.response.as_ref().map(|r| r.text.clone()) else {
        let err = first.error.clone().unwrap_or_default();
        return failed(vec![first], err);
    };
    let mut answer = parse_answer(&first_text, bundle.expects);
    let mut calls = vec![first];
    if policy == ExtractionPolicy::Always || answer.verdict == Verdict::Indeterminate {
        let second = client.call(CompletionRequest::extraction(client.model(), bundle.extraction_prompt(&first_text)));
        let Some(second_text) = second.response.as_ref().map(|r| r.text.clone()) else {
            let err = second.error.clone().unwrap_or_default();
            calls.push(second);
            return failed(calls, err);
        };
        calls.push(second);
        let extracted = parse_answer(&second_text, bundle.expects);
        if extracted.verdict != Verdict::Indeterminate || answer.verdict == Verdict::Indeterminate {
            answer = ExtractedAnswer { verdict: extracted.verdict, via_extraction_stage: true };
        }
    }
    EvalRecord {
        id,
        stratum,
        calls,
        expected,
        extracted: Some(answer),
        outcome: Outcome::score(expected, answer.verdict),
        error: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// 0 or 2.
    pub shots: u8,
    pub phrasing: PhrasingVariant,
    /// Overrides each item's rendering when set.
    pub rendering: Option<Rendering>,
    /// Seeds the per-item choice of two-shot examples.
    pub seed: u64,
    pub extraction: ExtractionPolicy,
}

impl SyntheticConfig {
    /// Zero-shot always extracts; two-shot only when the first answer is unclear.
    pub fn new(shots: u8, phrasing: PhrasingVariant, seed: u64) -> Self {
        let extraction = if shots == 0 { ExtractionPolicy::Always } else { ExtractionPolicy::WhenIndeterminate };
        SyntheticConfig { shots, phrasing, rendering: None, seed, extraction }
    }
}

pub fn synthetic_stratum(item: &TestItem, shots: u8) -> Stratum {
    vec![
        ("width".into(), item.meta.width.to_string()),
        ("depth".into(), item.meta.depth.to_string()),
        ("terms".into(), item.meta.term_mode.to_string()),
        ("rendering".into(), item.rendering.to_string()),
        ("shots".into(), shots.to_string()),
    ]
}

pub fn expected_verdict(applicable: bool) -> Verdict {
    if applicable {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

/// Builds the prompt for `item` under `config`.
pub fn synthetic_prompt(item: &TestItem, config: &SyntheticConfig) -> Result<PromptBundle, EvalError> {
    match config.shots {
        0 => Ok(build_zero_shot(item, config.phrasing)?),
        2 => Ok(build_two_shot(item, &mut rng::stream(config.seed, item.id as u64))?),
        n => Err(EvalError::Config(format!("unsupported shot count {n} (expected 0 or 2)"))),
    }
}

/// Evaluates every item; all prompts are built before any backend call so
/// configuration errors surface up front. Records come back in item order.
pub fn evaluate_synthetic(
    items: &[TestItem],
    config: &SyntheticConfig,
    client: &CompletionClient,
    parallelism: usize,
) -> Result<Vec<EvalRecord>, EvalError> {
    let prepared: Vec<(TestItem, PromptBundle)> = items
        .iter()
        .map(|item| {
            let item = match config.rendering {
                Some(r) if r != item.rendering => item.with_rendering(r),
                _ => item.clone(),
            };
            if config.shots == 2 && (item.rendering != Rendering::Statute || item.meta.term_mode != TermMode::Nonce) {
                return Err(EvalError::Config("two-shot prompts need statute rendering and nonce terms".into()));
            }
            let bundle = synthetic_prompt(&item, config)?;
            Ok((item, bundle))
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(map_bounded(&prepared, parallelism, |(item, bundle)| {
        run_two_stage(
            client,
            bundle,
            config.extraction,
            expected_verdict(item.label.applicable),
            item.id.to_string(),
            synthetic_stratum(item, config.shots),
        )
    }))
}
