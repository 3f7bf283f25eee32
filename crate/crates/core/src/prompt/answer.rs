use serde::{Deserialize, Serialize};

use super::Expects;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
    Entailment,
    Contradiction,
    Indeterminate,
}

impl Verdict {
    /// Yes and Entailment count as the positive class.
    pub fn is_positive(self) -> Option<bool> {
        match self {
            Verdict::Yes | Verdict::Entailment => Some(true),
            Verdict::No | Verdict::Contradiction => Some(false),
            Verdict::Indeterminate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedAnswer {
    pub verdict: Verdict,
    pub via_extraction_stage: bool,
}

fn words(lower: &str) -> impl Iterator<Item = &str> {
    lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

fn decide<T>(positive: bool, negative: bool, pos: T, neg: T) -> Option<T> {
    match (positive, negative) {
        (true, false) => Some(pos),
        (false, true) => Some(neg),
        _ => None,
    }
}

/// Reads a verdict off a completion. Never fails: a completion carrying both
/// answer families, or neither, is `Indeterminate`.
///
/// For yes/no questions the "does apply" / "does NOT apply" phrases are checked
/// first, then standalone `yes` / `no` tokens ("None" is not "no").
pub fn parse_answer(text: &str, expects: Expects) -> ExtractedAnswer {
    let lower = text.to_lowercase();
    let verdict = match expects {
        Expects::YesNo => {
            let neg = lower.contains("does not apply");
            let pos = lower.contains("does apply");
            if pos || neg {
                decide(pos, neg, Verdict::Yes, Verdict::No)
            } else {
                let (mut yes, mut no) = (false, false);
                for w in words(&lower) {
                    yes |= w == "yes";
                    no |= w == "no";
                }
                decide(yes, no, Verdict::Yes, Verdict::No)
            }
        }
        Expects::EntailContra => {
            let (mut ent, mut con) = (false, false);
            for w in words(&lower) {
                ent |= w == "entailment";
                con |= w == "contradiction";
            }
            decide(ent, con, Verdict::Entailment, Verdict::Contradiction)
        }
    };
    ExtractedAnswer { verdict: verdict.unwrap_or(Verdict::Indeterminate), via_extraction_stage: false }
}
