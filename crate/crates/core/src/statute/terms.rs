//! Invented terms for synthetic statutes: pronounceable nonces and letter+digit ids.

use std::collections::HashSet;
use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::StatuteError;
use crate::rng::pick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermMode {
    Nonce,
    Ids,
}

impl std::fmt::Display for TermMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TermMode::Nonce => "nonce",
            TermMode::Ids => "ids",
        })
    }
}

impl std::str::FromStr for TermMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonce" | "nonces" => Ok(TermMode::Nonce),
            "ids" | "id" => Ok(TermMode::Ids),
            other => Err(format!("unknown term mode `{other}` (expected nonce or ids)")),
        }
    }
}

/// Distinct id terms available: one letter times one repeated digit.
pub const ID_SPACE: usize = 26 * 10;

pub const NONCE_MIN_LEN: usize = 5;
pub const NONCE_MAX_LEN: usize = 16;

static WORD_LIST: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| include_str!("../../assets/english_words.txt").lines().collect());

/// True when `word` is in the bundled English word list.
pub fn is_english_word(word: &str) -> bool {
    WORD_LIST.contains(word)
}

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "b", "d", "l", "m",
    "p", "r", "t", "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gl", "gr", "pl", "pr", "sh", "sp", "st", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "a", "e", "i", "o", "a", "e", "ea", "ou", "ie"];
const MEDIALS: &[&str] = &["n", "r", "l", "s", "m", "x"];
const CODAS: &[&str] = &["n", "r", "s", "l", "m", "nd", "nt", "rt", "st", "ck", "ss", "ng", "x"];
const ENDINGS: &[&str] = &["", "", "e", "es", "s", "le", "ery", "ary", "ity", "on", "ess", "el", "ney", "ers"];

fn nonce_candidate<R: Rng + ?Sized>(rng: &mut R) -> String {
    let syllables = 2 + pick(rng, 3);
    let mut word = String::new();
    let mut after_consonant = false;
    for i in 0..syllables {
        // a word may open on a vowel; later onsets stay single letters after a medial consonant
        if i == 0 {
            if pick(rng, 4) != 0 {
                word.push_str(ONSETS[pick(rng, ONSETS.len())]);
            }
        } else {
            let onset = ONSETS[pick(rng, ONSETS.len())];
            if after_consonant && onset.len() > 1 {
                word.push_str(&onset[..1]);
            } else {
                word.push_str(onset);
            }
        }
        word.push_str(VOWELS[pick(rng, VOWELS.len())]);
        after_consonant = i + 1 < syllables && pick(rng, 3) == 0;
        if after_consonant {
            word.push_str(MEDIALS[pick(rng, MEDIALS.len())]);
        }
    }
    if pick(rng, 2) == 0 {
        word.push_str(CODAS[pick(rng, CODAS.len())]);
    }
    let ending = ENDINGS[pick(rng, ENDINGS.len())];
    // keep vowel-initial endings off vowel-final stems ("ae", "oity") and avoid tripled letters
    let vowel_clash = ending.starts_with(|c| "aeiou".contains(c)) && word.ends_with(|c| "aeiou".contains(c));
    let repeat = ending.chars().next().is_some_and(|c| word.ends_with(c));
    if !vowel_clash && !repeat {
        word.push_str(ending);
    }
    word
}

fn id_term(index: usize) -> String {
    let letter = (b'a' + (index / 10) as u8) as char;
    let digit = (b'0' + (index % 10) as u8) as char;
    format!("{letter}{digit}{digit}")
}

/// Draws `count` pairwise-distinct terms.
pub fn generate_terms<R: Rng + ?Sized>(mode: TermMode, count: usize, rng: &mut R) -> Result<Vec<String>, StatuteError> {
    match mode {
        TermMode::Ids => {
            if count > ID_SPACE {
                return Err(StatuteError::TermSpaceExhausted { requested: count, available: ID_SPACE });
            }
            // partial Fisher-Yates over the id space
            let mut pool: Vec<usize> = (0..ID_SPACE).collect();
            let mut out = Vec::with_capacity(count);
            for i in 0..count {
                let j = i + pick(rng, ID_SPACE - i);
                pool.swap(i, j);
                out.push(id_term(pool[i]));
            }
            Ok(out)
        }
        TermMode::Nonce => {
            let mut seen = HashSet::with_capacity(count);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let candidate = nonce_candidate(rng);
                if !(NONCE_MIN_LEN..=NONCE_MAX_LEN).contains(&candidate.len()) || is_english_word(&candidate) {
                    continue;
                }
                if seen.insert(candidate.clone()) {
                    out.push(candidate);
                }
            }
            Ok(out)
        }
    }
}

/// True for id-shaped terms such as `f77`.
pub fn is_id_term(term: &str) -> bool {
    let b = term.as_bytes();
    b.len() == 3 && b[0].is_ascii_lowercase() && b[1].is_ascii_digit() && b[1] == b[2]
}

/// Article for "<Name> is a/an <term>".
///
/// Id terms are read letter by letter, so the choice follows the spoken letter
/// name ("an f77", "a b22"); other terms follow their first letter.
pub fn indefinite_article(term: &str) -> &'static str {
    let first = term.chars().next().map(|c| c.to_ascii_lowercase());
    let vowel_sound = if is_id_term(term) {
        matches!(first, Some('a' | 'e' | 'f' | 'h' | 'i' | 'l' | 'm' | 'n' | 'o' | 'r' | 's' | 'x'))
    } else {
        matches!(first, Some('a' | 'e' | 'i' | 'o' | 'u'))
    };
    if vowel_sound {
        "an"
    } else {
        "a"
    }
}

/// Upper-cases the first character, as in provision headings.
pub fn capitalize(term: &str) -> String {
    let mut chars = term.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
