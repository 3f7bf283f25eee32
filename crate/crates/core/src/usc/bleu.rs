use std::collections::HashMap;

pub const MAX_ORDER: usize = 4;
/// Stand-in for a zero n-gram precision.
pub const ZERO_PRECISION: f64 = 1e-9;

/// Punctuation becomes its own token, then whitespace splits. Case is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 16);
    for c in text.chars() {
        if c.is_alphanumeric() || c.is_whitespace() {
            spaced.push(c);
        } else {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram precisions for every order the candidate is long enough to have.
pub fn modified_precisions(candidate: &[String], reference: &[String]) -> Vec<f64> {
    (1..=MAX_ORDER.min(candidate.len()))
        .map(|n| {
            let cand = ngram_counts(candidate, n);
            let refc = ngram_counts(reference, n);
            let total: usize = cand.values().sum();
            let clipped: usize = cand.iter().map(|(g, c)| (*c).min(refc.get(g).copied().unwrap_or(0))).sum();
            clipped as f64 / total as f64
        })
        .collect()
}

fn geometric_mean_score(precisions: &[f64]) -> f64 {
    if precisions.is_empty() {
        return 0.0;
    }
    let log_sum: f64 = precisions.iter().map(|&p| if p > 0.0 { p.ln() } else { ZERO_PRECISION.ln() }).sum();
    (log_sum / precisions.len() as f64).exp() * 100.0
}

/// BLEU without the brevity penalty, 0 to 100.
pub fn unpenalized_bleu(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    geometric_mean_score(&modified_precisions(&c, &r))
}

/// BLEU with the usual brevity penalty, for comparison.
pub fn bleu(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    let score = geometric_mean_score(&modified_precisions(&c, &r));
    if c.is_empty() || c.len() > r.len() {
        score
    } else {
        score * (1.0 - r.len() as f64 / c.len() as f64).exp()
    }
}
