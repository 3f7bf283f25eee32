//! Binomial confidence intervals, Welch's test, accuracy cells and summaries.

mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use thiserror::Error;

pub use report::{aggregate, render_csv, render_json, render_text, ReportFormat, Summary, SummaryRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("total must be at least {0}")]
    TooFew(u64),
    #[error("correct ({correct}) exceeds total ({total})")]
    CountOutOfRange { correct: u64, total: u64 },
    #[error("confidence must be in (0, 1), got {0}")]
    BadConfidence(f64),
    #[error("cannot parse accuracy cell {0:?}")]
    BadCell(String),
}

pub const DEFAULT_CONFIDENCE: f64 = 0.90;

fn check(correct: u64, total: u64, min: u64) -> Result<(), StatsError> {
    if total < min {
        return Err(StatsError::TooFew(min));
    }
    if correct > total {
        return Err(StatsError::CountOutOfRange { correct, total });
    }
    Ok(())
}

/// Two-sided normal quantile for `confidence` (1.6449 at 0.90).
pub fn z_value(confidence: f64) -> Result<f64, StatsError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::BadConfidence(confidence));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

/// Wald interval half-width in percentage points.
pub fn wald_ci_half_width(correct: u64, total: u64, confidence: f64) -> Result<f64, StatsError> {
    check(correct, total, 1)?;
    let p = correct as f64 / total as f64;
    Ok(z_value(confidence)? * (p * (1.0 - p) / total as f64).sqrt() * 100.0)
}

/// Half-widths are shown rounded up to a whole point.
pub fn display_half_width(half_width: f64) -> u64 {
    // guard against 9.000000000001 style noise
    (half_width - 1e-9).ceil().max(0.0) as u64
}

/// One-sided p-value that sample 1's success rate exceeds sample 2's, from
/// Welch's t-test on the per-case 0/1 outcomes.
pub fn welch_one_sided_p(c1: u64, n1: u64, c2: u64, n2: u64) -> Result<f64, StatsError> {
    check(c1, n1, 2)?;
    check(c2, n2, 2)?;
    let stats = |c: u64, n: u64| {
        let n = n as f64;
        let mean = c as f64 / n;
        (mean, mean * (1.0 - mean) * n / (n - 1.0), n)
    };
    let (m1, v1, n1) = stats(c1, n1);
    let (m2, v2, n2) = stats(c2, n2);
    let (s1, s2) = (v1 / n1, v2 / n2);
    let se2 = s1 + s2;
    if se2 == 0.0 {
        return Ok(match m1.partial_cmp(&m2) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => 1.0,
            _ => 0.5,
        });
    }
    let t = (m1 - m2) / se2.sqrt();
    let df = se2 * se2 / (s1 * s1 / (n1 - 1.0) + s2 * s2 / (n2 - 1.0));
    // Upper tail through the regularized incomplete beta so that tiny p-values do not round to 0.
    let x = df / (df + t * t);
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, x);
    Ok(if t > 0.0 { tail } else { 1.0 - tail })
}

/// Percent correct rounded half away from zero.
pub fn percent(correct: u64, total: u64) -> u64 {
    if total == 0 {
        return 0;
    }
    (100.0 * correct as f64 / total as f64).round() as u64
}

/// Accuracy with its confidence half-width, rendered like `60 ± 10 (43/72)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub correct: u64,
    pub total: u64,
    /// Percentage points at [`DEFAULT_CONFIDENCE`] unless built otherwise.
    pub ci_half_width_pts: f64,
}

impl AccuracyCell {
    pub fn new(correct: u64, total: u64) -> Result<Self, StatsError> {
        Self::with_confidence(correct, total, DEFAULT_CONFIDENCE)
    }

    pub fn with_confidence(correct: u64, total: u64, confidence: f64) -> Result<Self, StatsError> {
        let ci_half_width_pts = wald_ci_half_width(correct, total, confidence)?;
        Ok(AccuracyCell { correct, total, ci_half_width_pts })
    }

    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn percent(&self) -> u64 {
        percent(self.correct, self.total)
    }

    /// `78 (779/1000)`.
    pub fn short(&self) -> String {
        format!("{} ({}/{})", self.percent(), self.correct, self.total)
    }
}

impl fmt::Display for AccuracyCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {} ({}/{})",
            self.percent(),
            display_half_width(self.ci_half_width_pts),
            self.correct,
            self.total
        )
    }
}

impl FromStr for AccuracyCell {
    type Err = StatsError;

    /// Accepts both `P ± H (c/t)` and `P (c/t)`; counts are authoritative.
    fn from_str(s: &str) -> Result<Self, StatsError> {
        let bad = || StatsError::BadCell(s.to_string());
        let open = s.rfind('(').ok_or_else(bad)?;
        let inner = s[open + 1..].trim().strip_suffix(')').ok_or_else(bad)?;
        let (c, t) = inner.split_once('/').ok_or_else(bad)?;
        let correct: u64 = c.trim().parse().map_err(|_| bad())?;
        let total: u64 = t.trim().parse().map_err(|_| bad())?;
        let head = s[..open].trim();
        let (pct, half) = match head.split_once('±') {
            Some((p, h)) => (p.trim(), Some(h.trim())),
            None => (head, None),
        };
        let pct: u64 = pct.parse().map_err(|_| bad())?;
        let cell = AccuracyCell::new(correct, total).map_err(|_| bad())?;
        if pct != cell.percent() {
            return Err(bad());
        }
        if let Some(h) = half {
            h.parse::<u64>().map_err(|_| bad())?;
        }
        Ok(cell)
    }
}

/// How the incorrect answers went wrong.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTaxonomy {
    pub false_positive: u64,
    pub false_negative: u64,
    pub indeterminate: u64,
}

impl ErrorTaxonomy {
    pub fn errors(&self) -> u64 {
        self.false_positive + self.false_negative + self.indeterminate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wald_examples() {
        let h = wald_ci_half_width(43, 72, 0.9).unwrap();
        assert!((h - 9.51).abs() < 0.01, "{h}");
        assert_eq!(display_half_width(h), 10);
        assert!((wald_ci_half_width(36, 72, 0.9).unwrap() - 9.69).abs() < 0.01);
        assert_eq!(wald_ci_half_width(0, 5, 0.9).unwrap(), 0.0);
        assert_eq!(wald_ci_half_width(0, 0, 0.9), Err(StatsError::TooFew(1)));
        assert!((z_value(0.9).unwrap() - 1.6449).abs() < 1e-4);
        assert_eq!(display_half_width(9.0), 9);
    }

    #[test]
    fn welch_examples() {
        let p = welch_one_sided_p(71, 100, 59, 100).unwrap();
        assert!((p - 0.038).abs() < 0.003, "{p}");
        let p = welch_one_sided_p(71, 100, 50, 100).unwrap();
        assert!((p - 0.0011).abs() < 0.0003, "{p}");
        assert_eq!(welch_one_sided_p(30, 60, 30, 60).unwrap(), 0.5);
        assert_eq!(welch_one_sided_p(5, 5, 5, 5).unwrap(), 0.5);
        assert!(welch_one_sided_p(1, 1, 1, 2).is_err());
    }

    #[test]
    fn cells() {
        let cell = AccuracyCell::new(43, 72).unwrap();
        assert_eq!(cell.to_string(), "60 ± 10 (43/72)");
        assert_eq!(AccuracyCell::new(779, 1000).unwrap().short(), "78 (779/1000)");
        assert_eq!(AccuracyCell::new(53, 72).unwrap().to_string(), "74 ± 9 (53/72)");
        let parsed: AccuracyCell = "78 (779/1000)".parse().unwrap();
        assert_eq!((parsed.correct, parsed.total), (779, 1000));
        assert!("61 ± 16 (17/28)".parse::<AccuracyCell>().is_ok());
        assert!("99 (1/2)".parse::<AccuracyCell>().is_err());
        assert!("garbage".parse::<AccuracyCell>().is_err());
    }

    proptest! {
        #[test]
        fn cell_round_trip(total in 1u64..5000, frac in 0.0f64..=1.0) {
            let correct = (frac * total as f64).floor() as u64;
            let cell = AccuracyCell::new(correct, total).unwrap();
            let back: AccuracyCell = cell.to_string().parse().unwrap();
            prop_assert_eq!((back.correct, back.total), (correct, total));
            let back: AccuracyCell = cell.short().parse().unwrap();
            prop_assert_eq!((back.correct, back.total), (correct, total));
        }

        #[test]
        fn welch_antitone_in_c1(n1 in 2u64..200, n2 in 2u64..200, f2 in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let c2 = (f2 * n2 as f64) as u64;
            let (lo, hi) = {
                let x = (a * n1 as f64) as u64;
                let y = (b * n1 as f64) as u64;
                (x.min(y), x.max(y))
            };
            let p_lo = welch_one_sided_p(lo, n1, c2, n2).unwrap();
            let p_hi = welch_one_sided_p(hi, n1, c2, n2).unwrap();
            prop_assert!(p_hi <= p_lo + 1e-12);
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }

        #[test]
        fn welch_strictly_inside_unit_interval(n in 3u64..200, c1 in 1u64..1000, c2 in 1u64..1000) {
            let (c1, c2) = (c1 % (n - 1) + 1, c2 % (n - 1) + 1);
            let p = welch_one_sided_p(c1, n, c2, n).unwrap();
            // 1 - p can fall below f64 resolution when sample 1 is far worse
            prop_assert!(p > 0.0 && p <= 1.0);
            if c1 >= c2 {
                prop_assert!(p <= 0.5);
            } else {
                prop_assert!(p > 0.5);
            }
        }

        #[test]
        fn wald_peaks_at_half(n in 2u64..2000, c in 0u64..2000) {
            let c = c % (n + 1);
            let h = wald_ci_half_width(c, 2 * n, 0.9).unwrap();
            let peak = wald_ci_half_width(n, 2 * n, 0.9).unwrap();
            prop_assert!(h <= peak + 1e-12);
            prop_assert!(wald_ci_half_width(2 * n, 4 * n, 0.9).unwrap() < peak);
        }
    }
}
