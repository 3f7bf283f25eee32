use std::cmp::Ordering;

use super::{bleu::unpenalized_bleu, UscError, UscSection};

/// Orders section identifiers by numeric prefix, then suffix: 101 < 103 < 103A < 280G < 1001.
pub fn section_order(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
        let num: Option<u64> = s[..digits].parse().ok();
        (num, s[digits..].to_string())
    };
    let (na, sa) = split(a);
    let (nb, sb) = split(b);
    match (na, nb) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| sa.cmp(&sb)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

/// 1-based rank of `true_section` when `title_sections` are sorted by
/// descending unpenalized BLEU against `candidate`, with its normalized rank.
pub fn rank_metrics(candidate: &str, title_sections: &[&UscSection], true_section: &str) -> Result<(usize, f64), UscError> {
    if title_sections.len() < 2 {
        return Err(UscError::TooFewSections(title_sections.len()));
    }
    let mut scored: Vec<(f64, &str)> =
        title_sections.iter().map(|s| (unpenalized_bleu(candidate, &s.body), s.section.as_str())).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| section_order(a.1, b.1)));
    let rank = scored
        .iter()
        .position(|(_, s)| *s == true_section)
        .ok_or_else(|| UscError::SectionNotInTitle(true_section.to_string()))?
        + 1;
    Ok((rank, normalized_rank(rank, scored.len())))
}

/// (rank - 1) / (n - 1).
pub fn normalized_rank(rank: usize, n: usize) -> f64 {
    (rank - 1) as f64 / (n - 1) as f64
}

/// Fraction of ranks at or below `k`.
pub fn recall_at_k(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sec(section: &str, body: &str) -> UscSection {
        UscSection::new(1, section, "", body)
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["1001", "280G", "103A", "103", "101", "b"];
        ids.sort_by(|a, b| section_order(a, b));
        assert_eq!(ids, ["101", "103", "103A", "280G", "1001", "b"]);
    }

    #[test]
    fn ranks() {
        let a = sec("1", "alpha beta gamma delta epsilon");
        let b = sec("2", "zeta eta theta iota kappa");
        let c = sec("3", "alpha beta zeta eta lambda");
        let all = [&a, &b, &c];
        assert_eq!(rank_metrics("alpha beta gamma delta", &all, "1").unwrap(), (1, 0.0));
        assert_eq!(rank_metrics("alpha beta gamma delta", &all, "2").unwrap(), (3, 1.0));
        // all tie at near zero: identifier order decides
        assert_eq!(rank_metrics("xyz", &all, "2").unwrap().0, 2);
        assert!(matches!(rank_metrics("x", &all, "9"), Err(UscError::SectionNotInTitle(_))));
        assert!(matches!(rank_metrics("x", &[&a], "1"), Err(UscError::TooFewSections(1))));
    }

    proptest! {
        #[test]
        fn recall_is_monotone(ranks in proptest::collection::vec(1usize..30, 1..50)) {
            let n = *ranks.iter().max().unwrap();
            let mut prev = 0.0;
            for k in 1..=n {
                let r = recall_at_k(&ranks, k);
                prop_assert!(r >= prev);
                prev = r;
            }
            prop_assert_eq!(recall_at_k(&ranks, n), 1.0);
        }
    }
}
