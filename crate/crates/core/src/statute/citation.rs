//! Provision citations in the U.S. Code numbering style: `section 1001(b)(2)(A)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::StatuteError;

/// Section number used by every synthetic statute.
pub const SECTION_NUMBER: u32 = 1001;

/// Nesting level of a provision below the section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Subsection,
    Paragraph,
    Subparagraph,
    Clause,
    Subclause,
}

impl Level {
    pub const ALL: [Level; 5] = [
        Level::Subsection,
        Level::Paragraph,
        Level::Subparagraph,
        Level::Clause,
        Level::Subclause,
    ];

    /// Zero-based depth below the section (subsection = 0).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Level> {
        Self::ALL.get(index).copied()
    }

    pub fn next(self) -> Option<Level> {
        Self::from_index(self.index() + 1)
    }

    /// Indentation of lines housed at this level in rendered statutes.
    pub fn indent(self) -> usize {
        4 * self.index()
    }

    /// Label of the `ordinal`-th (1-based) provision at this level.
    pub fn label(self, ordinal: usize) -> String {
        assert!(ordinal >= 1, "provision ordinals are 1-based");
        match self {
            Level::Subsection => alpha_label(ordinal, b'a'),
            Level::Paragraph => ordinal.to_string(),
            Level::Subparagraph => alpha_label(ordinal, b'A'),
            Level::Clause => roman(ordinal).to_lowercase(),
            Level::Subclause => roman(ordinal),
        }
    }

    /// Inverse of [`Level::label`]; `None` when the label is not valid at this level.
    pub fn ordinal(self, label: &str) -> Option<usize> {
        match self {
            Level::Subsection => alpha_ordinal(label, b'a'),
            Level::Paragraph => {
                if label.is_empty() || label.starts_with('0') || !label.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                label.parse().ok().filter(|&n: &usize| n >= 1)
            }
            Level::Subparagraph => alpha_ordinal(label, b'A'),
            Level::Clause => {
                if label.bytes().all(|b| b.is_ascii_lowercase()) {
                    roman_ordinal(&label.to_uppercase())
                } else {
                    None
                }
            }
            Level::Subclause => {
                if label.bytes().all(|b| b.is_ascii_uppercase()) {
                    roman_ordinal(label)
                } else {
                    None
                }
            }
        }
    }
}

fn alpha_label(ordinal: usize, base: u8) -> String {
    // a..z, then aa, bb, ... as the Code does for long lists
    let letter = (base + ((ordinal - 1) % 26) as u8) as char;
    std::iter::repeat_n(letter, (ordinal - 1) / 26 + 1).collect()
}

fn alpha_ordinal(label: &str, base: u8) -> Option<usize> {
    let bytes = label.as_bytes();
    let first = *bytes.first()?;
    if !(base..base + 26).contains(&first) || bytes.iter().any(|&b| b != first) {
        return None;
    }
    Some((bytes.len() - 1) * 26 + (first - base) as usize + 1)
}

const ROMAN: [(usize, &str); 13] = [
    (1000, "M"),
    (900, "CM"),
    (500, "D"),
    (400, "CD"),
    (100, "C"),
    (90, "XC"),
    (50, "L"),
    (40, "XL"),
    (10, "X"),
    (9, "IX"),
    (5, "V"),
    (4, "IV"),
    (1, "I"),
];

fn roman(mut n: usize) -> String {
    let mut out = String::new();
    for &(value, digits) in &ROMAN {
        while n >= value {
            out.push_str(digits);
            n -= value;
        }
    }
    out
}

fn roman_ordinal(label: &str) -> Option<usize> {
    if label.is_empty() {
        return None;
    }
    let mut rest = label;
    let mut total = 0;
    for &(value, digits) in &ROMAN {
        while let Some(tail) = rest.strip_prefix(digits) {
            total += value;
            rest = tail;
        }
    }
    // reject non-canonical spellings such as "IIII"
    (rest.is_empty() && roman(total) == label).then_some(total)
}

/// Reference to a provision of a synthetic statute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Citation {
    pub section_number: u32,
    pub path: Vec<(Level, String)>,
}

impl Citation {
    pub fn section() -> Self {
        Citation { section_number: SECTION_NUMBER, path: Vec::new() }
    }

    /// Builds a citation from 1-based ordinals, one per level starting at subsection.
    pub fn from_ordinals(ordinals: &[usize]) -> Self {
        let path = ordinals
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let level = Level::from_index(i).expect("citation deeper than subclause");
                (level, level.label(n))
            })
            .collect();
        Citation { section_number: SECTION_NUMBER, path }
    }

    pub fn ordinals(&self) -> Vec<usize> {
        self.path
            .iter()
            .map(|(level, label)| level.ordinal(label).expect("citation labels are validated on construction"))
            .collect()
    }

    pub fn child(&self, ordinal: usize) -> Citation {
        let level = match self.path.last() {
            None => Level::Subsection,
            Some((level, _)) => level.next().expect("citation deeper than subclause"),
        };
        let mut path = self.path.clone();
        path.push((level, level.label(ordinal)));
        Citation { section_number: self.section_number, path }
    }

    pub fn parent(&self) -> Option<Citation> {
        if self.path.is_empty() {
            return None;
        }
        Some(Citation {
            section_number: self.section_number,
            path: self.path[..self.path.len() - 1].to_vec(),
        })
    }

    /// True when `self` is `other` or lies inside it.
    pub fn is_within(&self, other: &Citation) -> bool {
        self.section_number == other.section_number && self.path.starts_with(&other.path)
    }

    /// `section 1001(b)(2)` with a capitalised first letter, for sentence starts.
    pub fn to_sentence_start(&self) -> String {
        let mut s = self.to_string();
        s.replace_range(0..1, "S");
        s
    }
}

/// Renders `section 1001` followed by one parenthesised label per path element.
pub fn format_citation(c: &Citation) -> String {
    let mut out = format!("section {}", c.section_number);
    for (_, label) in &c.path {
        out.push('(');
        out.push_str(label);
        out.push(')');
    }
    out
}

/// Parses the output of [`format_citation`]; the word "section" is case-insensitive.
pub fn parse_citation(s: &str) -> Result<Citation, StatuteError> {
    let malformed = || StatuteError::MalformedCitation(s.to_string());
    let trimmed = s.trim();
    let head = trimmed.get(..7).ok_or_else(malformed)?;
    if !head.eq_ignore_ascii_case("section") {
        return Err(malformed());
    }
    let rest = trimmed[7..].strip_prefix(' ').ok_or_else(malformed)?;
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    if digits_end == 0 {
        return Err(malformed());
    }
    let section_number: u32 = rest[..digits_end].parse().map_err(|_| malformed())?;
    let mut tail = &rest[digits_end..];
    let mut path = Vec::new();
    while !tail.is_empty() {
        let inner = tail.strip_prefix('(').ok_or_else(malformed)?;
        let close = inner.find(')').ok_or_else(malformed)?;
        let label = &inner[..close];
        let level = Level::from_index(path.len()).ok_or_else(malformed)?;
        level.ordinal(label).ok_or_else(malformed)?;
        path.push((level, label.to_string()));
        tail = &inner[close + 1..];
    }
    Ok(Citation { section_number, path })
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_citation(self))
    }
}

impl FromStr for Citation {
    type Err = StatuteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_citation(s)
    }
}

impl Serialize for Citation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_citation(self))
    }
}

impl<'de> Deserialize<'de> for Citation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_citation(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_follow_the_code_scheme() {
        assert_eq!(Level::Subsection.label(3), "c");
        assert_eq!(Level::Paragraph.label(12), "12");
        assert_eq!(Level::Subparagraph.label(2), "B");
        assert_eq!(Level::Clause.label(4), "iv");
        assert_eq!(Level::Subclause.label(9), "IX");
        assert_eq!(Level::Subsection.label(27), "aa");
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_citation(&Citation::section()), "section 1001");
        assert_eq!(format_citation(&Citation::from_ordinals(&[2])), "section 1001(b)");
        assert_eq!(format_citation(&Citation::from_ordinals(&[3, 2])), "section 1001(c)(2)");
    }

    #[test]
    fn parse_examples() {
        let c = parse_citation("section 1001(c)(3)").unwrap();
        assert_eq!(c.path, vec![(Level::Subsection, "c".into()), (Level::Paragraph, "3".into())]);
        let c = parse_citation("Section 1001(b)(2)(A)").unwrap();
        assert_eq!(
            c.path,
            vec![
                (Level::Subsection, "b".into()),
                (Level::Paragraph, "2".into()),
                (Level::Subparagraph, "A".into())
            ]
        );
        assert_eq!(parse_citation("section 1001").unwrap(), Citation::section());
    }

    #[test]
    fn malformed_citations_are_rejected() {
        for bad in [
            "",
            "sec 1001(b)",
            "section",
            "section (b)",
            "section 1001(2)",
            "section 1001(b)(c)",
            "section 1001(b",
            "section 1001(b)(0)",
            "section 1001(b)(1)(A)(IIII)",
            "section 1001(b)(1)(A)(ii)(I)(I)",
        ] {
            assert!(parse_citation(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn containment() {
        let cc2 = Citation::from_ordinals(&[3, 2]);
        assert!(cc2.is_within(&Citation::from_ordinals(&[3])));
        assert!(cc2.is_within(&Citation::section()));
        assert!(!cc2.is_within(&Citation::from_ordinals(&[2])));
        assert_eq!(cc2.parent(), Some(Citation::from_ordinals(&[3])));
        assert_eq!(Citation::from_ordinals(&[3]).child(2), cc2);
    }

    proptest! {
        #[test]
        fn parse_inverts_format(ordinals in proptest::collection::vec(1usize..40, 0..=5)) {
            let c = Citation::from_ordinals(&ordinals);
            let parsed = parse_citation(&format_citation(&c)).unwrap();
            prop_assert_eq!(parsed.ordinals(), ordinals);
            prop_assert_eq!(parsed, c);
        }
    }
}
