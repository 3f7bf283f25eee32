use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::SaraError;

/// Provisions shown with the chain-of-thought examples, as (section, path).
pub const COT10_EXTRACTS: [(&str, &[&str]); 6] = [
    ("2", &["b"]),
    ("63", &["c", "1"]),
    ("63", &["c", "6"]),
    ("152", &[]),
    ("3306", &["a"]),
    ("7703", &[]),
];

/// Full text of each statutory section, keyed by section number.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatuteLibrary {
    sections: BTreeMap<String, String>,
}

impl StatuteLibrary {
    pub fn from_map(sections: BTreeMap<String, String>) -> Result<Self, SaraError> {
        if sections.len() != 9 {
            return Err(SaraError::StatuteCount(sections.len()));
        }
        Ok(StatuteLibrary { sections })
    }

    /// Reads every `sectionN` file in `dir`.
    pub fn load(dir: &Path) -> Result<Self, SaraError> {
        let io = |e: std::io::Error| SaraError::Io { path: dir.display().to_string(), message: e.to_string() };
        let mut sections = BTreeMap::new();
        for entry in std::fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            let Some(id) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_prefix("section")) else {
                continue;
            };
            let id = id.trim_end_matches(".txt").to_string();
            let text = std::fs::read_to_string(&path)
                .map_err(|e| SaraError::Io { path: path.display().to_string(), message: e.to_string() })?;
            sections.insert(id, text);
        }
        Self::from_map(sections)
    }

    pub fn get(&self, section: &str) -> Option<&str> {
        self.sections.get(section).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// The fixed statute excerpt for the chain-of-thought prompt.
    pub fn cot10_block(&self) -> Result<String, SaraError> {
        let mut order: Vec<&str> = Vec::new();
        let mut wanted: BTreeMap<&str, Vec<&[&str]>> = BTreeMap::new();
        for (section, path) in COT10_EXTRACTS {
            if !order.contains(&section) {
                order.push(section);
            }
            wanted.entry(section).or_default().push(path);
        }
        let mut blocks = Vec::new();
        for section in order {
            let text = self.get(section).ok_or_else(|| SaraError::MissingStatute(section.to_string()))?;
            let lines: Vec<&str> = text.lines().collect();
            let parsed = label_lines(&lines);
            let mut keep = BTreeSet::new();
            for path in &wanted[section] {
                keep.extend(provision_lines(&lines, &parsed, path).ok_or_else(|| {
                    SaraError::MissingStatute(format!("{section}({})", path.join(")(")))
                })?);
            }
            blocks.push(keep.into_iter().map(|i| lines[i]).collect::<Vec<_>>().join("\n"));
        }
        Ok(blocks.join("\n\n"))
    }
}

const LOWER: usize = 0;
const DIGIT: usize = 1;
const UPPER: usize = 2;
const LOWER_ROMAN: usize = 3;
const UPPER_ROMAN: usize = 4;

fn is_roman(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| "ivxlIVXL".contains(c)) && (s.chars().all(char::is_lowercase) || s.chars().all(char::is_uppercase))
}

fn leading_label(line: &str) -> Option<&str> {
    let rest = line.trim_start().strip_prefix('(')?;
    let end = rest.find(')')?;
    let label = &rest[..end];
    (!label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric())).then_some(label)
}

/// Level of each labelled line. `(i)` and `(I)` are read as roman numerals
/// when they sit below a subparagraph or continue a roman run.
fn label_lines<'a>(lines: &[&'a str]) -> Vec<Option<(usize, &'a str)>> {
    let mut stack: Vec<(usize, &str)> = Vec::new();
    let mut out = Vec::with_capacity(lines.len());
    for line in lines {
        let Some(label) = leading_label(line) else {
            out.push(None);
            continue;
        };
        let deepest = stack.last().map(|(l, _)| *l);
        let level = if label.chars().all(|c| c.is_ascii_digit()) {
            DIGIT
        } else if is_roman(label) && label.chars().all(char::is_lowercase) {
            match deepest {
                Some(d) if d >= UPPER && (label == "i" || d >= LOWER_ROMAN) => LOWER_ROMAN,
                _ if label.len() > 1 => LOWER_ROMAN,
                _ => LOWER,
            }
        } else if is_roman(label) {
            match deepest {
                Some(d) if d >= LOWER_ROMAN && (label == "I" || d >= UPPER_ROMAN) => UPPER_ROMAN,
                _ if label.len() > 1 => UPPER_ROMAN,
                _ => UPPER,
            }
        } else if label.chars().all(|c| c.is_ascii_lowercase()) {
            LOWER
        } else {
            UPPER
        };
        while stack.last().is_some_and(|(l, _)| *l >= level) {
            stack.pop();
        }
        stack.push((level, label));
        out.push(Some((level, label)));
    }
    out
}

/// Line indices for the section heading, ancestor headings and the whole provision at `path`.
fn provision_lines(lines: &[&str], parsed: &[Option<(usize, &str)>], path: &[&str]) -> Option<Vec<usize>> {
    if path.is_empty() {
        return Some((0..lines.len()).collect());
    }
    let mut keep: Vec<usize> = lines.iter().position(|l| !l.trim().is_empty()).into_iter().collect();
    let mut stack: Vec<(usize, &str, usize)> = Vec::new();
    let mut start = None;
    for (i, p) in parsed.iter().enumerate() {
        let Some((level, label)) = *p else { continue };
        if let Some((s, depth)) = start {
            if level <= depth {
                keep.extend(s..i);
                return Some(trim_trailing_blank(lines, keep));
            }
            continue;
        }
        while stack.last().is_some_and(|(l, _, _)| *l >= level) {
            stack.pop();
        }
        stack.push((level, label, i));
        let labels: Vec<&str> = stack.iter().map(|(_, l, _)| *l).collect();
        if labels == path {
            keep.extend(stack[..stack.len() - 1].iter().map(|(_, _, idx)| *idx));
            start = Some((i, level));
        }
    }
    let (s, _) = start?;
    keep.extend(s..lines.len());
    Some(trim_trailing_blank(lines, keep))
}

fn trim_trailing_blank(lines: &[&str], mut keep: Vec<usize>) -> Vec<usize> {
    keep.sort_unstable();
    keep.dedup();
    while keep.last().is_some_and(|&i| lines[i].trim().is_empty()) {
        keep.pop();
    }
    keep
}

/// Text of the provision at `path` (e.g. `["c", "1"]`) with its section and ancestor headings.
pub fn extract_provision(text: &str, path: &[&str]) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let parsed = label_lines(&lines);
    let keep = provision_lines(&lines, &parsed, path)?;
    Some(keep.into_iter().map(|i| lines[i]).collect::<Vec<_>>().join("\n"))
}
