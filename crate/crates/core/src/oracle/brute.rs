//! Text-level oracle: recovers definitions from rendered statutes or sentences
//! by scanning lines, with no access to the tree that produced them.

use super::{OracleError, Target};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDefinition {
    /// Provision labels from the subsection down, e.g. `["c", "2"]`.
    /// Empty for sentence renderings.
    pub labels: Vec<String>,
    /// 1-based sentence number, or the position among definitions for statutes.
    pub ordinal: usize,
    pub definiendum: String,
    pub rhs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedText {
    Statute(Vec<ParsedDefinition>),
    Sentences(Vec<ParsedDefinition>),
}

impl ParsedText {
    pub fn definitions(&self) -> &[ParsedDefinition] {
        match self {
            ParsedText::Statute(d) | ParsedText::Sentences(d) => d,
        }
    }
}

fn parse_err(line_no: usize, line: &str) -> OracleError {
    OracleError::Parse(format!("line {}: {line:?}", line_no + 1))
}

fn quoted_term(rest: &str) -> Option<(&str, &str)> {
    let rest = rest.strip_prefix("The term \"")?;
    let close = rest.find('"')?;
    Some((&rest[..close], &rest[close + 1..]))
}

/// Parses either rendering, told apart by its first line.
pub fn parse_rendered(text: &str) -> Result<ParsedText, OracleError> {
    let first = text.lines().next().unwrap_or("");
    if first.starts_with("Section ") {
        parse_statute(text).map(ParsedText::Statute)
    } else if first.starts_with("Sentence ") {
        parse_sentences(text).map(ParsedText::Sentences)
    } else {
        Err(OracleError::Parse(format!("unrecognised rendering starting {first:?}")))
    }
}

fn parse_statute(text: &str) -> Result<Vec<ParsedDefinition>, OracleError> {
    let mut path: Vec<String> = Vec::new();
    let mut defs: Vec<ParsedDefinition> = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let content = line.trim_start();
        let indent = line.len() - content.len();
        if let Some((term, tail)) = quoted_term(content) {
            if tail != " means-" {
                return Err(parse_err(no, line));
            }
            defs.push(ParsedDefinition {
                labels: path.clone(),
                ordinal: defs.len() + 1,
                definiendum: term.to_string(),
                rhs: Vec::new(),
            });
            continue;
        }
        let inner = content.strip_prefix('(').ok_or_else(|| parse_err(no, line))?;
        let close = inner.find(')').ok_or_else(|| parse_err(no, line))?;
        let label = &inner[..close];
        let rest = inner[close + 1..].trim_start();
        if let Some(item) = rest.strip_prefix("any ") {
            let term = item.trim_end_matches(", or").trim_end_matches(',').trim_end_matches('.');
            let def = defs.last_mut().ok_or_else(|| parse_err(no, line))?;
            def.rhs.push(term.to_string());
        } else {
            if indent % 4 != 0 || indent / 4 > path.len() {
                return Err(parse_err(no, line));
            }
            path.truncate(indent / 4);
            path.push(label.to_string());
        }
    }
    if defs.is_empty() {
        return Err(OracleError::Parse("no definitions found".into()));
    }
    Ok(defs)
}

fn parse_sentences(text: &str) -> Result<Vec<ParsedDefinition>, OracleError> {
    let mut defs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rest = line.strip_prefix("Sentence ").ok_or_else(|| parse_err(no, line))?;
        let colon = rest.find(": ").ok_or_else(|| parse_err(no, line))?;
        let ordinal: usize = rest[..colon].parse().map_err(|_| parse_err(no, line))?;
        let (term, tail) = quoted_term(&rest[colon + 2..]).ok_or_else(|| parse_err(no, line))?;
        let body = tail.strip_prefix(" means ").ok_or_else(|| parse_err(no, line))?;
        let rhs = body
            .split_whitespace()
            .map(|tok| tok.trim_matches(|c: char| !c.is_ascii_alphanumeric()))
            .filter(|tok| !tok.is_empty() && *tok != "any" && *tok != "or")
            .map(str::to_string)
            .collect();
        defs.push(ParsedDefinition { labels: Vec::new(), ordinal, definiendum: term.to_string(), rhs });
    }
    if defs.is_empty() {
        return Err(OracleError::Parse("no sentences found".into()));
    }
    Ok(defs)
}

/// Labels of a citation string such as `section 1001(c)(2)`, read off the text.
fn citation_labels(citation: &str) -> Vec<String> {
    citation
        .split('(')
        .skip(1)
        .map(|part| part.trim_end_matches(')').to_string())
        .collect()
}

/// Same contract as [`super::applies`], computed from rendered text alone.
pub fn brute_force_applies(rendered: &str, target: &Target, fact_term: &str) -> Result<bool, OracleError> {
    parse_rendered(rendered)?.applies(target, fact_term)
}

impl ParsedText {
    /// Whether `target` lists `fact_term` on the right-hand side of any definition it houses.
    pub fn applies(&self, target: &Target, fact_term: &str) -> Result<bool, OracleError> {
        let known = self
            .definitions()
            .iter()
            .any(|d| d.definiendum == fact_term || d.rhs.iter().any(|t| t == fact_term));
        if !known {
            return Err(OracleError::UnknownTerm(fact_term.to_string()));
        }
        let in_scope: Vec<&ParsedDefinition> = match (self, target) {
            (ParsedText::Statute(defs), Target::Provision(c)) => {
                let labels = citation_labels(&c.to_string());
                defs.iter().filter(|d| d.labels.starts_with(&labels)).collect()
            }
            (ParsedText::Sentences(defs), Target::Sentence(k)) => defs.iter().filter(|d| d.ordinal == *k).collect(),
            _ => return Err(OracleError::Unresolvable(format!("{target} against this rendering"))),
        };
        if in_scope.is_empty() {
            return Err(OracleError::Unresolvable(target.to_string()));
        }
        Ok(in_scope.iter().any(|d| d.rhs.iter().any(|t| t == fact_term)))
    }
}
