use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AccuracyCell, ErrorTaxonomy};
use crate::eval::{EvalRecord, Outcome, Stratum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub stratum: Stratum,
    pub correct: u64,
    /// Scored records; failed calls are excluded.
    pub total: u64,
    pub failed: u64,
    pub errors: ErrorTaxonomy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<AccuracyCell>,
}

impl SummaryRow {
    fn from_counts(stratum: Stratum, counts: &Counts) -> Self {
        let cell = (counts.total > 0).then(|| AccuracyCell::new(counts.correct, counts.total).expect("valid counts"));
        SummaryRow {
            stratum,
            correct: counts.correct,
            total: counts.total,
            failed: counts.failed,
            errors: counts.errors,
            cell,
        }
    }

    pub fn cell_text(&self) -> String {
        self.cell.map(|c| c.to_string()).unwrap_or_else(|| "-".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub backend_ids: Vec<String>,
    pub rows: Vec<SummaryRow>,
    /// Every record pooled.
    pub overall: SummaryRow,
}

#[derive(Default)]
struct Counts {
    correct: u64,
    total: u64,
    failed: u64,
    errors: ErrorTaxonomy,
}

impl Counts {
    fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Failed => {
                self.failed += 1;
                return;
            }
            Outcome::Correct => self.correct += 1,
            Outcome::FalsePositive => self.errors.false_positive += 1,
            Outcome::FalseNegative => self.errors.false_negative += 1,
            Outcome::Indeterminate => self.errors.indeterminate += 1,
        }
        self.total += 1;
    }
}

/// Per-stratum and pooled accuracy; independent of record order.
pub fn aggregate(records: &[EvalRecord]) -> Summary {
    let mut by_stratum: BTreeMap<&Stratum, Counts> = BTreeMap::new();
    let mut overall = Counts::default();
    let mut backends = BTreeSet::new();
    for r in records {
        by_stratum.entry(&r.stratum).or_default().add(r.outcome);
        overall.add(r.outcome);
        for call in &r.calls {
            if let Some(resp) = &call.response {
                backends.insert(resp.backend_id.clone());
            }
        }
    }
    Summary {
        records: records.len(),
        backend_ids: backends.into_iter().collect(),
        rows: by_stratum.into_iter().map(|(s, c)| SummaryRow::from_counts(s.clone(), &c)).collect(),
        overall: SummaryRow::from_counts(Vec::new(), &overall),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Text,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}` (expected csv, text or json)")),
        }
    }
}

fn stratum_keys(summary: &Summary) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for row in &summary.rows {
        for (k, _) in &row.stratum {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys
}

fn table(summary: &Summary) -> (Vec<String>, Vec<Vec<String>>) {
    let keys = stratum_keys(summary);
    let mut header = keys.clone();
    header.extend(
        ["accuracy", "correct", "total", "ci_half_width_pts", "false_positive", "false_negative", "indeterminate", "failed"]
            .map(String::from),
    );
    let line = |row: &SummaryRow, label: Option<&str>| {
        let mut out: Vec<String> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| match label {
                Some(l) if i == 0 => l.to_string(),
                Some(_) => String::new(),
                None => row.stratum.iter().find(|(rk, _)| rk == k).map(|(_, v)| v.clone()).unwrap_or_default(),
            })
            .collect();
        out.push(row.cell_text());
        out.push(row.correct.to_string());
        out.push(row.total.to_string());
        out.push(row.cell.map(|c| format!("{:.4}", c.ci_half_width_pts)).unwrap_or_default());
        out.push(row.errors.false_positive.to_string());
        out.push(row.errors.false_negative.to_string());
        out.push(row.errors.indeterminate.to_string());
        out.push(row.failed.to_string());
        out
    };
    let mut rows: Vec<Vec<String>> = summary.rows.iter().map(|r| line(r, None)).collect();
    if keys.is_empty() {
        header.insert(0, "stratum".into());
        rows.iter_mut().for_each(|r| r.insert(0, String::new()));
        let mut all = line(&summary.overall, None);
        all.insert(0, "all".into());
        rows.push(all);
    } else {
        rows.push(line(&summary.overall, Some("all")));
    }
    (header, rows)
}

pub fn render_csv(summary: &Summary) -> String {
    let (header, rows) = table(summary);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn render_text(summary: &Summary) -> String {
    let (header, rows) = table(summary);
    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([header[i].chars().count()]).max().unwrap_or(0))
        .collect();
    let fmt_line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = vec![fmt_line(&header)];
    out.push(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    out.extend(rows.iter().map(|r| fmt_line(r)));
    out.join("\n") + "\n"
}

pub fn render_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summaries serialize") + "\n"
}
