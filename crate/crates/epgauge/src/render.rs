//! Report rendering. Numbers are rounded only here; every printed
//! probability and ratio is re-evaluated from the stored parameters first.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assess::CohortAssessment;
use crate::compare::{top_0_01, DualMethodComparison};
use crate::ReportError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Csv,
    Json,
    Markdown,
}

impl RenderFormat {
    pub const ALL: [RenderFormat; 3] = [RenderFormat::Csv, RenderFormat::Json, RenderFormat::Markdown];

    pub fn extension(self) -> &'static str {
        match self {
            RenderFormat::Csv => "csv",
            RenderFormat::Json => "json",
            RenderFormat::Markdown => "md",
        }
    }
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RenderFormat::Csv),
            "json" => Ok(RenderFormat::Json),
            "markdown" | "md" => Ok(RenderFormat::Markdown),
            other => Err(format!("unknown report format `{other}` (expected csv, json or markdown)")),
        }
    }
}

/// Decimal places for rounded cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Precision {
    pub probability: usize,
    pub ep: usize,
    pub ratio: usize,
    pub percent: usize,
    pub parameter: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Self { probability: 5, ep: 3, ratio: 1, percent: 1, parameter: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Assessments(Vec<CohortAssessment>),
    Comparisons(Vec<DualMethodComparison>),
}

pub const ASSESSMENT_COLUMNS: [&str; 14] = [
    "cohort",
    "year",
    "field",
    "n_local",
    "percent_of_parent",
    "ep_chosen",
    "deviation_flag",
    "p_top_0.01",
    "ep_full",
    "ep_low",
    "ep_high",
    "mu",
    "sigma",
    "low_n",
];

pub const COMPARISON_COLUMNS: [&str; 15] = [
    "year",
    "field",
    "cohort_a",
    "cohort_b",
    "mu_a",
    "sigma_a",
    "mu_b",
    "sigma_b",
    "citations",
    "lognormal_p_a",
    "lognormal_p_b",
    "ep_p_a",
    "ep_p_b",
    "ep_ratio",
    "lognormal_ratio",
];

pub const SERIES_COLUMNS: [&str; 4] = ["year", "field", "cohort", "ep"];

fn fixed(v: f64, places: usize) -> String {
    format!("{v:.places$}")
}

fn fixed_opt(v: Option<f64>, places: usize) -> String {
    v.map(|v| fixed(v, places)).unwrap_or_default()
}

fn refreshed(report: &Report) -> Result<Report, ReportError> {
    Ok(match report {
        Report::Assessments(items) => Report::Assessments(
            items
                .iter()
                .map(|a| {
                    let mut a = a.clone();
                    a.refresh()?;
                    Ok(a)
                })
                .collect::<Result<_, ReportError>>()?,
        ),
        Report::Comparisons(items) => Report::Comparisons(
            items
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.refresh()?;
                    Ok(c)
                })
                .collect::<Result<_, ReportError>>()?,
        ),
    })
}

pub fn render(report: &Report, format: RenderFormat, precision: &Precision) -> Result<Vec<u8>, ReportError> {
    let report = refreshed(report)?;
    match format {
        RenderFormat::Json => to_canonical_json(&report),
        RenderFormat::Csv => match &report {
            Report::Assessments(items) => assessments_csv(items, precision),
            Report::Comparisons(items) => comparisons_csv(items, precision),
        },
        RenderFormat::Markdown => Ok(match &report {
            Report::Assessments(items) => assessments_markdown(items, precision),
            Report::Comparisons(items) => comparisons_markdown(items, precision),
        }
        .into_bytes()),
    }
}

/// Pretty JSON with object keys sorted at every depth.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, ReportError> {
    // serde_json::Value keeps objects in a BTreeMap, so a round trip sorts keys
    let value = serde_json::to_value(value).map_err(|e| ReportError::Internal(e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&value).map_err(|e| ReportError::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn to_canonical_json(report: &Report) -> Result<Vec<u8>, ReportError> {
    match report {
        Report::Assessments(items) => canonical_json(items),
        Report::Comparisons(items) => canonical_json(items),
    }
}

pub fn assessments_from_json(bytes: &[u8]) -> Result<Vec<CohortAssessment>, serde_json::Error> {
    serde_json::from_slice(bytes)
}

pub fn comparisons_from_json(bytes: &[u8]) -> Result<Vec<DualMethodComparison>, serde_json::Error> {
    serde_json::from_slice(bytes)
}

fn csv_bytes<const N: usize>(header: [&str; N], rows: Vec<[String; N]>) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let internal = |e: csv::Error| ReportError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(&row).map_err(internal)?;
    }
    w.into_inner().map_err(|e| ReportError::Internal(e.to_string()))
}

fn assessments_csv(items: &[CohortAssessment], p: &Precision) -> Result<Vec<u8>, ReportError> {
    let rows = items
        .iter()
        .map(|a| {
            let r = &a.ep_report;
            [
                a.label.clone(),
                a.stratum.year.to_string(),
                a.stratum.field.clone(),
                a.n.to_string(),
                fixed(a.percent_of_parent, p.percent),
                fixed(r.chosen.value(), p.ep),
                r.deviation_flag.to_string(),
                fixed(a.probability_at(top_0_01()), p.probability),
                fixed(r.ep_full.value(), p.ep),
                fixed_opt(r.ep_low.map(|e| e.value()), p.ep),
                fixed_opt(r.ep_high.map(|e| e.value()), p.ep),
                fixed_opt(a.lognormal.map(|l| l.mu), p.parameter),
                fixed_opt(a.lognormal.map(|l| l.sigma), p.parameter),
                a.low_n.to_string(),
            ]
        })
        .collect();
    csv_bytes(ASSESSMENT_COLUMNS, rows)
}

fn comparisons_csv(items: &[DualMethodComparison], p: &Precision) -> Result<Vec<u8>, ReportError> {
    let rows = items
        .iter()
        .map(|c| {
            [
                c.year.to_string(),
                c.field.clone(),
                c.a.label.clone(),
                c.b.label.clone(),
                fixed(c.a.mu, p.parameter),
                fixed(c.a.sigma, p.parameter),
                fixed(c.b.mu, p.parameter),
                fixed(c.b.sigma, p.parameter),
                c.citations.value().to_string(),
                fixed(c.a.lognormal_probability, p.probability),
                fixed(c.b.lognormal_probability, p.probability),
                fixed(c.a.ep_probability, p.probability),
                fixed(c.b.ep_probability, p.probability),
                fixed(c.ep_ratio, p.ratio),
                fixed(c.lognormal_ratio, p.ratio),
            ]
        })
        .collect();
    csv_bytes(COMPARISON_COLUMNS, rows)
}

fn md_row(out: &mut String, cells: &[String]) {
    out.push('|');
    for c in cells {
        let _ = write!(out, " {} |", c.replace('|', "\\|"));
    }
    out.push('\n');
}

fn md_header(out: &mut String, cells: &[&str]) {
    md_row(out, &cells.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    out.push('|');
    for (i, _) in cells.iter().enumerate() {
        out.push_str(if i == 0 { " --- |" } else { " ---: |" });
    }
    out.push('\n');
}

fn assessments_markdown(items: &[CohortAssessment], p: &Precision) -> String {
    let mut groups: BTreeMap<(i32, &str), Vec<&CohortAssessment>> = BTreeMap::new();
    for a in items {
        groups.entry((a.stratum.year, a.stratum.field.as_str())).or_default().push(a);
    }
    let mut out = String::new();
    let mut notes = false;
    for ((year, field), rows) in groups {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "### {field} {year}\n");
        md_header(&mut out, &["Cohort", "Number", "Percent", "e_p", "P(top 0.01%)"]);
        for a in rows {
            let mut label = a.label.clone();
            if a.low_n {
                label.push_str(" (low n)");
            }
            let mut ep = fixed(a.ep_report.chosen.value(), p.ep);
            if a.ep_report.deviation_flag {
                ep.push('*');
                notes = true;
            }
            md_row(
                &mut out,
                &[
                    label,
                    a.n.to_string(),
                    fixed(a.percent_of_parent, p.percent),
                    ep,
                    fixed(a.probability_at(top_0_01()), p.probability),
                ],
            );
        }
    }
    if notes {
        out.push_str("\n\\* e_p fitted on the x <= 10 levels: the upper segment deviates from the model.\n");
    }
    out
}

fn comparisons_markdown(items: &[DualMethodComparison], p: &Precision) -> String {
    type Key<'a> = (&'a str, &'a str, &'a str);
    let mut groups: Vec<(Key<'_>, Vec<&DualMethodComparison>)> = Vec::new();
    for c in items {
        let key = (c.field.as_str(), c.a.label.as_str(), c.b.label.as_str());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(c),
            None => groups.push((key, vec![c])),
        }
    }
    let mut out = String::new();
    for ((field, a, b), rows) in groups {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "### {field}\n");
        let headers = [
            "Year".to_string(),
            format!("μ {a}"),
            format!("σ {a}"),
            format!("μ {b}"),
            format!("σ {b}"),
            "Citations".to_string(),
            format!("Lognormal {a}"),
            format!("Lognormal {b}"),
            format!("e_p {a}"),
            format!("e_p {b}"),
            format!("{b}/{a} e_p"),
            format!("{b}/{a} lognormal"),
        ];
        md_header(&mut out, &headers.iter().map(String::as_str).collect::<Vec<_>>());
        for c in rows {
            md_row(
                &mut out,
                &[
                    c.year.to_string(),
                    fixed(c.a.mu, p.parameter),
                    fixed(c.a.sigma, p.parameter),
                    fixed(c.b.mu, p.parameter),
                    fixed(c.b.sigma, p.parameter),
                    c.citations.value().to_string(),
                    fixed(c.a.lognormal_probability, p.probability),
                    fixed(c.b.lognormal_probability, p.probability),
                    fixed(c.a.ep_probability, p.probability),
                    fixed(c.b.ep_probability, p.probability),
                    fixed(c.ep_ratio, p.ratio),
                    fixed(c.lognormal_ratio, p.ratio),
                ],
            );
        }
    }
    out
}

/// `year, field, cohort, ep` rows for e_p-versus-year plots, sorted by
/// field, cohort and year.
pub fn plot_series(items: &[CohortAssessment], precision: &Precision) -> Result<Vec<u8>, ReportError> {
    let mut sorted: Vec<&CohortAssessment> = items.iter().collect();
    sorted.sort_by(|x, y| {
        (&x.stratum.field, &x.label, x.stratum.year).cmp(&(&y.stratum.field, &y.label, y.stratum.year))
    });
    let rows = sorted
        .into_iter()
        .map(|a| {
            [
                a.stratum.year.to_string(),
                a.stratum.field.clone(),
                a.label.clone(),
                fixed(a.ep_report.chosen.value(), precision.ep),
            ]
        })
        .collect();
    csv_bytes(SERIES_COLUMNS, rows)
}
