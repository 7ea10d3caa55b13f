//! Cohort assessment: selection, share table, e_p fit, optional lognormal fit.

use std::collections::BTreeMap;

use epgauge_core::{
    fit_ep_with, fit_mle, probability_top, CohortSelector, Corpus, EpFitOptions, EpFitReport, LognormalFit,
    PercentileBaseline, PercentileLevel, ShareTable, Stratum, ZeroPolicy,
};
use serde::{Deserialize, Serialize};

use crate::ReportError;

/// What to do with cohorts smaller than [`AssessOptions::min_cohort`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowNPolicy {
    Error,
    #[default]
    Flag,
}

impl std::str::FromStr for LowNPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "error" => Ok(LowNPolicy::Error),
            "flag" => Ok(LowNPolicy::Flag),
            other => Err(format!("unknown low-n policy `{other}` (expected error or flag)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssessOptions {
    pub grid: Vec<PercentileLevel>,
    pub fit: EpFitOptions,
    /// Levels at which `p_top_x` is reported.
    pub report_levels: Vec<PercentileLevel>,
    /// `None` skips the lognormal fit.
    pub lognormal: Option<ZeroPolicy>,
    pub min_cohort: u64,
    pub low_n: LowNPolicy,
}

impl Default for AssessOptions {
    fn default() -> Self {
        let level = |n, d| PercentileLevel::new(n, d).expect("static level");
        Self {
            grid: PercentileLevel::standard_grid(),
            fit: EpFitOptions::default(),
            report_levels: vec![level(1, 100), level(1, 10), level(1, 1), level(10, 1)],
            lognormal: Some(ZeroPolicy::default()),
            min_cohort: 30,
            low_n: LowNPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortAssessment {
    pub label: String,
    pub stratum: Stratum,
    pub n: u64,
    pub parent_n: u64,
    pub percent_of_parent: f64,
    pub share_table: ShareTable,
    pub ep_report: EpFitReport,
    pub lognormal: Option<LognormalFit>,
    /// Keyed by the level's decimal form, e.g. `"0.01"`.
    pub p_top_x: BTreeMap<String, f64>,
    pub low_n: bool,
}

impl CohortAssessment {
    /// Recomputes `p_top_x` from the chosen e_p, keeping its levels.
    pub fn refresh(&mut self) -> Result<(), ReportError> {
        let ep = self.ep_report.chosen;
        for (key, p) in self.p_top_x.iter_mut() {
            let level: PercentileLevel = key.parse().map_err(ReportError::Core)?;
            *p = probability_top(ep, level);
        }
        Ok(())
    }

    pub fn probability_at(&self, x: PercentileLevel) -> f64 {
        probability_top(self.ep_report.chosen, x)
    }
}

/// Assesses the cohort `selector` selects inside `parent` within the
/// baseline's stratum. Without a parent the whole stratum is the parent.
pub fn assess_cohort(
    corpus: &Corpus,
    baseline: &PercentileBaseline,
    label: &str,
    selector: &CohortSelector,
    parent: Option<&CohortSelector>,
    opts: &AssessOptions,
) -> Result<CohortAssessment, ReportError> {
    let stratum = baseline.stratum().clone();
    let stratum_view = corpus.stratum_view(&stratum);
    let parent_view = match parent {
        Some(p) => stratum_view.select(p)?,
        None => stratum_view,
    };
    let cohort = parent_view.select(selector)?;
    if cohort.is_empty() {
        return Err(ReportError::EmptyCohort { label: label.into(), stratum });
    }
    let n = cohort.len() as u64;
    let low_n = n < opts.min_cohort;
    if low_n && opts.low_n == LowNPolicy::Error {
        return Err(ReportError::LowN { label: label.into(), n, min: opts.min_cohort });
    }
    let parent_n = parent_view.len() as u64;
    let citations = cohort.citations();
    let share_table = baseline.share_table_of(&citations, &opts.grid)?;
    let ep_report = fit_ep_with(&share_table, &opts.fit)?;
    let lognormal = opts.lognormal.map(|policy| fit_mle(&citations, policy)).transpose()?;
    let p_top_x = opts.report_levels.iter().map(|&x| (x.to_string(), probability_top(ep_report.chosen, x))).collect();
    Ok(CohortAssessment {
        label: label.into(),
        stratum,
        n,
        parent_n,
        percent_of_parent: 100.0 * n as f64 / parent_n as f64,
        share_table,
        ep_report,
        lognormal,
        p_top_x,
        low_n,
    })
}
