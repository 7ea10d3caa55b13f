//! Side-by-side breakthrough probabilities from the e_p index and from
//! lognormal tails, with `b / a` ratios.

use epgauge_core::{
    probability_top, tail_ratio, CitationThreshold, EpIndex, LognormalFit, PercentileLevel, ThresholdSchedule,
};
use serde::{Deserialize, Serialize};

use crate::assess::CohortAssessment;
use crate::ReportError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSide {
    pub label: String,
    pub mu: f64,
    pub sigma: f64,
    pub ep: EpIndex,
    /// Upper lognormal tail at `citations`.
    pub lognormal_probability: f64,
    /// `e_p^(2 - lg x)` at the comparison level.
    pub ep_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualMethodComparison {
    pub year: i32,
    pub field: String,
    pub citations: CitationThreshold,
    pub level: PercentileLevel,
    pub a: CohortSide,
    pub b: CohortSide,
    pub ep_ratio: f64,
    pub lognormal_ratio: f64,
}

/// Parameters of one side before probabilities are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInput {
    pub label: String,
    pub lognormal: LognormalFit,
    pub ep: EpIndex,
}

pub fn top_0_01() -> PercentileLevel {
    PercentileLevel::new(1, 100).expect("static level")
}

impl DualMethodComparison {
    pub fn from_parameters(
        year: i32,
        field: &str,
        a: SideInput,
        b: SideInput,
        citations: CitationThreshold,
        level: PercentileLevel,
    ) -> Result<Self, ReportError> {
        let side = |s: &SideInput| CohortSide {
            label: s.label.clone(),
            mu: s.lognormal.mu,
            sigma: s.lognormal.sigma,
            ep: s.ep,
            lognormal_probability: s.lognormal.upper_tail(citations),
            ep_probability: probability_top(s.ep, level),
        };
        // surfaces an underflowing denominator as a domain error
        tail_ratio(&b.lognormal, &a.lognormal, citations)?;
        let mut out = Self {
            year,
            field: field.into(),
            citations,
            level,
            a: side(&a),
            b: side(&b),
            ep_ratio: 0.0,
            lognormal_ratio: 0.0,
        };
        out.ep_ratio = out.b.ep_probability / out.a.ep_probability;
        out.lognormal_ratio = out.b.lognormal_probability / out.a.lognormal_probability;
        Ok(out)
    }

    /// Re-evaluates every probability and ratio from the stored parameters.
    pub fn refresh(&mut self) -> Result<(), ReportError> {
        let side_input = |s: &CohortSide| -> Result<SideInput, ReportError> {
            Ok(SideInput { label: s.label.clone(), lognormal: LognormalFit::from_parameters(s.mu, s.sigma)?, ep: s.ep })
        };
        *self = Self::from_parameters(
            self.year,
            &self.field,
            side_input(&self.a)?,
            side_input(&self.b)?,
            self.citations,
            self.level,
        )?;
        Ok(())
    }
}

/// Compares two assessments of the same publication year at the
/// schedule's threshold for that year, at the top 0.01% level.
pub fn compare_dual(
    a: &CohortAssessment,
    b: &CohortAssessment,
    schedule: &ThresholdSchedule,
) -> Result<DualMethodComparison, ReportError> {
    if a.stratum.year != b.stratum.year {
        return Err(ReportError::YearMismatch { a: a.stratum.year, b: b.stratum.year });
    }
    let side = |c: &CohortAssessment| -> Result<SideInput, ReportError> {
        let lognormal = c.lognormal.ok_or_else(|| ReportError::MissingLognormal(c.label.clone()))?;
        Ok(SideInput { label: c.label.clone(), lognormal, ep: c.ep_report.chosen })
    };
    let year = a.stratum.year;
    let field = if a.stratum.field == b.stratum.field {
        a.stratum.field.clone()
    } else {
        format!("{}/{}", a.stratum.field, b.stratum.field)
    };
    DualMethodComparison::from_parameters(year, &field, side(a)?, side(b)?, schedule.threshold(year)?, top_0_01())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetSide {
    mu: f64,
    sigma: f64,
    p_top: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetRow {
    field: String,
    year: i32,
    citations: f64,
    a: PresetSide,
    b: PresetSide,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Preset {
    a_label: String,
    b_label: String,
    level: PercentileLevel,
    rows: Vec<PresetRow>,
}

const TABLE5_JSON: &str = include_str!("../presets/table5.json");

/// Reference lognormal parameters and top-0.01% probabilities for
/// ERC-funded GFIS papers versus MIT papers, TECH and BIO-MED, 2011-2014.
/// Each e_p is recovered from its top-0.01% probability as `p^(1/4)`.
pub fn table5_preset() -> Vec<DualMethodComparison> {
    parse_preset(TABLE5_JSON).expect("embedded preset is valid")
}

/// Same as [`table5_preset`] but with thresholds taken from `schedule`.
pub fn table5_preset_with(schedule: &ThresholdSchedule) -> Result<Vec<DualMethodComparison>, ReportError> {
    table5_preset()
        .into_iter()
        .map(|mut c| {
            c.citations = schedule.threshold(c.year)?;
            c.refresh()?;
            Ok(c)
        })
        .collect()
}

fn parse_preset(json: &str) -> Result<Vec<DualMethodComparison>, ReportError> {
    let preset: Preset = serde_json::from_str(json).map_err(|e| ReportError::Preset(e.to_string()))?;
    let ep_from = |p: f64| -> Result<EpIndex, ReportError> {
        let exponent = 2.0 - preset.level.lg();
        Ok(EpIndex::new(p.powf(1.0 / exponent))?)
    };
    preset
        .rows
        .iter()
        .map(|r| {
            let side = |label: &str, s: &PresetSide| -> Result<SideInput, ReportError> {
                Ok(SideInput {
                    label: label.into(),
                    lognormal: LognormalFit::from_parameters(s.mu, s.sigma)?,
                    ep: ep_from(s.p_top)?,
                })
            };
            DualMethodComparison::from_parameters(
                r.year,
                &r.field,
                side(&preset.a_label, &r.a)?,
                side(&preset.b_label, &r.b)?,
                CitationThreshold::new(r.citations)?,
                preset.level,
            )
        })
        .collect()
}
