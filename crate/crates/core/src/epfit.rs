//! The e_p index: fitting `P(x) = e_p^(2 - lg x)` to a share table.
//!
//! The model has one free parameter, so the fit is a least-squares line
//! through the origin in log-log space: with `w = 2 - lg x` and `y = lg s`,
//! `lg e_p = sum(w*y) / sum(w*w)`. All logarithms here are base 10.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, KahanSum};
use crate::percentile::{PercentileLevel, ShareRow, ShareTable};

/// The e_p index, `0 < e_p <= 1`; 0.1 is the world average.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EpIndex(f64);

impl EpIndex {
    pub const WORLD_AVERAGE: EpIndex = EpIndex(0.1);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidEp(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Inverse of the top-0.01% probability: `e_p = p^(1/4)`.
    pub fn from_top_0_01_probability(p: f64) -> Result<Self> {
        Self::new(math::pow(p, 0.25))
    }
}

impl TryFrom<f64> for EpIndex {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EpIndex> for f64 {
    fn from(ep: EpIndex) -> f64 {
        ep.0
    }
}

/// Probability that a random cohort paper reaches the global top `x%`.
pub fn probability_top(ep: EpIndex, x: PercentileLevel) -> f64 {
    let exponent = 2.0 - x.lg();
    if exponent == 0.0 {
        1.0
    } else {
        math::pow(ep.0, exponent)
    }
}

/// Expected number of top-`x%` papers among `n_local`.
pub fn expected_frequency(ep: EpIndex, x: PercentileLevel, n_local: u64) -> f64 {
    n_local as f64 * probability_top(ep, x)
}

/// `P_a(x) / P_b(x)`.
pub fn prob_ratio(ep_a: EpIndex, ep_b: EpIndex, x: PercentileLevel) -> f64 {
    probability_top(ep_a, x) / probability_top(ep_b, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpFitOptions {
    /// Levels `<= split` form the low segment, the rest the high segment.
    pub split: PercentileLevel,
    /// Flag a deviation when `ep_high > ep_low * deviation_ratio`.
    pub deviation_ratio: f64,
    /// Minimum positive-share levels for the full fit.
    pub min_levels: usize,
    /// Minimum positive-share levels for each segment fit.
    pub min_segment_levels: usize,
}

impl Default for EpFitOptions {
    fn default() -> Self {
        Self {
            split: PercentileLevel::new(10, 1).expect("valid level"),
            deviation_ratio: 1.05,
            min_levels: 3,
            min_segment_levels: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpFitReport {
    pub ep_full: EpIndex,
    pub ep_low: Option<EpIndex>,
    pub ep_high: Option<EpIndex>,
    /// `ep_low` when the deviation flag is set, `ep_full` otherwise.
    pub chosen: EpIndex,
    pub deviation_flag: bool,
    /// `lg s - (2 - lg x) lg e_p_full`, aligned with `levels_used`.
    pub residuals: Vec<f64>,
    pub levels_used: Vec<PercentileLevel>,
    /// Levels whose share was zero.
    pub dropped_levels: Vec<PercentileLevel>,
}

/// Closed-form `lg e_p`; `None` when every weight is zero (only x = 100).
fn fit_lg_ep(rows: &[&ShareRow]) -> Option<f64> {
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for r in rows {
        let w = 2.0 - r.x.lg();
        num.add(w * math::log10(r.share));
        den.add(w * w);
    }
    let den = den.total();
    (den > 0.0).then(|| num.total() / den)
}

fn ep_from_lg(lg_ep: f64) -> Result<EpIndex> {
    // shares <= 1 and x <= 100 keep lg e_p <= 0; clamp the rounding of exact fits
    EpIndex::new(math::pow(10.0, lg_ep.min(0.0)))
}

pub fn fit_ep(table: &ShareTable) -> Result<EpFitReport> {
    fit_ep_with(table, &EpFitOptions::default())
}

pub fn fit_ep_with(table: &ShareTable, opts: &EpFitOptions) -> Result<EpFitReport> {
    if let Some(r) = table.rows().iter().find(|r| r.share > 1.0) {
        return Err(Error::ShareAboveOne { x: r.x.value(), share: r.share });
    }
    let (used, dropped): (Vec<&ShareRow>, Vec<&ShareRow>) = table.rows().iter().partition(|r| r.share > 0.0);
    let min_levels = opts.min_levels.max(1);
    if used.len() < min_levels {
        return Err(Error::TooFewLevels { needed: min_levels, found: used.len() });
    }
    let lg_full = fit_lg_ep(&used).ok_or(Error::TooFewLevels { needed: min_levels, found: 0 })?;
    let ep_full = ep_from_lg(lg_full)?;

    let segment = |rows: Vec<&ShareRow>| -> Result<Option<EpIndex>> {
        if rows.len() < opts.min_segment_levels.max(1) {
            return Ok(None);
        }
        fit_lg_ep(&rows).map(ep_from_lg).transpose()
    };
    let ep_low = segment(used.iter().copied().filter(|r| r.x <= opts.split).collect())?;
    let ep_high = segment(used.iter().copied().filter(|r| r.x > opts.split).collect())?;

    let deviation_flag = matches!((ep_low, ep_high), (Some(lo), Some(hi)) if hi.0 > lo.0 * opts.deviation_ratio);
    let chosen = match (deviation_flag, ep_low) {
        (true, Some(lo)) => lo,
        _ => ep_full,
    };
    let residuals = used.iter().map(|r| math::log10(r.share) - (2.0 - r.x.lg()) * lg_full).collect();
    Ok(EpFitReport {
        ep_full,
        ep_low,
        ep_high,
        chosen,
        deviation_flag,
        residuals,
        levels_used: used.iter().map(|r| r.x).collect(),
        dropped_levels: dropped.iter().map(|r| r.x).collect(),
    })
}
