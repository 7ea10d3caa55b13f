//! Lognormal citation models.
//!
//! `p(C) = exp(-(ln C - mu)^2 / (2 sigma^2)) / (sqrt(2 pi) C sigma)` and its
//! upper tail `P(C > C_a) = erfc((ln C_a - mu) / (sigma sqrt 2)) / 2`.
//! Parameters are fitted by maximum likelihood on natural logs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, KahanSum, LN_SQRT_2PI, SQRT_2};
use crate::special::erfc;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ZeroPolicy {
    /// Drop zero counts and report how many were dropped.
    #[default]
    ExcludeZeros,
    /// Fit `ln(c + 1)` over every paper.
    ShiftPlusOne,
}

impl core::str::FromStr for ZeroPolicy {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exclude_zeros" | "exclude" => Ok(ZeroPolicy::ExcludeZeros),
            "shift_plus_one" | "shift" => Ok(ZeroPolicy::ShiftPlusOne),
            other => Err(alloc::format!("unknown zero policy `{other}`")),
        }
    }
}

/// Lognormal parameters with the bookkeeping of the sample they came from.
///
/// Fits built from given parameters via [`LognormalFit::from_parameters`]
/// carry `n_used = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub n_used: u64,
    pub n_excluded_zero: u64,
    pub zero_policy: ZeroPolicy,
}

/// A citation count threshold `C_a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CitationThreshold(f64);

impl CitationThreshold {
    pub fn new(c_a: f64) -> Result<Self> {
        if c_a > 0.0 && c_a.is_finite() {
            Ok(Self(c_a))
        } else {
            Err(Error::NonPositiveCitations(c_a))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CitationThreshold {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CitationThreshold> for f64 {
    fn from(c: CitationThreshold) -> f64 {
        c.0
    }
}

fn transformed(citations: &[u64], policy: ZeroPolicy) -> (Vec<f64>, u64) {
    match policy {
        ZeroPolicy::ExcludeZeros => {
            let logs: Vec<f64> = citations.iter().filter(|&&c| c > 0).map(|&c| math::log(c as f64)).collect();
            let excluded = (citations.len() - logs.len()) as u64;
            (logs, excluded)
        }
        ZeroPolicy::ShiftPlusOne => (citations.iter().map(|&c| math::log(c as f64 + 1.0)).collect(), 0),
    }
}

/// Maximum-likelihood fit: `mu` is the mean of the logs and `sigma` their
/// divide-by-n standard deviation.
pub fn fit_mle(citations: &[u64], policy: ZeroPolicy) -> Result<LognormalFit> {
    let (logs, n_excluded_zero) = transformed(citations, policy);
    let n = logs.len();
    // ShiftPlusOne maps 0 to ln 1 = 0, which carries no spread on its own
    if n < 2 {
        return Err(Error::TooFewValues(n));
    }
    if logs.iter().all(|&l| l == logs[0]) {
        return Err(Error::DegenerateSample);
    }
    let mu = logs.iter().copied().collect::<KahanSum>().total() / n as f64;
    let ss = logs.iter().map(|&l| (l - mu) * (l - mu)).collect::<KahanSum>().total();
    let sigma = math::sqrt(ss / n as f64);
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(LognormalFit { mu, sigma, n_used: n as u64, n_excluded_zero, zero_policy: policy })
}

impl LognormalFit {
    pub fn from_parameters(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidLognormal { mu, sigma });
        }
        Ok(Self { mu, sigma, n_used: 0, n_excluded_zero: 0, zero_policy: ZeroPolicy::ExcludeZeros })
    }

    /// Density at `c > 0`.
    pub fn pdf(&self, c: f64) -> Result<f64> {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::NonPositiveCitations(c));
        }
        let z = (math::log(c) - self.mu) / self.sigma;
        Ok(math::exp(-0.5 * z * z) / (math::sqrt(2.0 * core::f64::consts::PI) * c * self.sigma))
    }

    /// Probability of receiving more than `c_a` citations.
    pub fn upper_tail(&self, c_a: CitationThreshold) -> f64 {
        0.5 * erfc((math::log(c_a.0) - self.mu) / (self.sigma * SQRT_2))
    }

    /// Log-likelihood of a sample under these parameters, after the zero policy.
    pub fn log_likelihood(&self, citations: &[u64]) -> f64 {
        self.log_likelihood_at(citations, self.mu, self.sigma)
    }

    /// Log-likelihood at arbitrary `(mu, sigma)` for the same transformed sample.
    pub fn log_likelihood_at(&self, citations: &[u64], mu: f64, sigma: f64) -> f64 {
        let (logs, _) = transformed(citations, self.zero_policy);
        let ln_sigma = math::log(sigma);
        logs.iter()
            .map(|&l| {
                let z = (l - mu) / sigma;
                -l - ln_sigma - LN_SQRT_2PI - 0.5 * z * z
            })
            .collect::<KahanSum>()
            .total()
    }
}

/// `P_a(C > c_a) / P_b(C > c_a)`.
pub fn tail_ratio(fit_a: &LognormalFit, fit_b: &LognormalFit, c_a: CitationThreshold) -> Result<f64> {
    let numerator = fit_a.upper_tail(c_a);
    let denominator = fit_b.upper_tail(c_a);
    if denominator == 0.0 || !denominator.is_normal() {
        return Err(Error::TailUnderflow { numerator, denominator });
    }
    Ok(numerator / denominator)
}

/// How citation thresholds are assigned to publication years.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdSchedule {
    /// 1000, 850, 700 and 500 citations for 2011 through 2014.
    #[default]
    Table5,
    /// `base * (horizon - y) / (horizon - base_year)`, rounded to the nearest 50.
    Proportional { base_citations: u64, base_year: i32, horizon: i32 },
    /// Explicit year -> threshold map.
    Fixed {
        #[serde(deserialize_with = "year_keys")]
        thresholds: BTreeMap<i32, f64>,
    },
}

/// Accepts year keys as JSON strings (`"2014"`) as well as integers.
fn year_keys<'de, D: serde::Deserializer<'de>>(d: D) -> core::result::Result<BTreeMap<i32, f64>, D::Error> {
    #[derive(Deserialize, PartialEq, Eq, PartialOrd, Ord)]
    #[serde(untagged)]
    enum Year {
        Int(i32),
        Text(alloc::string::String),
    }
    BTreeMap::<Year, f64>::deserialize(d)?
        .into_iter()
        .map(|(k, v)| {
            let year = match k {
                Year::Int(y) => y,
                Year::Text(t) => t
                    .trim()
                    .parse()
                    .map_err(|_| serde::de::Error::custom(alloc::format!("threshold year `{t}` is not an integer")))?,
            };
            Ok((year, v))
        })
        .collect()
}

const TABLE5_PRESET: [(i32, f64); 4] = [(2011, 1000.0), (2012, 850.0), (2013, 700.0), (2014, 500.0)];

impl ThresholdSchedule {
    pub fn threshold(&self, year: i32) -> Result<CitationThreshold> {
        match self {
            ThresholdSchedule::Table5 => TABLE5_PRESET
                .iter()
                .find(|(y, _)| *y == year)
                .map(|&(_, c)| CitationThreshold(c))
                .ok_or(Error::NoPresetThreshold(year)),
            ThresholdSchedule::Proportional { base_citations, base_year, horizon } => {
                let raw = proportional_threshold(*base_citations, *base_year, *horizon, year)?;
                CitationThreshold::new(round_to_50(raw))
            }
            ThresholdSchedule::Fixed { thresholds } => {
                thresholds.get(&year).copied().ok_or(Error::NoPresetThreshold(year)).and_then(CitationThreshold::new)
            }
        }
    }

    pub fn schedule(&self, years: &[i32]) -> Result<BTreeMap<i32, CitationThreshold>> {
        years.iter().map(|&y| Ok((y, self.threshold(y)?))).collect()
    }
}

/// Unrounded `base * window(year) / window(base_year)` with `window(y) = horizon - y`.
pub fn proportional_threshold(base_citations: u64, base_year: i32, horizon: i32, year: i32) -> Result<f64> {
    let base_window = horizon - base_year;
    if base_window <= 0 {
        return Err(Error::NonPositiveWindow { year: base_year, horizon });
    }
    let window = horizon - year;
    if window <= 0 {
        return Err(Error::NonPositiveWindow { year, horizon });
    }
    Ok(base_citations as f64 * f64::from(window) / f64::from(base_window))
}

fn round_to_50(v: f64) -> f64 {
    math::round_half_up(v / 50.0) * 50.0
}

/// Proportional schedule over `years`, which must include `base_year`.
pub fn threshold_schedule(
    base_citations: u64,
    base_year: i32,
    horizon: i32,
    years: &[i32],
) -> Result<BTreeMap<i32, CitationThreshold>> {
    if !years.contains(&base_year) {
        return Err(Error::BaseYearMissing(base_year));
    }
    ThresholdSchedule::Proportional { base_citations, base_year, horizon }.schedule(years)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ln(c: f64) -> f64 {
        math::log(c)
    }

    fn ca(v: f64) -> CitationThreshold {
        CitationThreshold::new(v).unwrap()
    }

    #[test]
    fn two_point_sample() {
        let f = fit_mle(&[4, 4, 9, 9], ZeroPolicy::ExcludeZeros).unwrap();
        assert!((f.mu - (2.0 * ln(4.0) + 2.0 * ln(9.0)) / 4.0).abs() < 1e-15);
        assert!((f.sigma - (ln(9.0) - ln(4.0)) / 2.0).abs() < 1e-15);
        assert_eq!((f.n_used, f.n_excluded_zero), (4, 0));
    }

    #[test]
    fn degenerate_samples() {
        assert_eq!(fit_mle(&[20, 20, 20], ZeroPolicy::ExcludeZeros).unwrap_err(), Error::DegenerateSample);
        assert_eq!(fit_mle(&[0, 0, 0], ZeroPolicy::ExcludeZeros).unwrap_err(), Error::TooFewValues(0));
        assert_eq!(fit_mle(&[0, 5], ZeroPolicy::ExcludeZeros).unwrap_err(), Error::TooFewValues(1));
        assert_eq!(fit_mle(&[0, 0], ZeroPolicy::ShiftPlusOne).unwrap_err(), Error::DegenerateSample);
        assert!(fit_mle(&[0, 5], ZeroPolicy::ShiftPlusOne).is_ok());
    }

    #[test]
    fn zero_bookkeeping() {
        let f = fit_mle(&[0, 0, 3, 7, 12], ZeroPolicy::ExcludeZeros).unwrap();
        assert_eq!((f.n_used, f.n_excluded_zero), (3, 2));
        let g = fit_mle(&[0, 0, 3, 7, 12], ZeroPolicy::ShiftPlusOne).unwrap();
        assert_eq!((g.n_used, g.n_excluded_zero), (5, 0));
        assert!((g.mu - (ln(4.0) + ln(8.0) + ln(13.0)) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_at_log_mean_and_symmetry() {
        let f = LognormalFit::from_parameters(3.2, 1.1).unwrap();
        let c = math::exp(3.2);
        let want = 1.0 / (math::sqrt(2.0 * core::f64::consts::PI) * c * 1.1);
        assert!((f.pdf(c).unwrap() - want).abs() < 1e-15 * want.max(1.0));
        for t in [0.1, 0.7, 2.3] {
            let hi = math::exp(3.2 + t);
            let lo = math::exp(3.2 - t);
            let a = f.pdf(hi).unwrap() * hi;
            let b = f.pdf(lo).unwrap() * lo;
            assert!((a - b).abs() < 1e-14 * a);
        }
        assert_eq!(f.pdf(0.0).unwrap_err(), Error::NonPositiveCitations(0.0));
        assert!(f.pdf(-1.0).is_err());
    }

    #[test]
    fn tail_examples() {
        let erc = LognormalFit::from_parameters(3.458, 1.196).unwrap();
        assert!((erc.upper_tail(ca(1000.0)) / 0.00195 - 1.0).abs() < 0.02);
        let mit = LognormalFit::from_parameters(3.491, 1.262).unwrap();
        assert!((mit.upper_tail(ca(500.0)) / 0.01543 - 1.0).abs() < 0.02);
        assert!((erc.upper_tail(ca(math::exp(3.458))) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_ratio_examples() {
        let erc = LognormalFit::from_parameters(3.458, 1.196).unwrap();
        let mit = LognormalFit::from_parameters(3.420, 1.339).unwrap();
        let r = tail_ratio(&mit, &erc, ca(1000.0)).unwrap();
        assert!((r - 2.4).abs() < 0.1, "{r}");
        assert_eq!(tail_ratio(&erc, &erc, ca(1000.0)).unwrap(), 1.0);
        let tiny = LognormalFit::from_parameters(0.0, 0.1).unwrap();
        assert!(matches!(tail_ratio(&erc, &tiny, ca(1e6)), Err(Error::TailUnderflow { .. })));
    }

    #[test]
    fn schedules() {
        let preset = ThresholdSchedule::Table5.schedule(&[2011, 2012, 2013, 2014]).unwrap();
        let got: Vec<f64> = preset.values().map(|c| c.value()).collect();
        assert_eq!(got, vec![1000.0, 850.0, 700.0, 500.0]);
        assert!(ThresholdSchedule::Table5.threshold(2010).is_err());

        let prop = threshold_schedule(1000, 2011, 2019, &[2011, 2012, 2013, 2014]).unwrap();
        let got: Vec<f64> = prop.values().map(|c| c.value()).collect();
        // 875 and 625 sit exactly between multiples of 50 and round up
        assert_eq!(got, vec![1000.0, 900.0, 750.0, 650.0]);

        let same = threshold_schedule(1000, 2011, 2019, &[2011, 2011]).unwrap();
        assert_eq!(same.len(), 1);
        assert_eq!(threshold_schedule(1000, 2011, 2019, &[2012]).unwrap_err(), Error::BaseYearMissing(2011));
        assert!(matches!(
            threshold_schedule(1000, 2011, 2013, &[2011, 2014]),
            Err(Error::NonPositiveWindow { year: 2014, .. })
        ));
        for y in 2011..2019 {
            let a = proportional_threshold(1000, 2011, 2019, y).unwrap();
            let b = proportional_threshold(2000, 2011, 2019, y).unwrap();
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(LognormalFit::from_parameters(1.0, 0.0).is_err());
        assert!(LognormalFit::from_parameters(f64::NAN, 1.0).is_err());
        assert!(CitationThreshold::new(0.0).is_err());
    }
}
