use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("record id must not be empty")]
    EmptyId,
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}`: year {year} outside window {min}..={max}")]
    YearOutOfWindow { id: String, year: i32, min: i32, max: i32 },
    #[error("cohort selector sets no criterion")]
    EmptySelector,
    #[error("stratum ({year}, {field}) has no records")]
    EmptyStratum { year: i32, field: String },
    #[error("record `{id}` is outside the baseline stratum ({year}, {field})")]
    StratumMismatch { id: String, year: i32, field: String },
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("invalid percentile level {0}: must satisfy 0 < x <= 100")]
    InvalidLevel(f64),
    #[error("percentile levels must be strictly increasing")]
    LevelsNotIncreasing,
    #[error("no percentile levels given")]
    NoLevels,
    #[error("invalid share {share} at level {x}")]
    InvalidShare { x: f64, share: f64 },
    #[error("share {share} at level {x} exceeds 1")]
    ShareAboveOne { x: f64, share: f64 },
    #[error("shares must be non-decreasing in x (level {x})")]
    SharesNotMonotone { x: f64 },
    #[error("counted share tables need n_local > 0")]
    ZeroLocalCount,
    #[error("need at least {needed} levels with positive share, found {found}")]
    TooFewLevels { needed: usize, found: usize },
    #[error("invalid e_p value {0}: must satisfy 0 < e_p <= 1")]
    InvalidEp(f64),
    #[error("need at least 2 usable citation values, found {0}")]
    TooFewValues(usize),
    #[error("all usable citation values are identical (sigma = 0)")]
    DegenerateSample,
    #[error("invalid lognormal parameters mu = {mu}, sigma = {sigma}")]
    InvalidLognormal { mu: f64, sigma: f64 },
    #[error("citation value must be positive, got {0}")]
    NonPositiveCitations(f64),
    #[error("denominator tail probability underflows (numerator {numerator:e}, denominator {denominator:e})")]
    TailUnderflow { numerator: f64, denominator: f64 },
    #[error("citation window for year {year} is not positive (horizon {horizon})")]
    NonPositiveWindow { year: i32, horizon: i32 },
    #[error("base year {0} is not among the scheduled years")]
    BaseYearMissing(i32),
    #[error("no preset threshold for year {0}")]
    NoPresetThreshold(i32),
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),
    #[error("cannot realize e_p = {ep} with n_local = {n_local} out of n_global = {n_global} (top {x}% overfilled)")]
    Unrealizable { ep: f64, n_local: usize, n_global: usize, x: f64 },
}
