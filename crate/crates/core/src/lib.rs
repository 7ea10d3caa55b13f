//! Core numerics for percentile-based research assessment.
//!
//! The crate measures how a cohort of publications distributes across the
//! global citation percentiles of its (year, field) stratum, fits the
//! single-parameter power law `P(x) = e_p^(2 - lg x)` to those shares, fits
//! lognormal citation models by maximum likelihood, and generates seeded
//! synthetic corpora with a prescribed `e_p`.
//!
//! Everything here is `no_std` compatible (it needs `alloc`). File formats,
//! reports and the command-line tool live in the `epgauge` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod epfit;
pub mod error;
pub mod lognormal;
pub mod math;
pub mod percentile;
pub mod special;
pub mod synth;

pub use corpus::{classify_funding, CohortSelector, Corpus, CorpusView, FundingClass, GroupBy, PaperRecord, Stratum};
pub use epfit::{
    expected_frequency, fit_ep, fit_ep_with, prob_ratio, probability_top, EpFitOptions, EpFitReport, EpIndex,
};
pub use error::{Error, Result};
pub use lognormal::{
    fit_mle, tail_ratio, threshold_schedule, CitationThreshold, LognormalFit, ThresholdSchedule, ZeroPolicy,
};
pub use percentile::{PercentileBaseline, PercentileLevel, Provenance, ShareRow, ShareTable};
pub use synth::{SampleMode, SplitMix64, SynthSpec};
