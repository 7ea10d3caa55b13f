//! Seeded synthetic corpora with a prescribed e_p.
//!
//! # Random stream
//!
//! All randomness comes from SplitMix64, written out here so any
//! implementation can reproduce the streams bit for bit:
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15            (mod 2^64)
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
//! output <- z ^ (z >> 31)
//! ```
//!
//! Uniforms on `(0, 1]` are `((output >> 11) + 1) * 2^-53`; uniforms on
//! `[0, 1)` are `(output >> 11) * 2^-53`. Standard normals use one
//! Box-Muller draw per pair, `sqrt(-2 ln u1) * cos(2 pi u2)` with `u1` on
//! `(0, 1]` and `u2` on `[0, 1)`; the sine branch is discarded.
//!
//! The global corpus is drawn from the stream seeded with `seed`; the local
//! cohort from the stream seeded with `output_0(seed ^ 0x4C4F43414C)`, the
//! first SplitMix64 output of that value.
//!
//! # Local cohorts
//!
//! Percentile positions are drawn by inverting `P(x) = e_p^(2 - lg x)`:
//! `lg x = 2 - ln U / ln e_p` for `U` uniform on `(0, 1]`. A position maps to
//! global rank `ceil(x * n_global / 100)` (clamped to `1..=n_global`) in the
//! order "citations descending, record position ascending". Without
//! replacement, a taken rank moves to the nearest free rank, preferring the
//! better (lower-numbered) rank on equal distance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PaperRecord, Stratum};
use crate::error::{Error, Result};
use crate::math;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const LOCAL_STREAM: u64 = 0x004C_4F43_414C;
const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Country tag placed on synthetic local-cohort records.
pub const LOCAL_TAG: &str = "LOCAL";

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        math::sqrt(-2.0 * math::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    pub fn lognormal(&mut self, mu: f64, sigma: f64) -> f64 {
        math::exp(mu + sigma * self.standard_normal())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_global: usize,
    pub mu_g: f64,
    pub sigma_g: f64,
    pub n_local: usize,
    pub target_ep: f64,
    pub seed: u64,
    pub year: i32,
    pub field_tag: String,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_global: 1_000_000,
            mu_g: 3.0,
            sigma_g: 1.2,
            n_local: 20_000,
            target_ep: 0.1,
            seed: 1,
            year: 2014,
            field_tag: "TECH".into(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthSpec(m));
        if self.n_global == 0 {
            return bad("n_global must be positive".into());
        }
        if self.n_local == 0 || self.n_local > self.n_global {
            return bad(format!("n_local must be in 1..={}", self.n_global));
        }
        if !(self.target_ep > 0.0 && self.target_ep <= 1.0) {
            return bad(format!("target_ep {} outside (0, 1]", self.target_ep));
        }
        if !self.mu_g.is_finite() || !self.sigma_g.is_finite() || self.sigma_g <= 0.0 {
            return bad(format!("invalid lognormal parameters ({}, {})", self.mu_g, self.sigma_g));
        }
        if self.field_tag.trim().is_empty() {
            return bad("field_tag must not be empty".into());
        }
        Ok(())
    }

    pub fn stratum(&self) -> Stratum {
        Stratum::new(self.year, self.field_tag.clone())
    }

    fn local_rng(&self) -> SplitMix64 {
        SplitMix64::new(SplitMix64::new(self.seed ^ LOCAL_STREAM).next_u64())
    }
}

/// Global corpus of `n_global` records with lognormal citations rounded half-up.
pub fn gen_global(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let width = format!("{}", spec.n_global.saturating_sub(1)).len();
    let records = (0..spec.n_global)
        .map(|i| {
            let c = math::round_half_up(rng.lognormal(spec.mu_g, spec.sigma_g));
            let citations = if c >= u64::MAX as f64 { u64::MAX } else { c as u64 };
            PaperRecord::new(format!("g{i:0width$}"), spec.year, citations, [""; 0], spec.field_tag.clone(), "")
        })
        .collect();
    Corpus::new(records)
}

/// Percentile position of one uniform draw under `P(x) = e_p^(2 - lg x)`.
pub fn percentile_from_uniform(u: f64, ep: f64) -> f64 {
    let ln_ep = math::log(ep);
    if ln_ep == 0.0 {
        return 0.0;
    }
    let lg_x = 2.0 - math::log(u) / ln_ep;
    math::pow(10.0, lg_x)
}

/// `n` percentile positions drawn from the local stream of `spec`.
pub fn sample_percentiles(spec: &SynthSpec, n: usize) -> Vec<f64> {
    let mut rng = spec.local_rng();
    (0..n).map(|_| percentile_from_uniform(rng.uniform_open0(), spec.target_ep)).collect()
}

fn rank_of(x: f64, n_global: usize) -> usize {
    let r = math::ceil(x * n_global as f64 / 100.0);
    (r.max(1.0) as usize).min(n_global)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    #[default]
    WithoutReplacement,
    WithReplacement,
}

/// Percentile levels where the cohort's expected mass must fit in the corpus.
const CAPACITY_GRID: [f64; 11] = [1.0, 3.0, 7.0, 10.0, 15.0, 20.0, 25.0, 35.0, 50.0, 75.0, 90.0];

fn check_capacity(spec: &SynthSpec, n_global: usize) -> Result<()> {
    let n_local = spec.n_local as f64;
    let n = n_global as f64;
    for &x in &CAPACITY_GRID {
        let p = math::pow(spec.target_ep, 2.0 - math::log10(x));
        let top_overfull = n_local * p > x * n / 100.0;
        let bottom_overfull = n_local * (1.0 - p) > (1.0 - x / 100.0) * n;
        if top_overfull || bottom_overfull {
            return Err(Error::Unrealizable { ep: spec.target_ep, n_local: spec.n_local, n_global, x });
        }
    }
    Ok(())
}

/// Nearest-free-rank allocator over ranks `1..=n`.
struct FreeRanks {
    lower: Vec<usize>,
    upper: Vec<usize>,
    n: usize,
}

impl FreeRanks {
    fn new(n: usize) -> Self {
        Self { lower: (0..n + 2).collect(), upper: (0..n + 2).collect(), n }
    }

    fn find(links: &mut [usize], r: usize) -> usize {
        let mut root = r;
        while links[root] != root {
            root = links[root];
        }
        let mut cur = r;
        while links[cur] != root {
            let next = links[cur];
            links[cur] = root;
            cur = next;
        }
        root
    }

    fn take_nearest(&mut self, r: usize) -> Option<usize> {
        let lo = Self::find(&mut self.lower, r);
        let hi = Self::find(&mut self.upper, r);
        let pick = match (lo >= 1, hi <= self.n) {
            (true, true) => {
                if r - lo <= hi - r {
                    lo
                } else {
                    hi
                }
            }
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => return None,
        };
        self.lower[pick] = pick - 1;
        self.upper[pick] = pick + 1;
        Some(pick)
    }
}

/// Record positions of `stratum` ordered by citations descending, position ascending.
pub fn rank_order(global: &Corpus, stratum: &Stratum) -> Vec<usize> {
    let records = global.records();
    let mut order = global.stratum_view(stratum).indices().to_vec();
    order.sort_by(|&a, &b| records[b].citations.cmp(&records[a].citations).then(a.cmp(&b)));
    order
}

/// Record positions (in `global`) of a local cohort following the target e_p.
///
/// Without replacement the positions are distinct; with replacement they may
/// repeat and are returned in draw order.
pub fn gen_local_with_ep(spec: &SynthSpec, global: &Corpus, mode: SampleMode) -> Result<Vec<usize>> {
    spec.validate_local()?;
    let order = rank_order(global, &spec.stratum());
    let n_global = order.len();
    if n_global == 0 {
        let s = spec.stratum();
        return Err(Error::EmptyStratum { year: s.year, field: s.field });
    }
    if spec.n_local > n_global {
        return Err(Error::InvalidSynthSpec(format!("n_local {} exceeds stratum size {n_global}", spec.n_local)));
    }
    if mode == SampleMode::WithoutReplacement {
        check_capacity(spec, n_global)?;
    }
    let xs = sample_percentiles(spec, spec.n_local);
    let mut out = Vec::with_capacity(spec.n_local);
    match mode {
        SampleMode::WithReplacement => {
            out.extend(xs.iter().map(|&x| order[rank_of(x, n_global) - 1]));
        }
        SampleMode::WithoutReplacement => {
            let mut free = FreeRanks::new(n_global);
            for &x in &xs {
                let rank = free.take_nearest(rank_of(x, n_global)).expect("n_local <= n_global leaves a free rank");
                out.push(order[rank - 1]);
            }
            out.sort_unstable();
        }
    }
    Ok(out)
}

impl SynthSpec {
    fn validate_local(&self) -> Result<()> {
        if self.n_local == 0 {
            return Err(Error::InvalidSynthSpec("n_local must be positive".into()));
        }
        if !(self.target_ep > 0.0 && self.target_ep <= 1.0) {
            return Err(Error::InvalidSynthSpec(format!("target_ep {} outside (0, 1]", self.target_ep)));
        }
        Ok(())
    }
}

/// Copy of `corpus` with `tag` added to the country tags of `positions`.
pub fn tag_cohort(corpus: &Corpus, positions: &[usize], tag: &str) -> Result<Corpus> {
    let mut records = corpus.records().to_vec();
    for &p in positions {
        if let Some(r) = records.get_mut(p) {
            r.add_country_tag(tag);
        }
    }
    Corpus::new(records)
}

/// Global corpus with the local cohort tagged [`LOCAL_TAG`].
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, Vec<usize>)> {
    let global = gen_global(spec)?;
    let local = gen_local_with_ep(spec, &global, SampleMode::WithoutReplacement)?;
    let tagged = tag_cohort(&global, &local, LOCAL_TAG)?;
    Ok((tagged, local))
}
