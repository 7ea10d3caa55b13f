//! Global percentile baselines and tie-aware counting of cohort papers.
//!
//! A baseline ranks every paper of a (year, field) stratum by citations.
//! The top `x` percent holds `x * n / 100` slots, evaluated as an exact
//! fraction. Papers tied at the slot boundary share the remaining slots
//! equally, which is their expected membership under random tie-breaking.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Corpus, CorpusView, Stratum};
use crate::error::{Error, Result};
use crate::math::{self, gcd_u128, ratio_to_f64, KahanSum};

/// A "top x%" level, stored as an exact fraction with `0 < x <= 100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PercentileLevel {
    num: u64,
    den: u64,
}

impl PercentileLevel {
    pub const HUNDRED: PercentileLevel = PercentileLevel { num: 100, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || u128::from(num) > 100 * u128::from(den) {
            let v = if den == 0 { f64::NAN } else { num as f64 / den as f64 };
            return Err(Error::InvalidLevel(v));
        }
        let g = gcd_u128(num.into(), den.into()) as u64;
        Ok(Self { num: num / g, den: den / g })
    }

    /// Converts a decimal with at most nine fractional digits.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x <= 100.0) {
            return Err(Error::InvalidLevel(x));
        }
        let mut scale: u64 = 1;
        for _ in 0..=9 {
            let v = x * scale as f64;
            let r = math::round_half_up(v);
            if (v - r).abs() <= 1e-9 * v.max(1.0) {
                return Self::new(r as u64, scale);
            }
            scale *= 10;
        }
        Err(Error::InvalidLevel(x))
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `x / 100`, correctly rounded.
    pub fn fraction(&self) -> f64 {
        ratio_to_f64(self.num.into(), 100 * u128::from(self.den))
    }

    /// `log10(x)`, exact for powers of ten.
    pub fn lg(&self) -> f64 {
        math::log10(self.num as f64) - math::log10(self.den as f64)
    }

    /// Default counted grid: six levels from 7 to 35.
    pub fn standard_grid() -> Vec<PercentileLevel> {
        [7, 10, 15, 20, 25, 35].iter().map(|&x| Self { num: x, den: 1 }).collect()
    }

    /// The standard grid plus the top 1% and 3% levels.
    pub fn extended_grid() -> Vec<PercentileLevel> {
        [1, 3, 7, 10, 15, 20, 25, 35].iter().map(|&x| Self { num: x, den: 1 }).collect()
    }
}

impl Ord for PercentileLevel {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl PartialOrd for PercentileLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PercentileLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            return write!(f, "{}", self.num);
        }
        // exact decimal when the denominator divides a power of ten
        let mut digits = 0u32;
        let mut scale: u128 = 1;
        while digits < 18 {
            if scale.is_multiple_of(u128::from(self.den)) {
                let scaled = u128::from(self.num) * (scale / u128::from(self.den));
                let int = scaled / scale;
                let frac = scaled % scale;
                return write!(f, "{int}.{frac:0width$}", width = digits as usize);
            }
            digits += 1;
            scale *= 10;
        }
        write!(f, "{}", self.value())
    }
}

impl FromStr for PercentileLevel {
    type Err = Error;

    /// Parses a plain decimal such as `35`, `2.5` or `0.01` exactly.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidLevel(s.parse::<f64>().unwrap_or(f64::NAN));
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let digits = alloc::format!("{int}{frac}");
        let num: u64 = digits.parse().map_err(|_| bad())?;
        let den = 10u64.pow(frac.len() as u32);
        Self::new(num, den).map_err(|_| bad())
    }
}

impl Serialize for PercentileLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for PercentileLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        PercentileLevel::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Papers sharing one citation value, occupying ranks `first_rank ..= first_rank + count - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieGroup {
    pub value: u64,
    pub count: u64,
    pub first_rank: u64,
}

impl TieGroup {
    pub fn last_rank(&self) -> u64 {
        self.first_rank + self.count - 1
    }
}

/// Exact fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Fraction {
    num: u128,
    den: u128,
}

impl Fraction {
    fn add(self, other: Fraction) -> Option<Fraction> {
        let g = gcd_u128(self.den, other.den);
        let den = (self.den / g).checked_mul(other.den)?;
        let num = self.num.checked_mul(other.den / g)?.checked_add(other.num.checked_mul(self.den / g)?)?;
        let r = gcd_u128(num, den).max(1);
        Some(Fraction { num: num / r, den: den / r })
    }

    fn to_f64(self) -> f64 {
        ratio_to_f64(self.num, self.den)
    }
}

/// The descending citation distribution of one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileBaseline {
    stratum: Stratum,
    n_global: u64,
    /// Ordered by descending citation value.
    groups: Vec<TieGroup>,
}

impl PercentileBaseline {
    /// Baseline over every record of `stratum` in the global corpus.
    pub fn build(global: &Corpus, stratum: &Stratum) -> Result<Self> {
        let view = global.stratum_view(stratum);
        Self::from_citations(stratum.clone(), view.iter().map(|r| r.citations))
    }

    pub fn from_citations<I: IntoIterator<Item = u64>>(stratum: Stratum, citations: I) -> Result<Self> {
        let mut sorted: Vec<u64> = citations.into_iter().collect();
        if sorted.is_empty() {
            return Err(Error::EmptyStratum { year: stratum.year, field: stratum.field });
        }
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut groups: Vec<TieGroup> = Vec::new();
        for (i, &c) in sorted.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.value == c => g.count += 1,
                _ => groups.push(TieGroup { value: c, count: 1, first_rank: i as u64 + 1 }),
            }
        }
        Ok(Self { stratum, n_global: sorted.len() as u64, groups })
    }

    pub fn stratum(&self) -> &Stratum {
        &self.stratum
    }

    pub fn n_global(&self) -> u64 {
        self.n_global
    }

    pub fn tie_groups(&self) -> &[TieGroup] {
        &self.groups
    }

    pub fn tie_group(&self, citations: u64) -> Option<&TieGroup> {
        self.locate(citations).ok().map(|i| &self.groups[i])
    }

    /// Expands the multiset in descending order.
    pub fn sorted_citations(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.n_global as usize);
        for g in &self.groups {
            out.extend(core::iter::repeat_n(g.value, g.count as usize));
        }
        out
    }

    fn locate(&self, citations: u64) -> core::result::Result<usize, usize> {
        self.groups.binary_search_by(|g| citations.cmp(&g.value))
    }

    /// (papers ranked strictly above, group size) for a citation value.
    /// Values absent from the baseline behave as a single paper.
    fn position(&self, citations: u64) -> (u64, u64) {
        match self.locate(citations) {
            Ok(i) => (self.groups[i].first_rank - 1, self.groups[i].count),
            Err(0) => (0, 1),
            Err(i) => (self.groups[i - 1].last_rank(), 1),
        }
    }

    /// Slots `x * n / 100` as `(numerator, denominator)`.
    fn slots(&self, x: PercentileLevel) -> (u128, u128) {
        (u128::from(x.num) * u128::from(self.n_global), 100 * u128::from(x.den))
    }

    fn weight_fraction(&self, above: u64, size: u64, x: PercentileLevel) -> Fraction {
        let (s, d) = self.slots(x);
        let prior = u128::from(above) * d;
        let full = u128::from(size) * d;
        let avail = s.saturating_sub(prior).min(full);
        Fraction { num: avail, den: full }
    }

    /// Expected membership in the top `x%` of a paper with `citations` citations.
    pub fn top_weight(&self, citations: u64, x: PercentileLevel) -> f64 {
        let (above, size) = self.position(citations);
        self.weight_fraction(above, size, x).to_f64()
    }

    /// Whether `citations` occurs in the baseline.
    pub fn contains(&self, citations: u64) -> bool {
        self.locate(citations).is_ok()
    }

    /// Smallest citation value with non-zero weight at level `x`.
    pub fn citation_threshold(&self, x: PercentileLevel) -> u64 {
        let (s, d) = self.slots(x);
        // groups are rank-ordered; the last one starting before the slot boundary
        let idx = self.groups.partition_point(|g| u128::from(g.first_rank - 1) * d < s);
        self.groups[idx.max(1) - 1].value
    }

    /// Share of `local` papers in the top `x%`. All records must lie in this stratum.
    pub fn fraction_in_top(&self, local: &CorpusView<'_>, x: PercentileLevel) -> Result<f64> {
        let cites = self.stratum_citations(local)?;
        self.share_of(&cites, x)
    }

    /// Share of the given citation counts in the top `x%`.
    pub fn share_of(&self, citations: &[u64], x: PercentileLevel) -> Result<f64> {
        if citations.is_empty() {
            return Err(Error::EmptyCohort);
        }
        let profile = LocalProfile::new(self, citations);
        Ok(profile.share(self, x))
    }

    /// Counted share table over `levels` (strictly increasing).
    pub fn share_table(&self, local: &CorpusView<'_>, levels: &[PercentileLevel]) -> Result<ShareTable> {
        let cites = self.stratum_citations(local)?;
        self.share_table_of(&cites, levels)
    }

    pub fn share_table_of(&self, citations: &[u64], levels: &[PercentileLevel]) -> Result<ShareTable> {
        if levels.is_empty() {
            return Err(Error::NoLevels);
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::LevelsNotIncreasing);
        }
        if citations.is_empty() {
            return Err(Error::EmptyCohort);
        }
        let profile = LocalProfile::new(self, citations);
        let rows = levels.iter().map(|&x| ShareRow { x, share: profile.share(self, x) }).collect();
        let mut table = ShareTable::new(rows, citations.len() as u64, Provenance::Counted)?;
        table.n_foreign = profile.foreign;
        Ok(table)
    }

    /// Number of values not present in the baseline.
    pub fn count_foreign(&self, citations: &[u64]) -> u64 {
        citations.iter().filter(|&&c| !self.contains(c)).count() as u64
    }

    fn stratum_citations(&self, local: &CorpusView<'_>) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(local.len());
        for r in local.iter() {
            if !self.stratum.contains(r) {
                return Err(Error::StratumMismatch {
                    id: r.id.clone(),
                    year: self.stratum.year,
                    field: self.stratum.field.clone(),
                });
            }
            out.push(r.citations);
        }
        Ok(out)
    }
}

/// Local papers bucketed by (papers ranked above, bucket size).
struct LocalProfile {
    buckets: Vec<(u64, u64, u64)>,
    n: u64,
    foreign: u64,
}

impl LocalProfile {
    fn new(baseline: &PercentileBaseline, citations: &[u64]) -> Self {
        let mut keyed: Vec<(u64, u64)> = citations.iter().map(|&c| baseline.position(c)).collect();
        keyed.sort_unstable();
        let foreign = baseline.count_foreign(citations);
        let mut buckets: Vec<(u64, u64, u64)> = Vec::new();
        for (above, size) in keyed {
            match buckets.last_mut() {
                Some(b) if b.0 == above && b.1 == size => b.2 += 1,
                _ => buckets.push((above, size, 1)),
            }
        }
        Self { buckets, n: citations.len() as u64, foreign }
    }

    fn share(&self, baseline: &PercentileBaseline, x: PercentileLevel) -> f64 {
        let mut whole: u128 = 0;
        let mut partial = Fraction { num: 0, den: 1 };
        let mut exact = true;
        let mut fallback = KahanSum::new();
        for &(above, size, count) in &self.buckets {
            let w = baseline.weight_fraction(above, size, x);
            if w.num == 0 {
                continue;
            }
            fallback.add(count as f64 * w.to_f64());
            if w.num == w.den {
                whole += u128::from(count);
            } else if exact {
                let term = Fraction { num: w.num * u128::from(count), den: w.den };
                match partial.add(term) {
                    Some(p) => partial = p,
                    None => exact = false,
                }
            }
        }
        if exact {
            let num = whole.checked_mul(partial.den).and_then(|v| v.checked_add(partial.num));
            let den = partial.den.checked_mul(u128::from(self.n));
            if let (Some(num), Some(den)) = (num, den) {
                return ratio_to_f64(num, den);
            }
        }
        fallback.total() / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Counted,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub x: PercentileLevel,
    pub share: f64,
}

/// Fractions of a cohort at or above each global top-percentile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareTable {
    rows: Vec<ShareRow>,
    n_local: u64,
    provenance: Provenance,
    /// Local values absent from the baseline they were scored against.
    #[serde(default, skip_serializing_if = "is_zero")]
    n_foreign: u64,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ShareTable {
    /// Rows are sorted by level; levels must be distinct, shares finite,
    /// non-negative and non-decreasing in `x`. Shares above one are accepted
    /// here and rejected by the fit.
    pub fn new(mut rows: Vec<ShareRow>, n_local: u64, provenance: Provenance) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::NoLevels);
        }
        rows.sort_by_key(|r| r.x);
        if rows.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(Error::LevelsNotIncreasing);
        }
        for r in &rows {
            if !r.share.is_finite() || r.share < 0.0 {
                return Err(Error::InvalidShare { x: r.x.value(), share: r.share });
            }
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].share < w[0].share) {
            return Err(Error::SharesNotMonotone { x: w[1].x.value() });
        }
        if provenance == Provenance::Counted {
            if n_local == 0 {
                return Err(Error::ZeroLocalCount);
            }
            if let Some(last) = rows.last() {
                if last.x == PercentileLevel::HUNDRED && last.share != 1.0 {
                    return Err(Error::InvalidShare { x: 100.0, share: last.share });
                }
            }
        }
        Ok(Self { rows, n_local, provenance, n_foreign: 0 })
    }

    pub fn external(rows: Vec<(f64, f64)>, n_local: u64) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|(x, share)| Ok(ShareRow { x: PercentileLevel::from_f64(x)?, share }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, n_local, Provenance::External)
    }

    pub fn rows(&self) -> &[ShareRow] {
        &self.rows
    }

    pub fn n_local(&self) -> u64 {
        self.n_local
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n_foreign(&self) -> u64 {
        self.n_foreign
    }

    pub fn share_at(&self, x: PercentileLevel) -> Option<f64> {
        self.rows.iter().find(|r| r.x == x).map(|r| r.share)
    }
}
