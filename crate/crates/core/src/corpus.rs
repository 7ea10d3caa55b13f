//! Publication records, corpora, cohort selection and funding classification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FundingClass {
    #[serde(rename = "ERC")]
    Erc,
    #[serde(rename = "EU_OTHER")]
    EuOther,
    #[serde(rename = "OTHER")]
    Other,
}

impl FundingClass {
    pub const ALL: [FundingClass; 3] = [FundingClass::Erc, FundingClass::EuOther, FundingClass::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            FundingClass::Erc => "ERC",
            FundingClass::EuOther => "EU_OTHER",
            FundingClass::Other => "OTHER",
        }
    }
}

impl fmt::Display for FundingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FundingClass {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ERC" => Ok(FundingClass::Erc),
            "EU_OTHER" | "EU-OTHER" | "EUOTHER" => Ok(FundingClass::EuOther),
            "OTHER" => Ok(FundingClass::Other),
            other => Err(alloc::format!("unknown funding class `{other}`")),
        }
    }
}

const ERC_TOKENS: &[&str] = &["erc"];
const ERC_PHRASES: &[&str] = &["european research council"];
const EU_TOKENS: &[&str] = &["cost", "feder", "fp7", "fp6"];
const EU_PHRASES: &[&str] = &["european social fund", "european regional development fund", "european commission"];
const EU_EXCLUDED_PHRASES: &[&str] = &["marie curie"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Finds `token` in `hay` delimited by non-word characters (or the ends).
fn contains_token(hay: &str, token: &str) -> bool {
    let mut from = 0;
    while let Some(pos) = hay[from..].find(token) {
        let start = from + pos;
        let end = start + token.len();
        let before_ok = hay[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after_ok = hay[end..].chars().next().is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return true;
        }
        // advance by one character, not one byte
        from = start + hay[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Collapses runs of whitespace so phrase matching tolerates line breaks.
fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    out
}

/// Classifies an acknowledgment/funding text.
///
/// `ERC` when the text names the European Research Council (or the word
/// `ERC`); `EU_OTHER` when it names another EU programme and neither ERC nor
/// Marie Curie; `OTHER` otherwise. Matching is case-insensitive; short tokens
/// need word boundaries, phrases match as substrings.
pub fn classify_funding(funding_text: &str) -> FundingClass {
    let text = normalize(funding_text);
    if text.is_empty() {
        return FundingClass::Other;
    }
    let erc = ERC_TOKENS.iter().any(|t| contains_token(&text, t)) || ERC_PHRASES.iter().any(|p| text.contains(p));
    if erc {
        return FundingClass::Erc;
    }
    let eu = EU_TOKENS.iter().any(|t| contains_token(&text, t)) || EU_PHRASES.iter().any(|p| text.contains(p));
    let excluded = EU_EXCLUDED_PHRASES.iter().any(|p| text.contains(p));
    if eu && !excluded {
        FundingClass::EuOther
    } else {
        FundingClass::Other
    }
}

/// A (publication year, research field) cell; percentiles are computed per stratum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Stratum {
    pub year: i32,
    pub field: String,
}

impl Stratum {
    pub fn new(year: i32, field: impl Into<String>) -> Self {
        Self { year, field: field.into() }
    }

    pub fn contains(&self, record: &PaperRecord) -> bool {
        record.year == self.year && record.field_tag == self.field
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.year, self.field)
    }
}

impl FromStr for Stratum {
    type Err = String;

    /// Parses `YEAR:FIELD`.
    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let (year, field) = s.split_once(':').ok_or_else(|| alloc::format!("stratum `{s}` is not YEAR:FIELD"))?;
        let year = year.trim().parse().map_err(|_| alloc::format!("stratum `{s}` has a non-integer year"))?;
        let field = field.trim();
        if field.is_empty() {
            return Err(alloc::format!("stratum `{s}` has an empty field"));
        }
        Ok(Stratum::new(year, field))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub year: i32,
    pub citations: u64,
    pub country_tags: BTreeSet<String>,
    pub field_tag: String,
    pub funding_text: String,
    funding_class: FundingClass,
}

impl PaperRecord {
    /// Country tags are upper-cased; the funding class is derived from the text.
    pub fn new<I, S>(
        id: impl Into<String>,
        year: i32,
        citations: u64,
        country_tags: I,
        field_tag: impl Into<String>,
        funding_text: impl Into<String>,
    ) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let funding_text = funding_text.into();
        let funding_class = classify_funding(&funding_text);
        Self {
            id: id.into(),
            year,
            citations,
            country_tags: country_tags
                .into_iter()
                .map(|t| t.as_ref().trim().to_uppercase())
                .filter(|t| !t.is_empty())
                .collect(),
            field_tag: field_tag.into(),
            funding_text,
            funding_class,
        }
    }

    pub fn funding_class(&self) -> FundingClass {
        self.funding_class
    }

    pub fn stratum(&self) -> Stratum {
        Stratum::new(self.year, self.field_tag.clone())
    }

    pub fn add_country_tag(&mut self, tag: &str) {
        self.country_tags.insert(tag.to_uppercase());
    }
}

/// An immutable, validated collection of records with a (year, field) index.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<PaperRecord>,
    strata: BTreeMap<Stratum, Vec<usize>>,
}

impl Corpus {
    pub fn new(records: Vec<PaperRecord>) -> Result<Self> {
        Self::with_year_window(records, None)
    }

    /// Validates ids (non-empty, unique) and, when given, the inclusive year window.
    pub fn with_year_window(records: Vec<PaperRecord>, window: Option<(i32, i32)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut strata: BTreeMap<Stratum, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.id.is_empty() {
                return Err(Error::EmptyId);
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            if let Some((min, max)) = window {
                if r.year < min || r.year > max {
                    return Err(Error::YearOutOfWindow { id: r.id.clone(), year: r.year, min, max });
                }
            }
            strata.entry(r.stratum()).or_default().push(i);
        }
        Ok(Self { records, strata })
    }

    pub fn records(&self) -> &[PaperRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<PaperRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Strata with their record counts, ordered by (year, field).
    pub fn strata(&self) -> impl Iterator<Item = (&Stratum, usize)> {
        self.strata.iter().map(|(s, v)| (s, v.len()))
    }

    pub fn view(&self) -> CorpusView<'_> {
        CorpusView { corpus: self, indices: (0..self.records.len()).collect() }
    }

    /// Records of one stratum; empty view when the stratum is absent.
    pub fn stratum_view(&self, stratum: &Stratum) -> CorpusView<'_> {
        CorpusView { corpus: self, indices: self.strata.get(stratum).cloned().unwrap_or_default() }
    }

    pub fn select(&self, sel: &CohortSelector) -> Result<CorpusView<'_>> {
        self.view().select(sel)
    }

    pub fn cohort_counts(&self, sel: &CohortSelector, group_by: GroupBy) -> Result<Vec<(String, usize)>> {
        Ok(self.select(sel)?.counts(group_by))
    }
}

/// A subset of a corpus, kept in corpus order.
#[derive(Debug, Clone)]
pub struct CorpusView<'a> {
    corpus: &'a Corpus,
    indices: Vec<usize>,
}

impl<'a> CorpusView<'a> {
    /// Builds a view from record positions. Positions are sorted and deduplicated.
    pub fn from_indices(corpus: &'a Corpus, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        indices.retain(|&i| i < corpus.len());
        Self { corpus, indices }
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a PaperRecord> + '_ {
        let records = &self.corpus.records;
        self.indices.iter().map(move |&i| &records[i])
    }

    pub fn citations(&self) -> Vec<u64> {
        self.iter().map(|r| r.citations).collect()
    }

    /// Records matching every criterion of `sel`. Empty results are not an error.
    pub fn select(&self, sel: &CohortSelector) -> Result<CorpusView<'a>> {
        sel.validate()?;
        let records = &self.corpus.records;
        let indices = self.indices.iter().copied().filter(|&i| sel.matches(&records[i])).collect();
        Ok(CorpusView { corpus: self.corpus, indices })
    }

    pub fn counts(&self, group_by: GroupBy) -> Vec<(String, usize)> {
        let mut table: BTreeMap<String, usize> = BTreeMap::new();
        for r in self.iter() {
            let key = match group_by {
                GroupBy::Year => r.year.to_string(),
                GroupBy::FundingClass => r.funding_class.as_str().to_string(),
            };
            *table.entry(key).or_default() += 1;
        }
        table.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Year,
    FundingClass,
}

/// Cohort criteria; a record must satisfy every criterion that is set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSelector {
    /// Match when the record shares at least one tag with this set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub countries: Option<BTreeSet<String>>,
    /// Reject records carrying any of these tags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude_countries: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funding: Option<BTreeSet<FundingClass>>,
    /// Inclusive year range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub years: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl CohortSelector {
    /// A selector that matches every record (all funding classes).
    pub fn all() -> Self {
        Self { funding: Some(FundingClass::ALL.into_iter().collect()), ..Self::default() }
    }

    pub fn countries<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.countries = Some(tags.into_iter().map(|t| t.as_ref().to_uppercase()).collect());
        self
    }

    pub fn exclude_countries<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.exclude_countries = Some(tags.into_iter().map(|t| t.as_ref().to_uppercase()).collect());
        self
    }

    pub fn funding<I: IntoIterator<Item = FundingClass>>(mut self, classes: I) -> Self {
        self.funding = Some(classes.into_iter().collect());
        self
    }

    pub fn years(mut self, first: i32, last: i32) -> Self {
        self.years = Some((first, last));
        self
    }

    pub fn field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.countries.is_none()
            && self.exclude_countries.is_none()
            && self.funding.is_none()
            && self.years.is_none()
            && self.field.is_none()
        {
            return Err(Error::EmptySelector);
        }
        Ok(())
    }

    pub fn matches(&self, r: &PaperRecord) -> bool {
        if let Some(countries) = &self.countries {
            if countries.is_disjoint(&r.country_tags) {
                return false;
            }
        }
        if let Some(excluded) = &self.exclude_countries {
            if !excluded.is_disjoint(&r.country_tags) {
                return false;
            }
        }
        if let Some(funding) = &self.funding {
            if !funding.contains(&r.funding_class) {
                return false;
            }
        }
        if let Some((first, last)) = self.years {
            if r.year < first || r.year > last {
                return false;
            }
        }
        if let Some(field) = &self.field {
            if *field != r.field_tag {
                return false;
            }
        }
        true
    }
}

fn split_set(v: &str) -> BTreeSet<String> {
    v.split(['|', ';', '+']).map(|t| t.trim().to_uppercase()).filter(|t| !t.is_empty()).collect()
}

impl FromStr for CohortSelector {
    type Err = String;

    /// Parses `all` or comma-separated `key:value` criteria, e.g.
    /// `countries:DE|FR|IT|ES,funding:ERC,field:TECH,years:2011-2014`.
    /// Keys: `countries`, `exclude`, `funding`, `years` (`Y` or `Y1-Y2`), `field`.
    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(CohortSelector::all());
        }
        let mut sel = CohortSelector::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) =
                part.split_once(':').ok_or_else(|| alloc::format!("selector criterion `{part}` is not key:value"))?;
            let value = value.trim();
            match key.trim().to_ascii_lowercase().as_str() {
                "countries" | "country" => sel.countries = Some(split_set(value)),
                "exclude" | "exclude_countries" => sel.exclude_countries = Some(split_set(value)),
                "funding" => {
                    let classes = value
                        .split(['|', ';', '+'])
                        .map(FundingClass::from_str)
                        .collect::<core::result::Result<BTreeSet<_>, _>>()?;
                    sel.funding = Some(classes);
                }
                "years" | "year" => {
                    let parse =
                        |y: &str| y.trim().parse::<i32>().map_err(|_| alloc::format!("bad year `{y}` in selector"));
                    let range = match value.split_once('-') {
                        Some((a, b)) => (parse(a)?, parse(b)?),
                        None => {
                            let y = parse(value)?;
                            (y, y)
                        }
                    };
                    if range.0 > range.1 {
                        return Err(alloc::format!("empty year range `{value}`"));
                    }
                    sel.years = Some(range);
                }
                "field" => sel.field = Some(value.to_string()),
                other => return Err(alloc::format!("unknown selector key `{other}`")),
            }
        }
        sel.validate().map_err(|e| e.to_string())?;
        Ok(sel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(id: &str, year: i32, cites: u64, countries: &[&str], field: &str, ft: &str) -> PaperRecord {
        PaperRecord::new(id, year, cites, countries.iter(), field, ft)
    }

    #[test]
    fn funding_examples() {
        assert_eq!(classify_funding("Supported by the European Research Council grant 12345"), FundingClass::Erc);
        assert_eq!(classify_funding("Funded by FP7 and a Marie Curie fellowship"), FundingClass::Other);
        assert_eq!(classify_funding(""), FundingClass::Other);
    }

    #[test]
    fn funding_tokens_need_word_boundaries() {
        assert_eq!(classify_funding("ERC-2014-StG 638653"), FundingClass::Erc);
        assert_eq!(classify_funding("the HERCULES project"), FundingClass::Other);
        assert_eq!(classify_funding("FEDER funds"), FundingClass::EuOther);
        assert_eq!(classify_funding("FEDERAL ministry"), FundingClass::Other);
        assert_eq!(classify_funding("cost action CA15"), FundingClass::EuOther);
        assert_eq!(classify_funding("costly equipment"), FundingClass::Other);
        assert_eq!(classify_funding("EU FP6 programme"), FundingClass::EuOther);
    }

    #[test]
    fn funding_phrases_are_case_and_whitespace_insensitive() {
        assert_eq!(classify_funding("EUROPEAN\nresearch   COUNCIL"), FundingClass::Erc);
        assert_eq!(classify_funding("the european commission"), FundingClass::EuOther);
        assert_eq!(classify_funding("European Regional Development Fund"), FundingClass::EuOther);
        assert_eq!(classify_funding("European Social Fund and MARIE CURIE"), FundingClass::Other);
        // ERC wins over the Marie Curie exclusion
        assert_eq!(classify_funding("ERC and Marie Curie"), FundingClass::Erc);
    }

    #[test]
    fn duplicate_and_empty_ids_are_fatal() {
        let err = Corpus::new(vec![rec("a", 2014, 1, &[], "T", ""), rec("a", 2014, 2, &[], "T", "")]);
        assert_eq!(err.unwrap_err(), Error::DuplicateId("a".into()));
        assert_eq!(Corpus::new(vec![rec("", 2014, 1, &[], "T", "")]).unwrap_err(), Error::EmptyId);
    }

    #[test]
    fn year_window_is_enforced() {
        let r = Corpus::with_year_window(vec![rec("a", 2009, 1, &[], "T", "")], Some((2010, 2020)));
        assert!(matches!(r, Err(Error::YearOutOfWindow { year: 2009, .. })));
    }

    #[test]
    fn strata_partition_records() {
        let c = Corpus::new(vec![
            rec("a", 2014, 1, &[], "TECH", ""),
            rec("b", 2014, 1, &[], "BIO", ""),
            rec("c", 2014, 1, &[], "TECH", ""),
            rec("d", 2013, 1, &[], "TECH", ""),
        ])
        .unwrap();
        let total: usize = c.strata().map(|(_, n)| n).sum();
        assert_eq!(total, c.len());
        assert_eq!(c.stratum_view(&Stratum::new(2014, "TECH")).indices(), &[0, 2]);
        assert!(c.stratum_view(&Stratum::new(1999, "TECH")).is_empty());
    }

    #[test]
    fn selection_matches_all_criteria() {
        let c = Corpus::new(vec![
            rec("a", 2014, 5, &["de", "us"], "TECH", "ERC grant"),
            rec("b", 2014, 5, &["FR"], "TECH", "FP7"),
            rec("c", 2013, 5, &["IT"], "TECH", "European Research Council"),
            rec("d", 2014, 5, &["UK"], "TECH", "ERC"),
            rec("e", 2014, 5, &["ES"], "BIO", "ERC"),
        ])
        .unwrap();
        let sel = CohortSelector::default()
            .countries(["DE", "FR", "IT", "ES"])
            .funding([FundingClass::Erc])
            .field("TECH")
            .years(2014, 2014);
        let ids: Vec<_> = c.select(&sel).unwrap().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a"]);
        let no_us = sel.clone().exclude_countries(["US"]);
        assert!(c.select(&no_us).unwrap().is_empty());
        assert_eq!(c.select(&CohortSelector::all()).unwrap().len(), 5);
        assert_eq!(c.select(&CohortSelector::default()).unwrap_err(), Error::EmptySelector);
    }

    #[test]
    fn counts_by_funding_with_empty_texts() {
        let c = Corpus::new(vec![rec("a", 2014, 1, &[], "T", ""), rec("b", 2015, 1, &[], "T", "")]).unwrap();
        let t = c.cohort_counts(&CohortSelector::all(), GroupBy::FundingClass).unwrap();
        assert_eq!(t, vec![("OTHER".to_string(), 2)]);
        let t = c.cohort_counts(&CohortSelector::all(), GroupBy::Year).unwrap();
        assert_eq!(t, vec![("2014".to_string(), 1), ("2015".to_string(), 1)]);
        let empty = Corpus::default();
        assert!(empty.cohort_counts(&CohortSelector::all(), GroupBy::Year).unwrap().is_empty());
    }

    #[test]
    fn selector_parsing() {
        let s: CohortSelector = "countries:de|FR,funding:ERC|eu_other,field:TECH,years:2011-2014".parse().unwrap();
        assert_eq!(s.countries.as_ref().unwrap().len(), 2);
        assert!(s.countries.as_ref().unwrap().contains("DE"));
        assert_eq!(s.funding.as_ref().unwrap().len(), 2);
        assert_eq!(s.years, Some((2011, 2014)));
        assert_eq!("all".parse::<CohortSelector>().unwrap(), CohortSelector::all());
        assert!("bogus:1".parse::<CohortSelector>().is_err());
        assert!("".parse::<CohortSelector>().is_err());
        assert!("years:2015-2011".parse::<CohortSelector>().is_err());
        let y: CohortSelector = "year:2014".parse().unwrap();
        assert_eq!(y.years, Some((2014, 2014)));
    }

    #[test]
    fn stratum_parsing() {
        assert_eq!("2014:TECH".parse::<Stratum>().unwrap(), Stratum::new(2014, "TECH"));
        assert!("TECH".parse::<Stratum>().is_err());
        assert!("x:TECH".parse::<Stratum>().is_err());
    }
}
