use std::path::PathBuf;

use epgauge::render::{
    self, assessments_from_json, comparisons_from_json, plot_series, ASSESSMENT_COLUMNS, COMPARISON_COLUMNS,
};
use epgauge::{assess_cohort, AssessOptions, CohortAssessment, Precision, RenderFormat, Report};
use epgauge_core::{CohortSelector, Corpus, FundingClass, PaperRecord, PercentileBaseline, Stratum};

fn golden(name: &str, actual: &[u8]) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("EPGAUGE_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(String::from_utf8_lossy(actual), String::from_utf8_lossy(&expected), "{name}");
}

/// Two strata of 1000 papers; the DE cohort holds every third paper and is
/// tilted towards high citation counts.
fn assessments() -> Vec<CohortAssessment> {
    let mut records = Vec::new();
    for (year, field) in [(2013, "TECH"), (2014, "TECH")] {
        for i in 0..1000u64 {
            let de = i % 3 == 0;
            let citations = if de { i + (i * i) % 97 } else { i };
            let funding = if de && i % 9 == 0 { "ERC" } else { "" };
            let tag = if de { "DE" } else { "US" };
            records.push(PaperRecord::new(format!("{year}-{i}"), year, citations, [tag], field, funding));
        }
    }
    let corpus = Corpus::new(records).unwrap();
    let de = CohortSelector::all().countries(["DE"]);
    let erc = CohortSelector::all().funding([FundingClass::Erc]);
    let mut out = Vec::new();
    for year in [2013, 2014] {
        let baseline = PercentileBaseline::build(&corpus, &Stratum::new(year, "TECH")).unwrap();
        let opts = AssessOptions::default();
        out.push(assess_cohort(&corpus, &baseline, "All", &CohortSelector::all(), None, &opts).unwrap());
        out.push(assess_cohort(&corpus, &baseline, "DE", &de, None, &opts).unwrap());
        out.push(assess_cohort(&corpus, &baseline, "DE ERC", &erc, Some(&de), &opts).unwrap());
    }
    out
}

fn bytes(report: &Report, format: RenderFormat) -> Vec<u8> {
    render::render(report, format, &Precision::default()).unwrap()
}

#[test]
fn markdown_matches_golden_files() {
    golden("comparisons.md", &bytes(&Report::Comparisons(epgauge::table5_preset()), RenderFormat::Markdown));
    golden("assessments.md", &bytes(&Report::Assessments(assessments()), RenderFormat::Markdown));
}

#[test]
fn json_is_lossless_and_canonical() {
    let items = assessments();
    let json = bytes(&Report::Assessments(items.clone()), RenderFormat::Json);
    assert_eq!(assessments_from_json(&json).unwrap(), items);
    let comparisons = epgauge::table5_preset();
    let json_c = bytes(&Report::Comparisons(comparisons.clone()), RenderFormat::Json);
    assert_eq!(comparisons_from_json(&json_c).unwrap(), comparisons);

    let value: serde_json::Value = serde_json::from_slice(&json_c).unwrap();
    let mut resorted = serde_json::to_vec_pretty(&value).unwrap();
    resorted.push(b'\n');
    assert_eq!(resorted, json_c);
    assert!(String::from_utf8(json_c).unwrap().starts_with("[\n  {\n    \"a\": {\n      \"ep\": "));
}

#[test]
fn csv_has_fixed_columns() {
    let check = |data: Vec<u8>, width: usize| {
        let mut reader = csv::Reader::from_reader(data.as_slice());
        assert_eq!(reader.headers().unwrap().len(), width);
        let mut rows = 0;
        for r in reader.records() {
            assert_eq!(r.unwrap().len(), width);
            rows += 1;
        }
        rows
    };
    assert_eq!(check(bytes(&Report::Assessments(assessments()), RenderFormat::Csv), ASSESSMENT_COLUMNS.len()), 6);
    assert_eq!(
        check(bytes(&Report::Comparisons(epgauge::table5_preset()), RenderFormat::Csv), COMPARISON_COLUMNS.len()),
        8
    );
    assert_eq!(check(plot_series(&assessments(), &Precision::default()).unwrap(), 4), 6);
}

#[test]
fn stale_numbers_are_recomputed_on_render() {
    let mut items = assessments();
    let clean = bytes(&Report::Assessments(items.clone()), RenderFormat::Json);
    for a in &mut items {
        for p in a.p_top_x.values_mut() {
            *p = 0.5;
        }
    }
    assert_eq!(bytes(&Report::Assessments(items), RenderFormat::Json), clean);

    let mut rows = epgauge::table5_preset();
    let clean = bytes(&Report::Comparisons(rows.clone()), RenderFormat::Csv);
    rows[3].ep_ratio = 10.7;
    rows[3].b.lognormal_probability = 1.0;
    assert_eq!(bytes(&Report::Comparisons(rows), RenderFormat::Csv), clean);
}

#[test]
fn rounding_follows_precision() {
    let rows = epgauge::table5_preset();
    let csv = String::from_utf8(bytes(&Report::Comparisons(rows.clone()), RenderFormat::Csv)).unwrap();
    let line = csv.lines().nth(1).unwrap();
    assert_eq!(line, "2011,TECH,ERC-GFIS,MIT,3.458,1.196,3.420,1.339,1000,0.00196,0.00460,0.00051,0.00163,3.2,2.3");
    let coarse = Precision { probability: 3, ratio: 0, ..Precision::default() };
    let csv =
        String::from_utf8(render::render(&Report::Comparisons(rows), RenderFormat::Csv, &coarse).unwrap()).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",0.002,0.005,0.001,0.002,3,2"));
}
