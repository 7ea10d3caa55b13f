//! Acceptance criteria 1-8. Each test prints one `PASS`/`FAIL` line; run
//! with `cargo test -p epgauge --test acceptance -- --nocapture --test-threads 1`
//! to see them in order.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::Instant;

use epgauge::{assess_cohort, table5_preset, AssessOptions};
use epgauge_core::synth::{self, SplitMix64, SynthSpec};
use epgauge_core::{
    fit_ep, fit_mle, probability_top, tail_ratio, CitationThreshold, CohortSelector, EpIndex, LognormalFit,
    PercentileBaseline, PercentileLevel, Provenance, ShareRow, ShareTable, ZeroPolicy,
};

/// Runs `check`, printing one verdict line, and fails the test on error.
fn criterion(number: u32, title: &str, check: impl FnOnce() -> Result<String, String>) {
    match check() {
        Ok(detail) => println!("PASS criterion {number}: {title} ({detail})"),
        Err(reason) => {
            println!("FAIL criterion {number}: {title}: {reason}");
            panic!("criterion {number} failed: {reason}");
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn level(x: f64) -> PercentileLevel {
    PercentileLevel::from_f64(x).unwrap()
}

/// Printed rows: (mu_a, sigma_a, mu_b, sigma_b, citations, p_a, p_b, lognormal ratio b/a).
type Row = (f64, f64, f64, f64, f64, f64, f64, f64);

const PRINTED: [Row; 8] = [
    (3.458, 1.196, 3.420, 1.339, 1000.0, 0.00195, 0.00461, 2.4),
    (3.240, 1.118, 3.412, 1.191, 850.0, 0.00086, 0.00257, 3.0),
    (3.138, 1.129, 3.250, 1.203, 700.0, 0.00126, 0.00304, 2.4),
    (2.922, 1.062, 3.028, 1.196, 500.0, 0.00097, 0.00385, 4.0),
    (3.755, 1.030, 3.786, 1.248, 1000.0, 0.00110, 0.00617, 5.6),
    (3.398, 0.934, 3.592, 1.212, 850.0, 0.00017, 0.00463, 27.1),
    (3.325, 1.068, 3.566, 1.290, 700.0, 0.00126, 0.01036, 8.3),
    (3.081, 0.954, 3.491, 1.262, 500.0, 0.00051, 0.01543, 30.1),
];

#[test]
fn criterion_1_lognormal_tail_cells() {
    criterion(1, "16 lognormal tail probabilities within 2%", || {
        let mut worst = 0.0f64;
        let preset = table5_preset();
        for (row, c) in PRINTED.iter().zip(&preset) {
            let &(mu_a, s_a, mu_b, s_b, ca, p_a, p_b, _) = row;
            let threshold = CitationThreshold::new(ca).unwrap();
            for (mu, s, printed, via_report) in
                [(mu_a, s_a, p_a, c.a.lognormal_probability), (mu_b, s_b, p_b, c.b.lognormal_probability)]
            {
                let got = LognormalFit::from_parameters(mu, s).unwrap().upper_tail(threshold);
                let rel = (got / printed - 1.0).abs();
                worst = worst.max(rel);
                ensure(rel <= 0.02, || format!("mu {mu} sigma {s} at {ca}: {got:.6} vs {printed}"))?;
                ensure(got == via_report, || format!("report cell {via_report} differs from {got}"))?;
            }
        }
        Ok(format!("worst relative error {:.2}%", 100.0 * worst))
    });
}

#[test]
fn criterion_2_tail_ratios() {
    criterion(2, "8 lognormal probability ratios within 5%", || {
        let mut worst = 0.0f64;
        for &(mu_a, s_a, mu_b, s_b, ca, _, _, printed) in &PRINTED {
            let a = LognormalFit::from_parameters(mu_a, s_a).unwrap();
            let b = LognormalFit::from_parameters(mu_b, s_b).unwrap();
            let got = tail_ratio(&b, &a, CitationThreshold::new(ca).unwrap()).unwrap();
            let rel = (got / printed - 1.0).abs();
            worst = worst.max(rel);
            ensure(rel <= 0.05, || format!("ratio {got:.3} vs printed {printed}"))?;
        }
        Ok(format!("worst relative error {:.2}%", 100.0 * worst))
    });
}

#[test]
fn criterion_3_top_probability_gap() {
    criterion(3, "top-0.01% probabilities for e_p 0.13 and 0.10", || {
        let x = level(0.01);
        let high = probability_top(EpIndex::new(0.13).unwrap(), x);
        let avg = probability_top(EpIndex::new(0.10).unwrap(), x);
        let ratio = high / avg;
        ensure(format!("{high:.2e}") == "2.86e-4", || format!("P(0.13) = {high:e}"))?;
        ensure(format!("{avg:.1e}") == "1.0e-4", || format!("P(0.10) = {avg:e}"))?;
        ensure(format!("{ratio:.2}") == "2.86", || format!("ratio {ratio}"))?;
        ensure(format!("{high:.1e}") == "2.9e-4" && format!("{ratio:.1}") == "2.9", || "coarse rounding".into())?;
        Ok(format!("{high:.3e} / {avg:.3e} = {ratio:.4}"))
    });
}

#[test]
fn criterion_4_world_average() {
    criterion(4, "uniform shares give e_p 0.1; full corpus self-assessment", || {
        let mut rng = SplitMix64::new(44);
        let mut grids = vec![PercentileLevel::standard_grid(), PercentileLevel::extended_grid()];
        for _ in 0..50 {
            let mut g: Vec<PercentileLevel> =
                (0..3 + (rng.next_u64() % 8)).map(|_| level(0.01 + (rng.next_u64() % 9999) as f64 / 100.0)).collect();
            g.sort();
            g.dedup();
            if g.len() >= 3 {
                grids.push(g);
            }
        }
        for g in &grids {
            let rows = g.iter().map(|&x| ShareRow { x, share: x.fraction() }).collect();
            let ep = fit_ep(&ShareTable::new(rows, 1000, Provenance::External).unwrap()).unwrap().ep_full.value();
            ensure((ep - 0.1).abs() <= 1e-6, || format!("grid {g:?}: e_p {ep}"))?;
        }

        let start = Instant::now();
        let spec = SynthSpec { n_global: 1_000_000, n_local: 1, seed: 4, ..SynthSpec::default() };
        let (corpus, _) = synth::generate(&spec).unwrap();
        let baseline = PercentileBaseline::build(&corpus, &spec.stratum()).unwrap();
        let a = assess_cohort(&corpus, &baseline, "all", &CohortSelector::all(), None, &AssessOptions::default())
            .map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let ep = a.ep_report.chosen.value();
        ensure((ep - 0.1).abs() <= 0.001, || format!("self-assessment e_p {ep}"))?;
        ensure(a.percent_of_parent == 100.0, || format!("percent {}", a.percent_of_parent))?;
        ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
        Ok(format!("{} grids; 10^6 corpus e_p {ep:.6} in {secs:.1} s", grids.len()))
    });
}

#[test]
fn criterion_5_synthesis_round_trip() {
    criterion(5, "generate, baseline, share table, fit recovers e_p within 0.01", || {
        let start = Instant::now();
        let mut got = Vec::new();
        for (i, target) in [0.06, 0.10, 0.15, 0.20].into_iter().enumerate() {
            let spec = SynthSpec {
                n_global: 1_000_000,
                n_local: 20_000,
                target_ep: target,
                seed: 500 + i as u64,
                ..SynthSpec::default()
            };
            let (corpus, _) = synth::generate(&spec).unwrap();
            let baseline = PercentileBaseline::build(&corpus, &spec.stratum()).unwrap();
            let view = corpus.select(&CohortSelector::all().countries([synth::LOCAL_TAG])).unwrap();
            let table = baseline.share_table(&view, &PercentileLevel::standard_grid()).unwrap();
            let ep = fit_ep(&table).unwrap().chosen.value();
            ensure((ep - target).abs() <= 0.01, || format!("target {target}: recovered {ep}"))?;
            got.push(format!("{target}->{ep:.4}"));
        }
        let secs = start.elapsed().as_secs_f64();
        ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
        Ok(format!("{} in {secs:.1} s", got.join(", ")))
    });
}

/// Log-likelihood from the density oracle, zeros excluded.
fn oracle_log_likelihood(citations: &[u64], mu: f64, sigma: f64) -> f64 {
    citations.iter().filter(|&&c| c > 0).map(|&c| common::lognormal_density(c as f64, mu, sigma).ln()).sum()
}

fn locally_optimal(citations: &[u64], fit: &LognormalFit) -> Result<(), String> {
    let best = oracle_log_likelihood(citations, fit.mu, fit.sigma);
    for dm in [-1e-3, 0.0, 1e-3] {
        for ds in [-1e-3, 0.0, 1e-3] {
            if dm == 0.0 && ds == 0.0 {
                continue;
            }
            let ll = oracle_log_likelihood(citations, fit.mu + dm, fit.sigma + ds);
            ensure(ll <= best, || format!("step ({dm}, {ds}) raises log-likelihood {best} to {ll}"))?;
        }
    }
    Ok(())
}

#[test]
fn criterion_6_mle_recovery() {
    criterion(6, "lognormal MLE recovery and local optimality", || {
        let mut rng = SplitMix64::new(6);
        let sample: Vec<u64> = (0..10_000).map(|_| (rng.lognormal(3.0, 1.2) + 0.5).floor() as u64).collect();
        let fit = fit_mle(&sample, ZeroPolicy::ExcludeZeros).unwrap();
        ensure((fit.mu - 3.0).abs() <= 0.05, || format!("mu {}", fit.mu))?;
        ensure((fit.sigma - 1.2).abs() <= 0.05, || format!("sigma {}", fit.sigma))?;
        locally_optimal(&sample, &fit)?;

        let spec = SynthSpec { n_global: 200_000, n_local: 5_000, target_ep: 0.15, seed: 66, ..SynthSpec::default() };
        let (corpus, _) = synth::generate(&spec).unwrap();
        let mut cohorts = vec![corpus.view().citations()];
        cohorts.push(corpus.select(&CohortSelector::all().countries([synth::LOCAL_TAG])).unwrap().citations());
        cohorts.push(corpus.select(&CohortSelector::all().exclude_countries([synth::LOCAL_TAG])).unwrap().citations());
        for citations in &cohorts {
            locally_optimal(citations, &fit_mle(citations, ZeroPolicy::ExcludeZeros).unwrap())?;
        }
        Ok(format!("mu {:.4}, sigma {:.4}; {} fits locally optimal", fit.mu, fit.sigma, cohorts.len() + 1))
    });
}

#[test]
fn criterion_7_erfc_vs_quadrature() {
    criterion(7, "upper tail matches adaptive quadrature to 1e-9", || {
        let mut rng = SplitMix64::new(77);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let mu = 0.5 + 4.5 * rng.uniform();
            let sigma = 0.3 + 1.7 * rng.uniform();
            let c_a = (mu + sigma * (7.0 * rng.uniform() - 3.0)).exp().max(1e-3);
            let got =
                LognormalFit::from_parameters(mu, sigma).unwrap().upper_tail(CitationThreshold::new(c_a).unwrap());
            let want = common::upper_tail_by_quadrature(mu, sigma, c_a);
            let err = (got - want).abs();
            worst = worst.max(err);
            ensure(err <= 1e-9, || format!("({mu}, {sigma}, {c_a}): {got} vs {want}"))?;
        }
        Ok(format!("100 triples, worst error {worst:.1e}"))
    });
}

#[test]
fn criterion_8_tie_enumeration() {
    criterion(8, "fractional tie weights equal the permutation expectation", || {
        let levels = [1.0, 5.0, 10.0, 12.5, 20.0, 25.0, 33.0, 50.0, 60.0, 75.0, 90.0, 100.0];
        let mut corpora = 0;
        let mut worst = 0.0f64;
        for n in 1..=8 {
            for values in common::all_sequences(&[0, 1, 2], n) {
                let b =
                    PercentileBaseline::from_citations(epgauge_core::Stratum::new(2014, "T"), values.iter().copied())
                        .unwrap();
                let oracle = common::tie_expectation_by_enumeration(&values, &levels);
                for (li, &x) in levels.iter().enumerate() {
                    for (i, &c) in values.iter().enumerate() {
                        let err = (b.top_weight(c, level(x)) - oracle[li][i]).abs();
                        worst = worst.max(err);
                        ensure(err <= 1e-12, || format!("{values:?} at {x}%: paper {i} off by {err:e}"))?;
                    }
                }
                corpora += 1;
            }
        }
        Ok(format!("{corpora} corpora x {} levels, worst error {worst:.1e}", levels.len()))
    });
}
