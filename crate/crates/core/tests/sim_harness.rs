use fiducial_iv::engine::{analyze, AnalysisConfig};
use fiducial_iv::model::{summarize, AssumptionLabel, CountsTable, EstimandKind};
use fiducial_iv::sim::{
    bayesian_comparator, coverage_experiment, simulate, true_bounds, true_q, BoundSide,
    CoverageConfig, Method, ScenarioId, ScenarioSpec, PRIOR_BAYES1, PRIOR_BAYES2,
};
use fiducial_iv::Error;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn treated_rate(id: ScenarioId) -> f64 {
    let records = simulate(&ScenarioSpec::new(id), 1_000_000, 3);
    let arm1: Vec<_> = records.iter().filter(|r| r.z == 1).collect();
    arm1.iter().filter(|r| r.a == 1).count() as f64 / arm1.len() as f64
}

#[test]
fn treatment_uptake_matches_structural_model() {
    assert!((treated_rate(ScenarioId::Scenario2) - 0.4).abs() < 0.002);
    assert!((treated_rate(ScenarioId::Scenario1) - 0.93125).abs() < 0.002);
}

#[test]
fn simulated_cells_fit_true_distribution() {
    for id in [ScenarioId::Scenario1, ScenarioId::Scenario2] {
        let spec = ScenarioSpec::new(id);
        let counts = summarize(&simulate(&spec, 1_000_000, 11)).unwrap();
        let q = true_q(&spec);
        let n = counts.total() as f64;
        let mut stat = 0.0;
        for z in 0..2u8 {
            for c in 0..4 {
                // Joint cell probability including P(Z = z) = 1/2.
                let expected = n * 0.5 * q.arms()[z as usize][c];
                let observed = counts.arm(z)[c] as f64;
                stat += (observed - expected).powi(2) / expected;
            }
        }
        let p = 1.0 - ChiSquared::new(7.0).unwrap().cdf(stat);
        assert!(p > 0.001, "scenario {id}: chi-square {stat}, p {p}");
    }
}

#[test]
fn true_bounds_bracket_true_effect() {
    for id in [ScenarioId::Scenario1, ScenarioId::Scenario2] {
        let spec = ScenarioSpec::new(id);
        let (l, u) = true_bounds(&spec, EstimandKind::Ate, AssumptionLabel::CoreIv).unwrap();
        assert!(l <= spec.true_ate() && spec.true_ate() <= u, "scenario {id}: [{l}, {u}]");
    }
}

#[test]
fn comparator_is_deterministic_and_agrees_asymptotically() {
    let q = [[0.35, 0.25, 0.15, 0.25], [0.15, 0.2, 0.3, 0.35]];
    let counts = CountsTable::new(q.map(|arm| arm.map(|x| (x * 400_000.0) as u64)));
    let run = |seed| {
        bayesian_comparator(&counts, &PRIOR_BAYES1, 400, seed, EstimandKind::Ate, AssumptionLabel::CoreIv, 0.95)
            .unwrap()
    };
    assert_eq!(run(1), run(1));
    let bayes = run(1);
    let fid = analyze(&counts, &AnalysisConfig { n_mcmc: 400, seed: 1, ..AnalysisConfig::default() }).unwrap();
    for (a, b) in [
        (bayes.lower_ci.low, fid.lower_ci.low),
        (bayes.lower_ci.high, fid.lower_ci.high),
        (bayes.upper_ci.low, fid.upper_ci.low),
        (bayes.upper_ci.high, fid.upper_ci.high),
    ] {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn comparator_discards_infeasible_posterior_draws() {
    let bad = CountsTable::new([[2000, 0, 0, 0], [0, 2000, 0, 0]]);
    let r = bayesian_comparator(&bad, &PRIOR_BAYES2, 50, 0, EstimandKind::Ate, AssumptionLabel::CoreIv, 0.95);
    assert_eq!(r, Err(Error::AllDrawsInfeasible));
    // Zero prior weight with zero counts keeps the cell at exactly zero.
    let counts = CountsTable::new([[30, 20, 0, 0], [10, 10, 15, 15]]);
    let ok = bayesian_comparator(&counts, &PRIOR_BAYES1, 50, 0, EstimandKind::Ate, AssumptionLabel::CoreIv, 0.95)
        .unwrap();
    assert!(ok.accepted <= 50 && ok.attempts == 50);
}

#[test]
fn coverage_rows_and_shared_data() {
    let base = CoverageConfig {
        scenario: ScenarioId::Scenario2,
        n_list: vec![40, 160],
        replications: 20,
        n_mcmc: 150,
        seed: 12,
        ..CoverageConfig::default()
    };
    let rows = coverage_experiment(&base).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.lr >= 0.0 && r.ur >= 0.0 && r.wd >= 0.0);
        assert_eq!(r.used + r.stalled, 20);
    }
    let wd = |n, side| rows.iter().find(|r| r.n == n && r.side == side).unwrap().wd;
    assert!(wd(160, BoundSide::Lower) < wd(40, BoundSide::Lower));
    assert!(wd(160, BoundSide::Upper) < wd(40, BoundSide::Upper));
    let bayes = coverage_experiment(&CoverageConfig { method: Method::Bayes1, ..base.clone() }).unwrap();
    assert!(bayes.iter().all(|r| r.method == Method::Bayes1));
    assert_eq!(coverage_experiment(&base).unwrap(), rows);
}
