use fiducial_iv::engine::{
    analyze, bounds_for_draws, quantile_ci, run_acceptance_sampler, AnalysisConfig,
    AnalysisResult,
};
use fiducial_iv::model::{
    estimand, AssumptionLabel, AssumptionSet, CountsTable, EstimandKind, ObservableDist,
};
use fiducial_iv::oracle::monotone_cace_closed_form;
use fiducial_iv::sampler::RngStream;
use fiducial_iv::Error;
use rand::Rng;

fn config(n_mcmc: usize, seed: u64) -> AnalysisConfig {
    AnalysisConfig {
        n_mcmc,
        seed,
        ..AnalysisConfig::default()
    }
}

#[test]
fn vitamin_a_samples_are_ordered_and_in_range() {
    let r = analyze(&fiducial_iv::datasets::vitamin_a(), &config(500, 1)).unwrap();
    assert_eq!(r.samples.len(), 500);
    for s in &r.samples {
        assert!(s.l <= s.u && (-1.0..=1.0).contains(&s.l) && (-1.0..=1.0).contains(&s.u));
    }
    let min_l = r.samples.iter().map(|s| s.l).fold(f64::INFINITY, f64::min);
    let max_u = r.samples.iter().map(|s| s.u).fold(f64::NEG_INFINITY, f64::max);
    assert!(min_l <= r.lower_point && r.lower_point <= r.upper_point && r.upper_point <= max_u);
    assert!(r.lower_ci.contains(r.lower_point) && r.upper_ci.contains(r.upper_point));
    assert!(r.acceptance_rate > 0.0 && r.acceptance_rate <= 1.0);
}

#[test]
fn fixed_seed_is_bit_identical_and_seeds_differ() {
    let counts = CountsTable::new([[40, 35, 10, 15], [20, 25, 30, 25]]);
    let a = analyze(&counts, &config(300, 9)).unwrap();
    let b = analyze(&counts, &config(300, 9)).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let c = analyze(&counts, &config(300, 10)).unwrap();
    assert_ne!(a.samples, c.samples);
}

#[test]
fn worker_count_does_not_change_results() {
    let counts = CountsTable::new([[40, 35, 10, 15], [20, 25, 30, 25]]);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| analyze(&counts, &config(200, 4)).unwrap().to_json())
    };
    assert_eq!(run(1), run(3));
    // Stalls are reproduced at the same place as well.
    let bad = CountsTable::new([[300, 0, 0, 0], [0, 300, 0, 0]]);
    let stall = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_acceptance_sampler(&bad, &AssumptionSet::core(), 20, 0, Some(500)))
    };
    assert_eq!(stall(1), stall(4));
}

#[test]
fn narrower_level_nests_inside_wider() {
    let counts = CountsTable::new([[60, 25, 5, 10], [15, 20, 35, 30]]);
    let r = analyze(&counts, &config(800, 2)).unwrap();
    let l: Vec<f64> = r.samples.iter().map(|s| s.l).collect();
    let wide = quantile_ci(&l, 0.025, 0.975).unwrap();
    let narrow = quantile_ci(&l, 0.05, 0.95).unwrap();
    assert!(wide.low <= narrow.low && narrow.high <= wide.high);
    assert_eq!(wide, r.lower_ci);
}

#[test]
fn monotonicity_does_not_widen_point_interval() {
    let counts = CountsTable::new([[400, 300, 100, 200], [150, 100, 300, 450]]);
    let core = analyze(&counts, &config(1000, 3)).unwrap();
    let mono = analyze(
        &counts,
        &AnalysisConfig {
            assumptions: AssumptionLabel::Monotonicity,
            ..config(1000, 3)
        },
    )
    .unwrap();
    let noise = 0.01;
    assert!(mono.lower_point >= core.lower_point - noise);
    assert!(mono.upper_point <= core.upper_point + noise);
}

#[test]
fn monotone_cace_is_point_identified_by_sampling() {
    // q generated with no defiers: compliers 0.5, never-takers 0.3, always-takers 0.2.
    let q = ObservableDist::new([[0.45, 0.35, 0.08, 0.12], [0.15, 0.15, 0.28, 0.42]]).unwrap();
    let n = 20_000.0;
    let counts = CountsTable::new(q.arms().map(|arm| arm.map(|x| (x * n) as u64)));
    let r = analyze(
        &counts,
        &AnalysisConfig {
            estimand: EstimandKind::Cace,
            assumptions: AssumptionLabel::Monotonicity,
            ..config(600, 5)
        },
    )
    .unwrap();
    let truth = monotone_cace_closed_form(&q).unwrap();
    let spread = r.lower_ci.width().max(r.upper_ci.width());
    assert!((r.upper_point - r.lower_point).abs() < 2.0 * spread, "{r:?}");
    assert!((r.lower_point - truth).abs() < 2.0 * spread);
}

#[test]
fn spread_of_lower_bounds_shrinks_like_root_n() {
    let q = [[0.3, 0.3, 0.2, 0.2], [0.2, 0.2, 0.3, 0.3]];
    let sd = |n: f64| {
        let counts = CountsTable::new(q.map(|arm| arm.map(|x| (x * n) as u64)));
        let r = analyze(&counts, &config(3000, 6)).unwrap();
        let l: Vec<f64> = r.samples.iter().map(|s| s.l).collect();
        let m = l.iter().sum::<f64>() / l.len() as f64;
        (l.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (l.len() - 1) as f64).sqrt()
    };
    let ratio = sd(5000.0) / sd(20000.0);
    assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn uniform_quantiles() {
    let mut rng = RngStream::new(8, 0).generator();
    let v: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let ci = quantile_ci(&v, 0.025, 0.975).unwrap();
    assert!((ci.low - 0.025).abs() < 0.005 && (ci.high - 0.975).abs() < 0.005);
}

#[test]
fn degenerate_fraction_is_reported() {
    // Sparse counts make the complier mass reach zero on many draws.
    let counts = CountsTable::new([[3, 2, 0, 0], [2, 3, 0, 0]]);
    let r = analyze(
        &counts,
        &AnalysisConfig {
            estimand: EstimandKind::Cace,
            ..config(200, 7)
        },
    )
    .unwrap();
    assert!(r.degenerate_fraction > 0.0 && r.degenerate_fraction <= 1.0);
    assert!(r.samples.iter().any(|s| s.degenerate));
}

#[test]
fn stall_reports_partial_progress() {
    let bad = CountsTable::new([[300, 0, 0, 0], [0, 300, 0, 0]]);
    let err = analyze(
        &bad,
        &AnalysisConfig {
            max_attempts: Some(50),
            ..config(10, 0)
        },
    )
    .unwrap_err();
    assert_eq!(err, Error::AcceptanceStalled { accepted: 0, requested: 10, attempts: 50 });
}

#[test]
fn mismatched_assumptions_are_a_contract_violation() {
    // Accept under the core set, then bound under a stricter one.
    let counts = CountsTable::new([[10, 10, 40, 40], [40, 40, 10, 10]]);
    let acc = run_acceptance_sampler(&counts, &AssumptionSet::core(), 100, 1, None).unwrap();
    let res = bounds_for_draws(&acc.draws, &estimand(EstimandKind::Ate), &AssumptionSet::new_drug());
    assert_eq!(res, Err(Error::InfeasibleDraw));
}

#[test]
fn result_serializes_with_contract_field_names() {
    let r: AnalysisResult = analyze(&fiducial_iv::datasets::vitamin_a(), &config(20, 0)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in [
        "samples", "accepted", "attempts", "acceptance_rate", "lower_point", "upper_point",
        "lower_ci", "upper_ci", "degenerate_fraction", "estimand", "assumptions", "seed", "level",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let mut csv = Vec::new();
    r.write_samples_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("j,l,u,degenerate\n0,"));
    assert_eq!(text.lines().count(), 21);
    assert!(analyze(&fiducial_iv::datasets::vitamin_a(), &AnalysisConfig { level: 1.0, ..config(5, 0) }).is_err());
}
