use fiducial_iv::model::{
    estimand, group_matrix, observable_map, summarize, AssumptionSet, Compliance, EstimandKind,
    Stratum, StratumVector, TrialRecord, NUM_STRATA,
};
use proptest::prelude::*;

fn stratum_vector() -> impl Strategy<Value = StratumVector> {
    prop::array::uniform16(0.0f64..1.0).prop_filter_map("nonzero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| {
            let mut p = w;
            p.iter_mut().for_each(|x| *x /= s);
            StratumVector::new(p).unwrap()
        })
    })
}

/// Stratum `ij,kl` lands in cell `(a, y)` of arm `z` iff `a = A_z` and `y = Y_a`,
/// written out without the helper methods.
fn lands_in(index: usize, z: usize, a: usize, y: usize) -> bool {
    let (i, j, k, l) = (index >> 3 & 1, index >> 2 & 1, index >> 1 & 1, index & 1);
    let a_z = if z == 0 { i } else { j };
    let y_a = if a == 0 { k } else { l };
    a == a_z && y == y_a
}

#[test]
fn observable_map_matches_brute_force_listing() {
    let g = group_matrix();
    for z in 0..2 {
        for a in 0..2 {
            for y in 0..2 {
                for (s, &got) in g[4 * z + 2 * a + y].iter().enumerate() {
                    let expected = f64::from(u8::from(lands_in(s, z, a, y)));
                    assert_eq!(got, expected, "z={z} a={a} y={y} s={s}");
                }
            }
        }
    }
    // Every stratum shows up exactly once per arm.
    for arm in g.chunks(4) {
        let hits: Vec<f64> = (0..NUM_STRATA).map(|s| arm.iter().map(|row| row[s]).sum()).collect();
        assert_eq!(hits, vec![1.0; NUM_STRATA]);
    }
}

#[test]
fn each_group_has_four_strata() {
    let g = group_matrix();
    for row in g {
        assert_eq!(row.iter().sum::<f64>(), 4.0);
    }
}

#[test]
fn assumption_sets_drop_the_expected_classes() {
    let mono = AssumptionSet::monotonicity();
    let drug = AssumptionSet::new_drug();
    for s in Stratum::all() {
        assert_eq!(mono.is_forced_zero(s), s.compliance() == Compliance::Defier);
        assert_eq!(
            drug.is_forced_zero(s),
            matches!(s.compliance(), Compliance::Defier | Compliance::AlwaysTaker)
        );
        assert!(!AssumptionSet::core().is_forced_zero(s));
    }
    assert_eq!(mono.free_strata().len(), 12);
    assert_eq!(drug.free_strata().len(), 8);
}

proptest! {
    #[test]
    fn observable_map_lands_in_simplex(p in stratum_vector()) {
        let q = observable_map(&p);
        for arm in q.arms() {
            prop_assert!(arm.iter().all(|&x| x >= 0.0));
            prop_assert!((arm.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn observable_map_is_linear(p in stratum_vector(), r in stratum_vector(), t in 0.0f64..1.0) {
        let mix: [f64; NUM_STRATA] = std::array::from_fn(|i| t * p.as_array()[i] + (1.0 - t) * r.as_array()[i]);
        let qm = observable_map(&StratumVector::new(mix).unwrap()).flat();
        let (qp, qr) = (observable_map(&p).flat(), observable_map(&r).flat());
        for c in 0..8 {
            prop_assert!((qm[c] - (t * qp[c] + (1.0 - t) * qr[c])).abs() < 1e-12);
        }
    }

    #[test]
    fn ate_is_difference_of_potential_outcome_means(p in stratum_vector()) {
        let ey1: f64 = Stratum::all().filter(|s| s.y1() == 1).map(|s| p.get(s)).sum();
        let ey0: f64 = Stratum::all().filter(|s| s.y0() == 1).map(|s| p.get(s)).sum();
        let ate = estimand(EstimandKind::Ate).evaluate(&p).unwrap();
        prop_assert!((ate - (ey1 - ey0)).abs() < 1e-12);
    }

    #[test]
    fn cace_is_conditional_effect(p in stratum_vector()) {
        let compliers: Vec<Stratum> = Stratum::all().filter(|s| s.compliance() == Compliance::Complier).collect();
        let mass: f64 = compliers.iter().map(|&s| p.get(s)).sum();
        let eff: f64 = compliers.iter().map(|&s| p.get(s) * (f64::from(s.y1()) - f64::from(s.y0()))).sum();
        let v = estimand(EstimandKind::Cace).evaluate(&p).unwrap();
        prop_assert!((v - eff / mass).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn summarize_tallies_every_record(raw in prop::collection::vec((0u8..2, 0u8..2, 0u8..2), 2..200)) {
        let mut records: Vec<TrialRecord> = raw.iter().map(|&(z, a, y)| TrialRecord::new(z, a, y).unwrap()).collect();
        records.push(TrialRecord::new(0, 0, 0).unwrap());
        records.push(TrialRecord::new(1, 0, 0).unwrap());
        let c = summarize(&records).unwrap();
        prop_assert_eq!(c.total(), records.len() as u64);
        for z in 0..2u8 {
            for a in 0..2u8 {
                for y in 0..2u8 {
                    let n = records.iter().filter(|r| (r.z, r.a, r.y) == (z, a, y)).count() as u64;
                    prop_assert_eq!(c.get(z, a, y), n);
                }
            }
        }
    }
}

#[test]
fn undefined_ratio_returns_none() {
    let mut p = [0.0; NUM_STRATA];
    p[Stratum::from_bits(0, 0, 0, 1).index()] = 1.0;
    let p = StratumVector::new(p).unwrap();
    assert_eq!(estimand(EstimandKind::Cace).evaluate(&p), None);
    assert_eq!(estimand(EstimandKind::NeverTakerAce).evaluate(&p), Some(1.0));
}

#[test]
fn estimand_and_assumption_names_round_trip() {
    for k in EstimandKind::ALL {
        assert_eq!(k.name().parse::<EstimandKind>().unwrap(), k);
    }
    for a in fiducial_iv::model::AssumptionLabel::ALL {
        assert_eq!(a.name().parse::<fiducial_iv::model::AssumptionLabel>().unwrap(), a);
    }
    assert!("bogus".parse::<EstimandKind>().is_err());
}
