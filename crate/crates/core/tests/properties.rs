use addlab::dissociation::is_dissociated;
use addlab::experiments::{
    bound_battery, concentration_mc, generate, small_dim_pipeline, BatteryConfig, FamilySpec, GenSpec, PipelineConfig,
    SmallDimVariant, THEOREMS,
};
use addlab::report::{records_from_csv, records_to_csv, SetDocument};
use addlab::{GSet, GroupSpec};
use proptest::prelude::*;

fn random_sets() -> impl Strategy<Value = GSet> {
    (8usize..=200, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..=n.min(12)).prop_map(move |size| {
            let spec = GenSpec::RandomSubset { group: GroupSpec::cyclic(n).unwrap(), size };
            generate(&spec, seed).unwrap().set
        })
    })
}

fn generators() -> impl Strategy<Value = GenSpec> {
    prop_oneof![
        (10usize..=128, 1usize..=9).prop_map(|(n, s)| GenSpec::RandomSubset { group: GroupSpec::cyclic(n).unwrap(), size: s }),
        (3usize..=6, 1usize..=10).prop_map(|(n, s)| GenSpec::RandomSubset { group: GroupSpec::binary(n).unwrap(), size: s.min(1 << n) }),
        (10usize..=100, 1usize..=9).prop_map(|(n, s)| GenSpec::SymmetricRandom { group: GroupSpec::cyclic(n).unwrap(), size: s }),
        (2usize..=3, 1usize..=3).prop_map(|(k, l)| GenSpec::SubspacePlusDissociated { n: 6, k, lambda: l, independent: true }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_statements_always_hold(gen in generators(), seed in any::<u64>()) {
        let exact: Vec<&str> = THEOREMS.iter().filter(|t| t.exact).map(|t| t.id).collect();
        let fam = FamilySpec { generator: gen, count: 2, seed };
        let out = bound_battery(&fam, &exact, &BatteryConfig { mc_trials: 8, ..BatteryConfig::default() }).unwrap();
        prop_assert!(out.errors.is_empty(), "{:?}", out.errors);
        for r in &out.records {
            prop_assert!(r.acceptable(), "{r:?}");
        }
    }

    #[test]
    fn battery_is_deterministic_and_csv_round_trips(gen in generators(), seed in any::<u64>()) {
        let fam = FamilySpec { generator: gen, count: 2, seed };
        let cfg = BatteryConfig { mc_trials: 12, ..BatteryConfig::default() };
        let ids = ["concentration", "small-dim-energy", "rudin-moment", "t-vs-e3", "chang-cover"];
        let a = records_to_csv(&bound_battery(&fam, &ids, &cfg).unwrap().records).unwrap();
        let b = records_to_csv(&bound_battery(&fam, &ids, &cfg).unwrap().records).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(records_to_csv(&records_from_csv(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn generated_sets_meet_their_description(gen in generators(), seed in any::<u64>()) {
        let g = generate(&gen, seed).unwrap();
        prop_assert_eq!(&g, &generate(&gen, seed).unwrap());
        match &gen {
            GenSpec::RandomSubset { size, .. } => prop_assert_eq!(g.set.len(), *size),
            GenSpec::SymmetricRandom { size, .. } => {
                prop_assert_eq!(g.set.len(), *size);
                prop_assert!(g.set.is_symmetric());
            }
            GenSpec::SubspacePlusDissociated { k, lambda, .. } => {
                prop_assert_eq!(g.parts["H"].len(), 1 << k);
                prop_assert!(is_dissociated(&g.parts["Lambda"]).unwrap().is_dissociated());
                prop_assert_eq!(g.parts["Lambda"].len(), *lambda);
                prop_assert!(g.parts["H"].intersection(&g.parts["Lambda"]).unwrap().is_empty());
            }
            _ => {}
        }
    }

    #[test]
    fn set_documents_round_trip(a in random_sets()) {
        let text = SetDocument::from_set(&a, Some("x".into())).to_json().unwrap();
        prop_assert_eq!(SetDocument::parse(&text).unwrap().to_set(1 << 16).unwrap(), a);
    }

    #[test]
    fn deficiency_tail_is_monotone(a in random_sets(), d in 1usize..=8, seed in any::<u64>()) {
        let r = concentration_mc(&a, d, 1.0, 60, seed).unwrap();
        prop_assert_eq!(r.tail.len(), d + 1);
        prop_assert_eq!(r.tail[0].p, 1.0);
        for w in r.tail.windows(2) {
            prop_assert!(w[1].p <= w[0].p);
        }
        for t in r.tail.iter().chain(&r.tail_beyond_repeats) {
            prop_assert!(t.lo <= t.p && t.p <= t.hi);
        }
        if let Some(best) = &r.best {
            prop_assert!(best.subset.len() as f64 >= best.dim as f64);
            prop_assert!(best.subset.iter().all(|&x| a.contains(x)));
        }
    }

    #[test]
    fn small_dim_output_is_a_nonempty_subset(a in random_sets(), e32 in any::<bool>()) {
        let variant = if e32 { SmallDimVariant::E32 } else { SmallDimVariant::Energy };
        let r = small_dim_pipeline(&a, variant, &PipelineConfig::default()).unwrap();
        prop_assert!(!r.subset.is_empty());
        prop_assert!(r.subset.is_subset(&a));
        prop_assert!(r.candidates.iter().any(|c| c.branch == r.chosen) || r.trivial);
    }
}
