use cbcast_core::binning::{
    analytic_bits_per_symbol, run_cb2_scheme, run_matching_scheme, simulate_binning, BinningConfig,
    BinningPlan, SchemeOptions, SimError,
};
use cbcast_core::matching::MatchingInstance;
use proptest::prelude::*;

#[test]
fn same_seed_same_result() {
    let cfg = BinningConfig::new(4, 3, 400, 500, 42);
    let a = serde_json::to_value(simulate_binning(&cfg).unwrap()).unwrap();
    let b = serde_json::to_value(simulate_binning(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let opts = SchemeOptions::new(100, 50, 3);
    let a = serde_json::to_value(run_cb2_scheme(&opts).unwrap()).unwrap();
    let b = serde_json::to_value(run_cb2_scheme(&opts).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_mode_failures_stay_under_chebyshev() {
    // 4^9 tuples fit the exhaustive hashing path
    let r = simulate_binning(&BinningConfig::new(4, 3, 9, 300, 1)).unwrap();
    assert_eq!(r.mode, "exact");
    assert!(
        r.binning_failure_rate <= r.chebyshev_bound,
        "{} > {}",
        r.binning_failure_rate,
        r.chebyshev_bound
    );
    assert_eq!(r.decode_errors, 0);
}

#[test]
fn cb2_improves_with_block_length() {
    let floor = 4.0 - 3f64.log2();
    let means: Vec<f64> = [16usize, 100, 400, 1600]
        .iter()
        .map(|&l| {
            let r = run_cb2_scheme(&SchemeOptions::new(l, 40, 5)).unwrap();
            assert_eq!(r.decode_errors, 0, "L={l}");
            r.bits_per_symbol_mean
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
    assert!(means.iter().all(|&m| m >= floor), "{means:?}");
}

#[test]
fn forced_fallback_costs_the_uncoded_rate() {
    let mut opts = SchemeOptions::new(100, 10, 0);
    opts.force_fallback = true;
    let r = run_cb2_scheme(&opts).unwrap();
    assert_eq!(r.binning_failure_rate, 1.0);
    assert!((r.bits_per_symbol_mean - (8.0 * 100.0 + 1.0) / 100.0).abs() < 1e-12);
    assert_eq!(r.decode_errors, 0);

    let inst = MatchingInstance::cb2();
    let r = run_matching_scheme(&inst, &opts).unwrap();
    assert!((r.bits_per_symbol_mean - (2.0 * 100.0 * 2.0 + 1.0) / 100.0).abs() < 1e-12);
}

#[test]
fn maximal_instances_use_one_symbol_per_symbol() {
    let r = run_matching_scheme(&MatchingInstance::cb1(), &SchemeOptions::new(50, 20, 0)).unwrap();
    assert_eq!(r.mode, "single-letter");
    assert_eq!(r.bits_per_symbol_mean, 2.0);
    assert_eq!(r.decode_errors, 0);
}

#[test]
fn invalid_configs_are_rejected() {
    for (n1, n2, l) in [(3, 3, 10), (3, 4, 10), (4, 0, 10), (4, 3, 0)] {
        let err = simulate_binning(&BinningConfig::new(n1, n2, l, 1, 0)).unwrap_err();
        assert!(
            matches!(err, SimError::InvalidConfig(_)),
            "{n1} {n2} {l}: {err:?}"
        );
    }
}

proptest! {
    #[test]
    fn analytic_cost_falls_with_block_length(n2 in 2u64..20, extra in 1u64..20, k in 2usize..40) {
        let n1 = n2 + extra;
        let (l1, l2) = (k * k, (k + 1) * (k + 1));
        let (a, b) = (analytic_bits_per_symbol(n1, n2, l1), analytic_bits_per_symbol(n1, n2, l2));
        prop_assert!(b < a);
        prop_assert!(b > ((n1 as f64) / (n2 as f64)).log2());
        // perfect-square L makes L(1 - delta) integral, so the plan agrees exactly
        let plan = BinningPlan::new(&BinningConfig::new(n1, n2, l1, 1, 0)).unwrap();
        prop_assert!((plan.bits_per_symbol() - a).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_bound_falls_with_block_length(k in 3usize..40) {
        let b = |l: usize| BinningPlan::new(&BinningConfig::new(4, 3, l, 1, 0)).unwrap().chebyshev_bound;
        prop_assert!(b((k + 1) * (k + 1)) < b(k * k));
    }
}
