use std::collections::BTreeMap;

use cbcast_core::distributions::{
    converse_denominator, from_linear, Atom, GeneralCbInstance, ALL, W1, W1P, W2, W2P,
};
use cbcast_core::lcb::{build_scheme, LinearCbInstance};
use cbcast_core::matching::{to_general, MatchingInstance, Permutation};
use cbcast_core::oracle::{build_conflicts, min_entropy_coloring, DEFAULT_NODE_BUDGET};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

/// Random pmf on up to `max_atoms` distinct tuples over ternary alphabets,
/// with integer weights; unused labels are dropped.
fn random_general(seed: u64, max_atoms: usize) -> GeneralCbInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_atoms);
    let mut tuples: BTreeMap<[usize; 4], i64> = BTreeMap::new();
    while tuples.len() < n {
        let t = std::array::from_fn(|_| rng.random_range(0..3));
        tuples.insert(t, rng.random_range(1..=5));
    }
    let total: i64 = tuples.values().sum();
    let mut alphabets: [Vec<usize>; 4] = Default::default();
    for t in tuples.keys() {
        for v in 0..4 {
            if !alphabets[v].contains(&t[v]) {
                alphabets[v].push(t[v]);
            }
        }
    }
    let atoms = tuples
        .iter()
        .map(|(t, &w)| Atom {
            values: std::array::from_fn(|v| alphabets[v].iter().position(|&x| x == t[v]).unwrap()),
            prob: BigRational::new(BigInt::from(w), BigInt::from(total)),
        })
        .collect();
    let labels = alphabets.map(|a| a.iter().map(|x| x.to_string()).collect());
    GeneralCbInstance::new(labels, atoms).unwrap()
}

/// Minimum entropy over all proper partitions, by restricted-growth strings.
fn brute_min_entropy(g: &GeneralCbInstance) -> f64 {
    let graph = build_conflicts(g).unwrap();
    let probs: Vec<f64> = g
        .atoms()
        .iter()
        .map(|a| num_traits::ToPrimitive::to_f64(&a.prob).unwrap())
        .collect();
    let n = probs.len();
    let mut best = f64::INFINITY;
    let mut rgs = vec![0usize; n];
    fn rec(
        i: usize,
        k: usize,
        rgs: &mut Vec<usize>,
        probs: &[f64],
        ok: &dyn Fn(&[usize]) -> bool,
        best: &mut f64,
    ) {
        if i == rgs.len() {
            if ok(rgs) {
                let mut mass = vec![0.0; k];
                for (j, &c) in rgs.iter().enumerate() {
                    mass[c] += probs[j];
                }
                let h: f64 = mass
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * p.log2())
                    .sum();
                *best = best.min(h);
            }
            return;
        }
        for c in 0..=k {
            rgs[i] = c;
            rec(i + 1, k.max(c + 1), rgs, probs, ok, best);
        }
    }
    let ok = |colors: &[usize]| graph.is_proper(colors);
    rec(0, 0, &mut rgs, &probs, &ok, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coloring_matches_partition_enumeration(seed in any::<u64>()) {
        let g = random_general(seed, 8);
        let c = min_entropy_coloring(&g, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!(c.optimal);
        prop_assert!(build_conflicts(&g).unwrap().is_proper(&c.colors));
        prop_assert!((c.h_bits - brute_min_entropy(&g)).abs() < EPS);
    }

    #[test]
    fn coloring_lies_between_converse_and_support_entropy(seed in any::<u64>()) {
        let g = random_general(seed, 12);
        let c = min_entropy_coloring(&g, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!(c.h_bits + EPS >= converse_denominator(&g));
        prop_assert!(c.h_bits + EPS >= g.cond_entropy(W1, W1P).max(g.cond_entropy(W2, W2P)));
        prop_assert!(c.h_bits <= g.entropy(ALL) + EPS);
    }

    #[test]
    fn maximal_matching_needs_log_m(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..=3);
        let (m1, m2) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let mut perm = || {
            let mut v: Vec<usize> = (0..m).collect();
            v.shuffle(&mut rng);
            Permutation::new(v).unwrap()
        };
        let d: Vec<Permutation> = (0..m1).map(|_| perm()).collect();
        let gm: Vec<Permutation> = (0..m2).map(|_| perm()).collect();
        let table = (0..m1).map(|i| (0..m2).map(|j| gm[j].compose(&d[i])).collect()).collect();
        let inst = MatchingInstance::new(m, m1, m2, table).unwrap();
        let c = min_entropy_coloring(&to_general(&inst).unwrap(), DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!((c.h_bits - (m as f64).log2()).abs() < EPS);
    }

    #[test]
    fn binary_linear_one_shot_cost_is_the_linear_cost(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..=4);
        let mut cols = |lo: usize, hi: usize| -> Vec<Vec<i64>> {
            let n = rng.random_range(lo..=hi);
            (0..n).map(|_| (0..m).map(|_| rng.random_range(0..2)).collect()).collect()
        };
        let (v1, v1p, v2, v2p) = (cols(1, 2), cols(0, 2), cols(1, 2), cols(0, 2));
        let inst = LinearCbInstance::from_columns(2, m, &v1, &v1p, &v2, &v2p).unwrap();
        prop_assume!(inst.converse_symbols() > 0);
        let g = from_linear(&inst).unwrap();
        prop_assume!(g.atoms().len() <= 16);
        let c = min_entropy_coloring(&g, DEFAULT_NODE_BUDGET).unwrap();
        let cost = build_scheme(&inst).unwrap().scheme.cost_symbols as f64;
        // one-shot optimum is sandwiched by the converse, which the linear cost meets
        prop_assert!(c.h_bits <= cost + EPS);
        prop_assert!(c.h_bits + EPS >= converse_denominator(&g));
        prop_assert!((converse_denominator(&g) - cost).abs() < EPS);
    }
}

#[test]
fn branch_and_bound_handles_larger_supports() {
    // 27 atoms: above the exact limit, so the search path is exercised
    let tuples: Vec<[String; 4]> = (0..27)
        .map(|k| {
            let (a, b, c) = (k % 3, k / 3 % 3, k / 9);
            [
                ((a + b) % 3).to_string(),
                a.to_string(),
                ((b + c) % 3).to_string(),
                c.to_string(),
            ]
        })
        .collect();
    let g = GeneralCbInstance::uniform_from_labels(&tuples).unwrap();
    let c = min_entropy_coloring(&g, DEFAULT_NODE_BUDGET).unwrap();
    assert!(build_conflicts(&g).unwrap().is_proper(&c.colors));
    assert!(c.h_bits + EPS >= converse_denominator(&g));
    assert!(c.h_bits <= g.entropy(W1 | W2) + EPS);
}
