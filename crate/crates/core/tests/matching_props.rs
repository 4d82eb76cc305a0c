use std::collections::BTreeSet;

use cbcast_core::matching::{
    acceptable_sets, all_translations, build_delta_gamma, classify, enumerate_cycles,
    induced_permutation, maximal_factorization, Cell, GridCycle, MatchingInstance, Permutation,
    StructureClass,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 1_000_000;

/// Cycles as edge sets of the complete bipartite graph rows x columns: every
/// non-empty cell subset where each touched row and column holds exactly two
/// cells and the subset is connected.
fn brute_cycle_sets(m1: usize, m2: usize) -> BTreeSet<BTreeSet<Cell>> {
    let cells: Vec<Cell> = (0..m1).flat_map(|a| (0..m2).map(move |b| (a, b))).collect();
    assert!(cells.len() <= 20);
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << cells.len()) {
        let set: Vec<Cell> = (0..cells.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| cells[i])
            .collect();
        let mut rows = vec![0; m1];
        let mut cols = vec![0; m2];
        for &(a, b) in &set {
            rows[a] += 1;
            cols[b] += 1;
        }
        if rows.iter().chain(&cols).any(|&d| d != 0 && d != 2) {
            continue;
        }
        // connectivity through shared rows or columns
        let mut seen = vec![false; set.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..set.len() {
                if !seen[j] && (set[i].0 == set[j].0 || set[i].1 == set[j].1) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            out.insert(set.into_iter().collect());
        }
    }
    out
}

#[test]
fn cycle_enumeration_matches_brute_force() {
    for (m1, m2) in [
        (1, 4),
        (2, 2),
        (2, 3),
        (3, 2),
        (3, 3),
        (2, 5),
        (4, 3),
        (3, 4),
        (4, 4),
        (3, 5),
    ] {
        let brute = brute_cycle_sets(m1, m2);
        let found = enumerate_cycles(m1, m2, CAP).unwrap();
        let sets: BTreeSet<BTreeSet<Cell>> = found
            .iter()
            .map(|c| c.cells().iter().copied().collect())
            .collect();
        assert_eq!(
            sets.len(),
            found.len(),
            "{m1}x{m2}: a cycle was listed twice"
        );
        assert_eq!(sets, brute, "{m1}x{m2}");
    }
    assert_eq!(enumerate_cycles(2, 2, CAP).unwrap().len(), 1);
    assert_eq!(enumerate_cycles(3, 2, CAP).unwrap().len(), 3);
    assert_eq!(enumerate_cycles(3, 3, CAP).unwrap().len(), 15);
}

fn random_perm(rng: &mut ChaCha8Rng, m: usize) -> Permutation {
    let mut v: Vec<usize> = (0..m).collect();
    v.shuffle(rng);
    Permutation::new(v).unwrap()
}

/// A factorized table, with one cell overwritten at random when `perturb` is set.
fn random_instance(seed: u64, perturb: bool) -> MatchingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(2..=4);
    let m1 = rng.random_range(1..=3);
    let m2 = rng.random_range(1..=3);
    let d: Vec<Permutation> = (0..m1).map(|_| random_perm(&mut rng, m)).collect();
    let g: Vec<Permutation> = (0..m2).map(|_| random_perm(&mut rng, m)).collect();
    let mut table: Vec<Vec<Permutation>> = (0..m1)
        .map(|i| (0..m2).map(|j| g[j].compose(&d[i])).collect())
        .collect();
    if perturb {
        let (a, b) = (rng.random_range(0..m1), rng.random_range(0..m2));
        table[a][b] = random_perm(&mut rng, m);
    }
    MatchingInstance::new(m, m1, m2, table).unwrap()
}

proptest! {
    #[test]
    fn reversed_cycle_induces_inverse(seed in any::<u64>(), perturb in any::<bool>()) {
        let inst = random_instance(seed, perturb);
        for c in enumerate_cycles(inst.m1(), inst.m2(), CAP).unwrap() {
            let fwd = induced_permutation(&inst, &c).unwrap();
            let back = induced_permutation(&inst, &c.reversed()).unwrap();
            prop_assert_eq!(back, fwd.inverse());
        }
    }

    #[test]
    fn maximal_iff_factorization_iff_identity_cycles(seed in any::<u64>(), perturb in any::<bool>()) {
        let inst = random_instance(seed, perturb);
        let cycles: Vec<GridCycle> = enumerate_cycles(inst.m1(), inst.m2(), CAP).unwrap();
        let perms: Vec<Permutation> = cycles.iter().map(|c| induced_permutation(&inst, c).unwrap()).collect();
        let all_identity = perms.iter().all(Permutation::is_identity);
        let factorized = maximal_factorization(&inst).is_some();
        let class = classify(&inst, CAP);
        prop_assert_eq!(all_identity, factorized);
        prop_assert_eq!(class == StructureClass::Maximal, factorized);
        if !perturb {
            prop_assert!(factorized);
        }
        if !factorized {
            let minimal = perms.iter().all(Permutation::is_derangement);
            prop_assert_eq!(class == StructureClass::Minimal, minimal);
        }
    }

    #[test]
    fn every_cell_has_the_same_number_of_acceptable_sets(m1 in 1usize..6, m2 in 1usize..6) {
        let translations = all_translations(m1, m2);
        prop_assert_eq!(translations.len(), m1 * m2);
        for set in &translations {
            prop_assert_eq!(set.cells.len(), m1 + m2 - 1);
        }
        for a in 0..m1 {
            for b in 0..m2 {
                prop_assert_eq!(acceptable_sets(m1, m2, (a, b)).len(), m1 + m2 - 1);
            }
        }
    }

    #[test]
    fn bullet_schemes_decode_on_any_instance(seed in any::<u64>()) {
        let inst = random_instance(seed, true);
        for bs in all_translations(inst.m1(), inst.m2()) {
            let s = build_delta_gamma(&inst, &bs);
            prop_assert!(s.satisfies_invariant(&inst));
            prop_assert!(s.round_trips_on(&inst, bs.cells.iter().copied()));
        }
    }

    #[test]
    fn feasible_sets_of_bullet_schemes_respect_the_size_bound(seed in any::<u64>()) {
        let inst = random_instance(seed, true);
        for bs in all_translations(inst.m1(), inst.m2()) {
            let s = build_delta_gamma(&inst, &bs);
            let rep = cbcast_core::matching::feasible_set_check(
                &inst,
                |a, b, w1| bs.contains((a, b)).then(|| s.encode_bullet(a, w1)),
                CAP,
            );
            prop_assert!(rep.passed(), "{:?}", rep.violations);
            prop_assert!(rep.max_set_size < inst.m1() + inst.m2());
            prop_assert!(rep.sets.iter().all(|f| !f.has_derangement_cycle));
        }
    }
}
