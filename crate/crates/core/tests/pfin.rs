use std::collections::BTreeSet;

use handle_forcing::pfin::{
    classify_cyclic, compose, eq_mod_fin, frechet_contains, induced_auto, invert,
    AlmostPermutation, ModFinSet,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WINDOW: u64 = 240;

fn random_set(rng: &mut ChaCha8Rng) -> ModFinSet {
    let period = rng.gen_range(1..=6);
    let start = rng.gen_range(0..10);
    let residues: Vec<u64> = (0..period).filter(|_| rng.gen_bool(0.5)).collect();
    let head: Vec<u64> = (0..start).filter(|_| rng.gen_bool(0.5)).collect();
    ModFinSet::new(start, period, residues, head).unwrap()
}

fn random_perm(rng: &mut ChaCha8Rng) -> AlmostPermutation {
    let period: u64 = rng.gen_range(1..=4);
    let mut sigma: Vec<u64> = (0..period).collect();
    sigma.shuffle(rng);
    let d: Vec<i64> = (0..period)
        .map(|r| sigma[r as usize] as i64 - r as i64 + period as i64 * rng.gen_range(-1..=2))
        .collect();
    let lowest = -d.iter().copied().min().unwrap();
    let start = rng.gen_range(0..8).max(lowest.max(0) as u64);
    let tail = AlmostPermutation::new(start, period, d, []).unwrap();
    let (start, period) = (tail.start(), tail.period());
    let bound = start + 4 * period + 12;
    let hit: BTreeSet<u64> = (0..bound + 4 * period + 12)
        .filter_map(|n| tail.apply(n))
        .collect();
    let mut free: Vec<u64> = (0..bound).filter(|v| !hit.contains(v)).collect();
    free.shuffle(rng);
    let exceptions: Vec<(u64, u64)> = (0..start)
        .filter(|_| rng.gen_bool(0.7))
        .filter_map(|n| free.pop().map(|v| (n, v)))
        .collect();
    AlmostPermutation::new(start, period, tail.displacements().to_vec(), exceptions).unwrap()
}

fn seeded<T: std::fmt::Debug>(f: fn(&mut ChaCha8Rng) -> T) -> impl Strategy<Value = T> {
    any::<u64>().prop_map(move |seed| f(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `f(A ∩ D_f)` restricted to `[0, WINDOW)`, by scanning the domain.
fn brute_image(f: &AlmostPermutation, a: &ModFinSet) -> Vec<u64> {
    let mut out: Vec<u64> = (0..WINDOW + 64)
        .filter(|&n| a.contains(n))
        .filter_map(|n| f.apply(n))
        .filter(|&m| m < WINDOW)
        .collect();
    out.sort_unstable();
    out
}

fn finite_patch(rng: &mut ChaCha8Rng) -> ModFinSet {
    ModFinSet::finite((0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..40)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn image_is_exact(f in seeded(random_perm), a in seeded(random_set)) {
        prop_assert_eq!(induced_auto(&f, &a).members_below(WINDOW), brute_image(&f, &a));
    }

    #[test]
    fn induced_map_is_a_boolean_homomorphism(
        f in seeded(random_perm),
        a in seeded(random_set),
        b in seeded(random_set),
    ) {
        let d = |s: &ModFinSet| induced_auto(&f, s);
        prop_assert_eq!(d(&a.union(&b)), d(&a).union(&d(&b)));
        prop_assert_eq!(d(&a.intersection(&b)), d(&a).intersection(&d(&b)));
        let everything = d(&ModFinSet::naturals());
        prop_assert!(frechet_contains(&everything));
        prop_assert_eq!(d(&a.complement()), everything.difference(&d(&a)));
        prop_assert!(eq_mod_fin(&d(&a.complement()), &d(&a).complement()));
    }

    #[test]
    fn induced_map_respects_finite_changes(f in seeded(random_perm), a in seeded(random_set), seed in any::<u64>()) {
        let patch = finite_patch(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = a.symmetric_difference(&patch);
        prop_assert!(eq_mod_fin(&a, &b));
        prop_assert!(eq_mod_fin(&induced_auto(&f, &a), &induced_auto(&f, &b)));
    }

    #[test]
    fn composition_and_inversion(
        f in seeded(random_perm),
        g in seeded(random_perm),
        h in seeded(random_perm),
        a in seeded(random_set),
    ) {
        let fg = compose(&f, &g);
        for n in 0..WINDOW {
            prop_assert_eq!(fg.apply(n), g.apply(n).and_then(|m| f.apply(m)));
        }
        prop_assert_eq!(compose(&fg, &h), compose(&f, &compose(&g, &h)));
        prop_assert_eq!(induced_auto(&fg, &a), induced_auto(&f, &induced_auto(&g, &a)));
        let fi = invert(&f);
        for n in 0..WINDOW {
            if let Some(m) = f.apply(n) {
                prop_assert_eq!(fi.apply(m), Some(n));
            }
        }
        prop_assert_eq!(invert(&fi), f.clone());
        let id = AlmostPermutation::identity();
        prop_assert!(compose(&f, &fi).eq_mod_fin(&id));
        prop_assert!(compose(&fi, &f).eq_mod_fin(&id));
        prop_assert_eq!(compose(&f, &id), f.clone());
        prop_assert!(eq_mod_fin(&induced_auto(&compose(&fi, &f), &a), &a));
    }

    #[test]
    fn set_operations_are_pointwise(a in seeded(random_set), b in seeded(random_set)) {
        for n in 0..WINDOW {
            prop_assert_eq!(a.union(&b).contains(n), a.contains(n) || b.contains(n));
            prop_assert_eq!(a.intersection(&b).contains(n), a.contains(n) && b.contains(n));
            prop_assert_eq!(a.complement().contains(n), !a.contains(n));
        }
        let differ_late = (100..WINDOW).any(|n| a.contains(n) != b.contains(n));
        prop_assert_eq!(eq_mod_fin(&a, &b), !differ_late);
    }

    #[test]
    fn representation_is_canonical(a in seeded(random_set), extra in 0u64..5, mult in 1u64..4) {
        let start = a.start() + extra;
        let period = a.period() * mult;
        let residues: Vec<u64> = (0..period).filter(|&r| a.contains(start + (r + period - start % period) % period)).collect();
        let head: Vec<u64> = (0..start).filter(|&n| a.contains(n)).collect();
        prop_assert_eq!(ModFinSet::new(start, period, residues, head).unwrap(), a.clone());
        prop_assert_eq!(a.to_string().parse::<ModFinSet>().unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<ModFinSet>(&json).unwrap(), a);
    }

    #[test]
    fn permutation_text_and_json_round_trip(f in seeded(random_perm)) {
        prop_assert_eq!(f.to_string().parse::<AlmostPermutation>().unwrap(), f.clone());
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<AlmostPermutation>(&json).unwrap(), f);
    }

    #[test]
    fn frechet_filter_is_a_filter(a in seeded(random_set), b in seeded(random_set), seed in any::<u64>()) {
        let cofinite_brute = |s: &ModFinSet| (100..WINDOW).all(|n| s.contains(n));
        prop_assert_eq!(frechet_contains(&a), cofinite_brute(&a));
        let big = finite_patch(&mut ChaCha8Rng::seed_from_u64(seed)).complement();
        prop_assert!(frechet_contains(&big));
        if frechet_contains(&a) && frechet_contains(&b) {
            prop_assert!(frechet_contains(&a.intersection(&b)));
        }
        if frechet_contains(&a) {
            prop_assert!(frechet_contains(&a.union(&b)));
        }
        prop_assert!(!frechet_contains(&ModFinSet::empty()));
    }

    #[test]
    fn cyclicity_witness_is_a_recurring_reversal(f in seeded(random_perm)) {
        let verdict = classify_cyclic(&f);
        // Reversals in the tail, searched far beyond the window the
        // classifier inspects.
        let tail: Vec<u64> = (f.start()..f.start() + 60).collect();
        let reversal = tail.iter().any(|&i| tail.iter().any(|&j| i < j && f.apply(i) > f.apply(j)));
        prop_assert_eq!(verdict.cyclic, reversal);
        if let Some((i, j)) = verdict.witness {
            let p = f.period();
            for k in 0..5 {
                prop_assert!(f.apply(i + k * p) > f.apply(j + k * p));
            }
        }
    }
}

#[test]
fn named_maps() {
    let shift = AlmostPermutation::shift(1);
    let swap = AlmostPermutation::pairswap();
    assert!(!classify_cyclic(&shift).cyclic);
    assert_eq!(classify_cyclic(&swap).witness, Some((0, 1)));
    assert!(!classify_cyclic(&AlmostPermutation::identity()).cyclic);
    assert_eq!(compose(&shift, &shift), AlmostPermutation::shift(2));
    assert_eq!(invert(&swap), swap);
    assert!(eq_mod_fin(
        &induced_auto(&compose(&shift, &invert(&shift)), &ModFinSet::evens()),
        &ModFinSet::evens()
    ));
}
