mod common;

use common::{all_shapes, arb_tree};
use handle_forcing::tree::{
    parse_tree, print_tree, tree_embeds, EmbeddingMode, Sign, SignPolicy, SignRule, SignedTree,
    TreeGenerator,
};
use proptest::prelude::*;

const MODES: [EmbeddingMode; 2] = [EmbeddingMode::LevelPreserving, EmbeddingMode::Homeomorphic];
const POLICIES: [SignPolicy; 2] = [SignPolicy::Strict, SignPolicy::Ignore];

/// The child of `top` whose subtree holds `node`.
fn branch_of(t: &SignedTree, top: usize, node: usize) -> Option<usize> {
    let mut cur = node;
    while let Some(p) = t.parent(cur) {
        if p == top {
            return Some(cur);
        }
        cur = p;
    }
    None
}

/// Checks a node map against the definition, without the library's verifier.
fn is_embedding(
    f: &[usize],
    small: &SignedTree,
    big: &SignedTree,
    mode: EmbeddingMode,
    policy: SignPolicy,
) -> bool {
    if f[0] != 0 {
        return false;
    }
    for u in 0..f.len() {
        for v in u + 1..f.len() {
            if f[u] == f[v] {
                return false;
            }
        }
    }
    for u in 1..f.len() {
        let p = small.parent(u).unwrap();
        if policy == SignPolicy::Strict && small.sign(u) != big.sign(f[u]) {
            return false;
        }
        match mode {
            EmbeddingMode::LevelPreserving => {
                if big.parent(f[u]) != Some(f[p]) {
                    return false;
                }
            }
            EmbeddingMode::Homeomorphic => {
                if branch_of(big, f[p], f[u]).is_none() {
                    return false;
                }
            }
        }
    }
    if mode == EmbeddingMode::Homeomorphic {
        for p in 0..f.len() {
            let kids = small.children(p);
            for (i, &a) in kids.iter().enumerate() {
                for &b in &kids[i + 1..] {
                    if branch_of(big, f[p], f[a]) == branch_of(big, f[p], f[b]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Exhaustive search over all node maps.
fn brute_embeds(
    small: &SignedTree,
    big: &SignedTree,
    mode: EmbeddingMode,
    policy: SignPolicy,
) -> bool {
    fn go(
        f: &mut Vec<usize>,
        small: &SignedTree,
        big: &SignedTree,
        mode: EmbeddingMode,
        policy: SignPolicy,
    ) -> bool {
        if f.len() == small.len() {
            return is_embedding(f, small, big, mode, policy);
        }
        for v in 0..big.len() {
            f.push(v);
            if go(f, small, big, mode, policy) {
                return true;
            }
            f.pop();
        }
        false
    }
    go(&mut vec![0], small, big, mode, policy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn explicit_trees_round_trip_through_the_dsl(t in arb_tree(1, 40)) {
        let text = print_tree(&TreeGenerator::Explicit(t.clone()));
        let back = parse_tree(&text).unwrap();
        prop_assert_eq!(print_tree(&back), text);
        prop_assert_eq!(back, TreeGenerator::Explicit(t.clone()));
        prop_assert_eq!(SignedTree::from_nested(&t.to_nested()).unwrap(), t);
    }

    #[test]
    fn embedding_search_matches_exhaustive_search(small in arb_tree(1, 5), big in arb_tree(1, 7)) {
        for mode in MODES {
            for policy in POLICIES {
                let found = tree_embeds(&small, &big, mode, policy);
                prop_assert_eq!(found.is_some(), brute_embeds(&small, &big, mode, policy));
                if let Some(w) = found {
                    prop_assert!(is_embedding(w.assignment(), &small, &big, mode, policy));
                    prop_assert!(w.verify(&small, &big, mode, policy).is_ok());
                }
            }
        }
    }

    #[test]
    fn embeddings_compose(a in arb_tree(1, 5), b in arb_tree(1, 7), c in arb_tree(1, 9)) {
        for mode in MODES {
            if let (Some(ab), Some(bc)) = (
                tree_embeds(&a, &b, mode, SignPolicy::Ignore),
                tree_embeds(&b, &c, mode, SignPolicy::Ignore),
            ) {
                let ac = ab.then(&bc);
                prop_assert!(ac.verify(&a, &c, mode, SignPolicy::Ignore).is_ok());
            }
        }
    }

    #[test]
    fn truncation_is_a_prefix(t in arb_tree(1, 30), d in 0usize..6) {
        let cut = t.truncated(d);
        prop_assert!(cut.depth() <= d);
        let w = tree_embeds(&cut, &t, EmbeddingMode::LevelPreserving, SignPolicy::Strict);
        prop_assert!(w.is_some());
    }
}

#[test]
fn every_tree_embeds_into_itself() {
    for n in 1..=8 {
        for shape in all_shapes(n) {
            let t = SignedTree::from_nested(&shape).unwrap();
            for mode in MODES {
                let w = tree_embeds(&t, &t, mode, SignPolicy::Strict).unwrap();
                assert_eq!(w.assignment(), (0..t.len()).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn generator_level_counts_match_truncations() {
    let gens = [
        TreeGenerator::Linear(Sign::Plus),
        TreeGenerator::FullBinary(SignRule::Alternating),
        TreeGenerator::BinaryWithBranch(Sign::Minus),
        TreeGenerator::periodic_levels("p", vec![vec![Sign::Plus, Sign::Minus], vec![Sign::Minus]]),
    ];
    for g in &gens {
        let counted = g.level_counts(6);
        let profile: Vec<u128> = g
            .truncate(6)
            .level_profile()
            .iter()
            .filter(|e| e.level > 0)
            .map(|e| e.nodes as u128)
            .collect();
        assert_eq!(counted, profile, "{g}");
    }
}

#[test]
fn linear_embeds_in_every_binary_family_but_not_conversely() {
    for d in 1..=6 {
        let lin = TreeGenerator::Linear(Sign::Plus).truncate(d);
        for g in [
            TreeGenerator::FullBinary(SignRule::Uniform(Sign::Plus)),
            TreeGenerator::BinaryWithBranch(Sign::Plus),
        ] {
            let bin = g.truncate(d);
            assert!(tree_embeds(
                &lin,
                &bin,
                EmbeddingMode::LevelPreserving,
                SignPolicy::Strict
            )
            .is_some());
            assert!(
                tree_embeds(&bin, &lin, EmbeddingMode::Homeomorphic, SignPolicy::Ignore).is_none()
            );
        }
    }
}
