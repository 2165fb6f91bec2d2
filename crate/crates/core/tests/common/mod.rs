#![allow(dead_code)]

use handle_forcing::tree::{Sign, SignedTree, TreeNode};
use proptest::prelude::*;

/// Builds a tree from a parent list: node `i + 1` hangs below node
/// `parents[i] % (i + 1)`. Children keep insertion order.
pub fn tree_from_parents(parents: &[usize], signs: &[bool]) -> SignedTree {
    let n = parents.len() + 1;
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &p) in parents.iter().enumerate() {
        kids[p % (i + 1)].push(i + 1);
    }
    fn build(id: usize, kids: &[Vec<usize>], signs: &[bool]) -> TreeNode {
        let sign = if id == 0 {
            Sign::Unsigned
        } else if signs.get(id - 1).copied().unwrap_or(true) {
            Sign::Plus
        } else {
            Sign::Minus
        };
        TreeNode::new(
            sign,
            kids[id].iter().map(|&c| build(c, kids, signs)).collect(),
        )
    }
    SignedTree::from_nested(&build(0, &kids, signs)).unwrap()
}

/// Random signed trees with between `min` and `max` nodes.
pub fn arb_tree(min: usize, max: usize) -> impl Strategy<Value = SignedTree> {
    (min.max(1)..=max).prop_flat_map(|n| {
        (
            proptest::collection::vec(0usize..1000, n - 1),
            proptest::collection::vec(any::<bool>(), n - 1),
        )
            .prop_map(|(parents, signs)| tree_from_parents(&parents, &signs))
    })
}

/// Every ordered unsigned tree shape with exactly `n` nodes, as nested
/// nodes with `+` below the root.
pub fn all_shapes(n: usize) -> Vec<TreeNode> {
    fn forests(n: usize) -> Vec<Vec<TreeNode>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 1..=n {
            for head in trees(first) {
                for rest in forests(n - first) {
                    let mut f = vec![head.clone()];
                    f.extend(rest);
                    out.push(f);
                }
            }
        }
        out
    }
    fn trees(n: usize) -> Vec<TreeNode> {
        forests(n - 1)
            .into_iter()
            .map(|children| TreeNode::new(Sign::Plus, children))
            .collect()
    }
    trees(n)
        .into_iter()
        .map(|mut t| {
            t.sign = Sign::Unsigned;
            t
        })
        .collect()
}
