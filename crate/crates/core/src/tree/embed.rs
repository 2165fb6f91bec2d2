//! Embeddings of one finite signed tree into another.
//!
//! A node `u` of the small tree can sit on a node `v` of the big tree when
//! the signs agree (if required) and the children of `u` can be assigned,
//! injectively, to slots below `v` that can host them. The assignment of
//! children is a bipartite matching, so child order plays no role.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NodeId, SignedTree};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingMode {
    /// Children go to children.
    #[default]
    LevelPreserving,
    /// Children go to strict descendants lying in pairwise distinct child
    /// subtrees.
    Homeomorphic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignPolicy {
    #[default]
    Strict,
    Ignore,
}

/// Node assignment from a small tree into a big tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingWitness {
    assignment: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessViolation {
    #[error("witness covers {found} nodes, small tree has {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("node {0} is not a node of the big tree")]
    OutOfRange(NodeId),
    #[error("root is sent to node {0}")]
    RootNotFixed(NodeId),
    #[error("nodes {0} and {1} share an image")]
    NotInjective(NodeId, NodeId),
    #[error("edge into node {0} is not preserved")]
    EdgeBroken(NodeId),
    #[error("siblings {0} and {1} land in the same child subtree")]
    SiblingsMerged(NodeId, NodeId),
    #[error("sign of node {0} differs from its image")]
    SignMismatch(NodeId),
}

impl EmbeddingWitness {
    pub fn from_assignment(assignment: Vec<NodeId>) -> Self {
        Self { assignment }
    }

    pub fn image(&self, small: NodeId) -> NodeId {
        self.assignment[small]
    }

    pub fn assignment(&self) -> &[NodeId] {
        &self.assignment
    }

    /// The witness of `self` followed by `next`.
    pub fn then(&self, next: &EmbeddingWitness) -> EmbeddingWitness {
        EmbeddingWitness {
            assignment: self.assignment.iter().map(|&b| next.image(b)).collect(),
        }
    }

    /// Pairs of node labels `(small, big)`.
    pub fn label_pairs(&self, small: &SignedTree, big: &SignedTree) -> Vec<(String, String)> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(u, &v)| (small.label(u), big.label(v)))
            .collect()
    }

    /// Replays the witness against `small` and `big`.
    pub fn verify(
        &self,
        small: &SignedTree,
        big: &SignedTree,
        mode: EmbeddingMode,
        policy: SignPolicy,
    ) -> Result<(), WitnessViolation> {
        if self.assignment.len() != small.len() {
            return Err(WitnessViolation::WrongSize {
                expected: small.len(),
                found: self.assignment.len(),
            });
        }
        if let Some(&bad) = self.assignment.iter().find(|&&v| v >= big.len()) {
            return Err(WitnessViolation::OutOfRange(bad));
        }
        if self.image(SignedTree::ROOT) != SignedTree::ROOT {
            return Err(WitnessViolation::RootNotFixed(self.image(SignedTree::ROOT)));
        }
        let mut owner = vec![None; big.len()];
        for (u, &v) in self.assignment.iter().enumerate() {
            if let Some(prev) = owner[v].replace(u) {
                return Err(WitnessViolation::NotInjective(prev, u));
            }
        }
        for u in small.node_ids().skip(1) {
            let parent = small.parent(u).expect("non-root has a parent");
            let (pv, uv) = (self.image(parent), self.image(u));
            let ok = match mode {
                EmbeddingMode::LevelPreserving => big.parent(uv) == Some(pv),
                EmbeddingMode::Homeomorphic => uv != pv && big.is_ancestor_or_self(pv, uv),
            };
            if !ok {
                return Err(WitnessViolation::EdgeBroken(u));
            }
            if policy == SignPolicy::Strict && small.sign(u) != big.sign(uv) {
                return Err(WitnessViolation::SignMismatch(u));
            }
        }
        if mode == EmbeddingMode::Homeomorphic {
            for u in small.node_ids() {
                let pv = self.image(u);
                let mut used: Vec<(NodeId, NodeId)> = Vec::new();
                for &c in small.children(u) {
                    let branch = branch_below(big, pv, self.image(c));
                    if let Some(&(_, other)) = used.iter().find(|(b, _)| *b == branch) {
                        return Err(WitnessViolation::SiblingsMerged(other, c));
                    }
                    used.push((branch, c));
                }
            }
        }
        Ok(())
    }
}

/// Child of `ancestor` on the path down to `node`.
fn branch_below(tree: &SignedTree, ancestor: NodeId, node: NodeId) -> NodeId {
    let mut cur = node;
    while let Some(p) = tree.parent(cur) {
        if p == ancestor {
            return cur;
        }
        cur = p;
    }
    cur
}

struct Embedder<'a> {
    small: &'a SignedTree,
    big: &'a SignedTree,
    mode: EmbeddingMode,
    policy: SignPolicy,
    fits: Vec<Option<bool>>,
    reaches: Vec<Option<bool>>,
}

impl<'a> Embedder<'a> {
    fn new(
        small: &'a SignedTree,
        big: &'a SignedTree,
        mode: EmbeddingMode,
        policy: SignPolicy,
    ) -> Self {
        let cells = small.len() * big.len();
        Self {
            small,
            big,
            mode,
            policy,
            fits: vec![None; cells],
            reaches: vec![None; cells],
        }
    }

    fn cell(&self, u: NodeId, v: NodeId) -> usize {
        u * self.big.len() + v
    }

    /// Targets available to the children of a node placed on `v`.
    fn slots(&self, v: NodeId) -> &'a [NodeId] {
        self.big.children(v)
    }

    /// Whether child `c` can be hosted by slot `s`.
    fn hosts(&mut self, c: NodeId, s: NodeId) -> bool {
        match self.mode {
            EmbeddingMode::LevelPreserving => self.fits(c, s),
            EmbeddingMode::Homeomorphic => self.reaches(c, s),
        }
    }

    fn reaches(&mut self, u: NodeId, v: NodeId) -> bool {
        let key = self.cell(u, v);
        if let Some(r) = self.reaches[key] {
            return r;
        }
        let r = self.fits(u, v) || self.big.children(v).iter().any(|&w| self.reaches(u, w));
        self.reaches[key] = Some(r);
        r
    }

    fn fits(&mut self, u: NodeId, v: NodeId) -> bool {
        let key = self.cell(u, v);
        if let Some(r) = self.fits[key] {
            return r;
        }
        let r = self.sign_ok(u, v) && self.match_children(u, v).is_some();
        self.fits[key] = Some(r);
        r
    }

    fn sign_ok(&self, u: NodeId, v: NodeId) -> bool {
        u == SignedTree::ROOT
            || self.policy == SignPolicy::Ignore
            || self.small.sign(u) == self.big.sign(v)
    }

    /// Maximum matching of the children of `u` into the slots of `v`;
    /// `Some(slot per child)` when every child is matched.
    fn match_children(&mut self, u: NodeId, v: NodeId) -> Option<Vec<NodeId>> {
        let children = self.small.children(u);
        let slots = self.slots(v);
        if children.len() > slots.len() {
            return None;
        }
        let adjacency: Vec<Vec<usize>> = children
            .iter()
            .map(|&c| {
                (0..slots.len())
                    .filter(|&j| self.hosts(c, slots[j]))
                    .collect()
            })
            .collect();
        let mut slot_owner: Vec<Option<usize>> = vec![None; slots.len()];
        for i in 0..children.len() {
            let mut seen = vec![false; slots.len()];
            if !augment(i, &adjacency, &mut slot_owner, &mut seen) {
                return None;
            }
        }
        let mut assigned = vec![0; children.len()];
        for (j, owner) in slot_owner.iter().enumerate() {
            if let Some(i) = owner {
                assigned[*i] = slots[j];
            }
        }
        Some(assigned)
    }

    fn place(&mut self, u: NodeId, v: NodeId, out: &mut [NodeId]) {
        out[u] = v;
        let slots = self.match_children(u, v).expect("placement was checked");
        let children = self.small.children(u);
        for (&c, &slot) in children.iter().zip(&slots) {
            let target = match self.mode {
                EmbeddingMode::LevelPreserving => slot,
                EmbeddingMode::Homeomorphic => self
                    .big
                    .subtree(slot)
                    .into_iter()
                    .find(|&w| self.fits(c, w))
                    .expect("slot reaches a host"),
            };
            self.place(c, target, out);
        }
    }
}

fn augment(
    i: usize,
    adjacency: &[Vec<usize>],
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &j in &adjacency[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none_or(|k| augment(k, adjacency, owner, seen)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// Searches for an embedding of `small` into `big` fixing the roots.
pub fn tree_embeds(
    small: &SignedTree,
    big: &SignedTree,
    mode: EmbeddingMode,
    policy: SignPolicy,
) -> Option<EmbeddingWitness> {
    if small == big {
        return Some(EmbeddingWitness {
            assignment: small.node_ids().collect(),
        });
    }
    let mut embedder = Embedder::new(small, big, mode, policy);
    if !embedder.fits(SignedTree::ROOT, SignedTree::ROOT) {
        return None;
    }
    let mut assignment = vec![0; small.len()];
    embedder.place(SignedTree::ROOT, SignedTree::ROOT, &mut assignment);
    Some(EmbeddingWitness { assignment })
}

#[cfg(test)]
mod tests {
    use super::super::{parse_tree, Sign, SignRule, TreeGenerator};
    use super::*;

    const MODES: [EmbeddingMode; 2] = [EmbeddingMode::LevelPreserving, EmbeddingMode::Homeomorphic];

    fn linear(s: Sign, d: usize) -> SignedTree {
        TreeGenerator::Linear(s).truncate(d)
    }

    fn binary(s: Sign, d: usize) -> SignedTree {
        TreeGenerator::FullBinary(SignRule::Uniform(s)).truncate(d)
    }

    fn explicit(text: &str) -> SignedTree {
        match parse_tree(text).unwrap() {
            TreeGenerator::Explicit(t) => t,
            other => panic!("not explicit: {other}"),
        }
    }

    #[test]
    fn linear_into_binary_along_leftmost_branch() {
        let small = linear(Sign::Plus, 3);
        let big = binary(Sign::Plus, 3);
        let w = tree_embeds(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict,
        )
        .unwrap();
        w.verify(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict,
        )
        .unwrap();
        let labels: Vec<String> = w
            .label_pairs(&small, &big)
            .into_iter()
            .map(|(_, b)| b)
            .collect();
        assert_eq!(labels, ["ε", "0", "00", "000"]);
    }

    #[test]
    fn branching_cannot_shrink() {
        let small = binary(Sign::Plus, 2);
        let big = linear(Sign::Plus, 5);
        for mode in MODES {
            assert!(tree_embeds(&small, &big, mode, SignPolicy::Ignore).is_none());
        }
    }

    #[test]
    fn sign_policy() {
        let a = linear(Sign::Plus, 3);
        let b = linear(Sign::Minus, 3);
        assert!(tree_embeds(&a, &b, EmbeddingMode::LevelPreserving, SignPolicy::Strict).is_none());
        let w = tree_embeds(&a, &b, EmbeddingMode::LevelPreserving, SignPolicy::Ignore).unwrap();
        w.verify(&a, &b, EmbeddingMode::LevelPreserving, SignPolicy::Ignore)
            .unwrap();
        assert_eq!(
            w.verify(&a, &b, EmbeddingMode::LevelPreserving, SignPolicy::Strict),
            Err(WitnessViolation::SignMismatch(1))
        );
    }

    #[test]
    fn identity_in_both_modes() {
        let t = explicit("(. (+ (-) (+ (+))) (-))");
        for mode in MODES {
            let w = tree_embeds(&t, &t, mode, SignPolicy::Strict).unwrap();
            assert_eq!(w.assignment(), (0..t.len()).collect::<Vec<_>>().as_slice());
        }
    }

    #[test]
    fn matching_ignores_child_order() {
        // The first child of the small root only fits the second slot.
        let small = explicit("(. (+ (+) (+)) (+))");
        let big = explicit("(. (+) (+ (+) (+)))");
        let w = tree_embeds(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict,
        )
        .unwrap();
        w.verify(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict,
        )
        .unwrap();
    }

    #[test]
    fn matching_needs_augmenting_paths() {
        // Greedy assignment of child 0 to slot 0 would block child 1.
        let small = explicit("(. (+) (+ (-)))");
        let big = explicit("(. (+ (-)) (+))");
        assert!(tree_embeds(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict
        )
        .is_some());
    }

    #[test]
    fn homeomorphic_skips_levels() {
        let small = explicit("(. (+) (+))");
        let big = explicit("(. (- (+) (+)))");
        assert!(tree_embeds(
            &small,
            &big,
            EmbeddingMode::LevelPreserving,
            SignPolicy::Strict
        )
        .is_none());
        let w = tree_embeds(
            &small,
            &big,
            EmbeddingMode::Homeomorphic,
            SignPolicy::Strict,
        );
        // Both children would land under the single child of the big root.
        assert!(w.is_none());
        let big = explicit("(. (- (+)) (+))");
        let w = tree_embeds(
            &small,
            &big,
            EmbeddingMode::Homeomorphic,
            SignPolicy::Strict,
        )
        .unwrap();
        w.verify(
            &small,
            &big,
            EmbeddingMode::Homeomorphic,
            SignPolicy::Strict,
        )
        .unwrap();
        assert_eq!(
            w.verify(
                &small,
                &big,
                EmbeddingMode::LevelPreserving,
                SignPolicy::Strict
            ),
            Err(WitnessViolation::EdgeBroken(
                w.assignment().iter().position(|&v| v == 3).unwrap()
            ))
        );
    }

    #[test]
    fn verifier_rejects_bad_witnesses() {
        let t = linear(Sign::Plus, 2);
        let m = EmbeddingMode::LevelPreserving;
        let p = SignPolicy::Strict;
        assert!(matches!(
            EmbeddingWitness::from_assignment(vec![0, 1]).verify(&t, &t, m, p),
            Err(WitnessViolation::WrongSize { .. })
        ));
        assert_eq!(
            EmbeddingWitness::from_assignment(vec![1, 0, 2]).verify(&t, &t, m, p),
            Err(WitnessViolation::RootNotFixed(1))
        );
        assert_eq!(
            EmbeddingWitness::from_assignment(vec![0, 1, 1]).verify(&t, &t, m, p),
            Err(WitnessViolation::NotInjective(1, 2))
        );
        assert_eq!(
            EmbeddingWitness::from_assignment(vec![0, 2, 1]).verify(&t, &t, m, p),
            Err(WitnessViolation::EdgeBroken(1))
        );
        assert_eq!(
            EmbeddingWitness::from_assignment(vec![0, 1, 9]).verify(&t, &t, m, p),
            Err(WitnessViolation::OutOfRange(9))
        );
    }
}
