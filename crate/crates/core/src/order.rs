//! Finite forcing posets.
//!
//! `p ≤ q` reads "p is stronger than q" (p extends q). For a poset built
//! from a tree, descendants are stronger than their ancestors and two
//! conditions are compatible when they have a common extension, i.e. a
//! common descendant.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::SignedTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
    #[error("duplicate condition {0:?}")]
    DuplicateCondition(String),
    #[error("relation is not reflexive at {0:?}")]
    NotReflexive(String),
    #[error("relation is not antisymmetric: {0:?} and {1:?}")]
    NotAntisymmetric(String, String),
    #[error("relation is not transitive: {0:?} <= {1:?} <= {2:?}")]
    NotTransitive(String, String, String),
}

/// A finite partial order with named conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcingPoset {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// `below[q]` holds every `p` with `p <= q`.
    below: Vec<FixedBitSet>,
}

impl ForcingPoset {
    /// Builds a poset from the full relation `pairs` (each `(p, q)` meaning
    /// `p <= q`), checking the order axioms.
    pub fn new(labels: Vec<String>, pairs: &[(String, String)]) -> Result<Self, OrderError> {
        let n = labels.len();
        let index = index_labels(&labels)?;
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (p, q) in pairs {
            let p = *index
                .get(p)
                .ok_or_else(|| OrderError::UnknownCondition(p.clone()))?;
            let q = *index
                .get(q)
                .ok_or_else(|| OrderError::UnknownCondition(q.clone()))?;
            below[q].insert(p);
        }
        let poset = Self {
            labels,
            index,
            below,
        };
        poset.check_axioms()?;
        Ok(poset)
    }

    /// Builds a poset from covering pairs `(p, q)` (`p` directly below `q`),
    /// taking the reflexive-transitive closure.
    pub fn from_covers(
        labels: Vec<String>,
        covers: &[(String, String)],
    ) -> Result<Self, OrderError> {
        let n = labels.len();
        let index = index_labels(&labels)?;
        let mut below = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in below.iter_mut().enumerate() {
            row.insert(i);
        }
        for (p, q) in covers {
            let p = *index
                .get(p)
                .ok_or_else(|| OrderError::UnknownCondition(p.clone()))?;
            let q = *index
                .get(q)
                .ok_or_else(|| OrderError::UnknownCondition(q.clone()))?;
            below[q].insert(p);
        }
        // Warshall closure on rows.
        for k in 0..n {
            let row_k = below[k].clone();
            for row in below.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        let poset = Self {
            labels,
            index,
            below,
        };
        poset.check_axioms()?;
        Ok(poset)
    }

    pub fn antichain(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        Self::from_covers(labels, &[]).expect("antichain is a poset")
    }

    /// `c0 > c1 > ... > c(n-1)`, with `c0` the weakest.
    pub fn chain(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (1..n)
            .map(|i| (labels[i].clone(), labels[i - 1].clone()))
            .collect();
        Self::from_covers(labels, &covers).expect("chain is a poset")
    }

    fn check_axioms(&self) -> Result<(), OrderError> {
        let n = self.len();
        for p in 0..n {
            if !self.leq(p, p) {
                return Err(OrderError::NotReflexive(self.labels[p].clone()));
            }
        }
        for p in 0..n {
            for q in self.below[p].ones() {
                if q != p && self.leq(p, q) {
                    return Err(OrderError::NotAntisymmetric(
                        self.labels[q].clone(),
                        self.labels[p].clone(),
                    ));
                }
            }
        }
        for q in 0..n {
            for p in self.below[q].ones() {
                if !self.below[p].is_subset(&self.below[q]) {
                    let r = self.below[p]
                        .difference(&self.below[q])
                        .next()
                        .expect("non-subset");
                    return Err(OrderError::NotTransitive(
                        self.labels[r].clone(),
                        self.labels[p].clone(),
                        self.labels[q].clone(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, OrderError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| OrderError::UnknownCondition(label.to_string()))
    }

    fn check(&self, p: usize) -> Result<(), OrderError> {
        if p < self.len() {
            Ok(())
        } else {
            Err(OrderError::UnknownCondition(format!("#{p}")))
        }
    }

    /// `p <= q`. Indices must be in range.
    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.below[q].contains(p)
    }

    /// The down-set `{r : r <= p}`.
    pub fn down(&self, p: usize) -> &FixedBitSet {
        &self.below[p]
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> FixedBitSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    /// Smallest down-closed superset of `set`.
    pub fn down_closure(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = self.empty_set();
        for p in set.ones() {
            out.union_with(&self.below[p]);
        }
        out
    }

    /// Conditions with nothing strictly below them.
    pub fn minimal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| self.below[p].count_ones(..) == 1)
            .collect()
    }

    /// Whether `p` and `q` have a common extension.
    pub fn compatible(&self, p: usize, q: usize) -> Result<bool, OrderError> {
        self.check(p)?;
        self.check(q)?;
        Ok(!self.below[p].is_disjoint(&self.below[q]))
    }

    /// Label-level [`compatible`](Self::compatible).
    pub fn compatible_labels(&self, p: &str, q: &str) -> Result<bool, OrderError> {
        self.compatible(self.index_of(p)?, self.index_of(q)?)
    }

    /// Exhaustive separativity check. The counterexample, when present, is
    /// the first failing `(p, q)` in lexicographic index order.
    pub fn is_separative(&self) -> SeparativityVerdict {
        let n = self.len();
        // compatible_with[q] = {r : r compatible with q}
        let compatible_with: Vec<FixedBitSet> = (0..n)
            .map(|q| {
                let mut row = self.empty_set();
                for r in 0..n {
                    if !self.below[r].is_disjoint(&self.below[q]) {
                        row.insert(r);
                    }
                }
                row
            })
            .collect();
        for p in 0..n {
            for (q, compatible) in compatible_with.iter().enumerate() {
                if !self.leq(p, q) && self.below[p].is_subset(compatible) {
                    return SeparativityVerdict {
                        separative: false,
                        counterexample: Some(Counterexample {
                            p: self.labels[p].clone(),
                            q: self.labels[q].clone(),
                        }),
                    };
                }
            }
        }
        SeparativityVerdict {
            separative: true,
            counterexample: None,
        }
    }

    /// Whether every condition has an element of `subset` below it.
    pub fn is_dense_subset(&self, subset: &[usize]) -> Result<bool, OrderError> {
        let mut d = self.empty_set();
        for &p in subset {
            self.check(p)?;
            d.insert(p);
        }
        Ok((0..self.len()).all(|p| !self.below[p].is_disjoint(&d)))
    }

    pub fn dump(&self) -> PosetDump {
        let mut leq = Vec::new();
        for q in 0..self.len() {
            for p in self.below[q].ones() {
                leq.push([self.labels[p].clone(), self.labels[q].clone()]);
            }
        }
        leq.sort_by(|a, b| {
            let key = |x: &[String; 2]| (self.index[&x[0]], self.index[&x[1]]);
            key(a).cmp(&key(b))
        });
        PosetDump {
            conditions: self.labels.clone(),
            leq,
        }
    }

    pub fn from_dump(dump: &PosetDump) -> Result<Self, OrderError> {
        let pairs: Vec<(String, String)> = dump
            .leq
            .iter()
            .map(|[p, q]| (p.clone(), q.clone()))
            .collect();
        Self::new(dump.conditions.clone(), &pairs)
    }
}

fn index_labels(labels: &[String]) -> Result<HashMap<String, usize>, OrderError> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(OrderError::DuplicateCondition(l.clone()));
        }
    }
    Ok(index)
}

/// JSON form `{conditions: [...], leq: [[p, q], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetDump {
    pub conditions: Vec<String>,
    pub leq: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub p: String,
    pub q: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparativityVerdict {
    pub separative: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl SeparativityVerdict {
    /// Checks the counterexample against the definition by brute force:
    /// `p ≰ q` and every `r <= p` is compatible with `q`.
    pub fn replay(&self, poset: &ForcingPoset) -> bool {
        match (&self.counterexample, self.separative) {
            (None, true) => true,
            (Some(c), false) => {
                let (Ok(p), Ok(q)) = (poset.index_of(&c.p), poset.index_of(&c.q)) else {
                    return false;
                };
                !poset.leq(p, q)
                    && (0..poset.len())
                        .filter(|&r| poset.leq(r, p))
                        .all(|r| (0..poset.len()).any(|k| poset.leq(k, r) && poset.leq(k, q)))
            }
            _ => false,
        }
    }
}

/// The poset of a tree: nodes (optionally without the root), with
/// `p <= q` iff `q` is on the root path of `p`. Signs are discarded.
pub fn poset_from_tree(tree: &SignedTree, include_root: bool) -> ForcingPoset {
    let ids: Vec<usize> = tree
        .node_ids()
        .filter(|&id| include_root || id != SignedTree::ROOT)
        .collect();
    let labels: Vec<String> = ids.iter().map(|&id| tree.label(id)).collect();
    let n = ids.len();
    let offset = usize::from(!include_root);
    let mut below = vec![FixedBitSet::with_capacity(n); n];
    for (i, &id) in ids.iter().enumerate() {
        // Walk up from each node, marking it below every ancestor in range.
        let mut cur = Some(id);
        while let Some(a) = cur {
            if include_root || a != SignedTree::ROOT {
                below[a - offset].insert(i);
            }
            cur = tree.parent(a);
        }
    }
    let index = index_labels(&labels).expect("tree labels are unique");
    ForcingPoset {
        labels,
        index,
        below,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_tree, Sign, SignRule, TreeGenerator};

    fn binary(d: usize) -> ForcingPoset {
        poset_from_tree(
            &TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned)).truncate(d),
            true,
        )
    }

    #[test]
    fn binary_depth_one_reading() {
        let p = binary(1);
        assert_eq!(p.labels(), ["ε", "0", "1"]);
        let (e, a, b) = (0, 1, 2);
        assert!(p.leq(a, e) && p.leq(b, e));
        assert!(!p.leq(a, b) && !p.leq(b, a));
        assert!(!p.leq(e, a));
    }

    #[test]
    fn tree_posets_satisfy_axioms() {
        for text in [
            "binary",
            "linear(+)",
            "binary_branch(-)",
            "(. (+ (+) (-)) (-))",
        ] {
            let g = parse_tree(text).unwrap();
            for root in [true, false] {
                let p = poset_from_tree(&g.truncate(3), root);
                let dump = p.dump();
                assert_eq!(ForcingPoset::from_dump(&dump).unwrap(), p);
            }
        }
    }

    #[test]
    fn linear_without_root_is_a_chain() {
        let p = poset_from_tree(&TreeGenerator::Linear(Sign::Plus).truncate(2), false);
        assert_eq!(p.len(), 2);
        assert!(p.leq(1, 0));
        assert_eq!(p.labels(), ["0", "00"]);
    }

    #[test]
    fn root_only() {
        let t = SignedTree::root_only();
        assert_eq!(poset_from_tree(&t, true).len(), 1);
        assert!(poset_from_tree(&t, false).is_empty());
    }

    #[test]
    fn compatibility() {
        let p = binary(1);
        assert!(p.compatible_labels("0", "ε").unwrap());
        assert!(!p.compatible_labels("0", "1").unwrap());
        assert!(p.compatible_labels("1", "1").unwrap());
        assert_eq!(
            p.compatible_labels("0", "2"),
            Err(OrderError::UnknownCondition("2".into()))
        );
        assert!(p.compatible(0, 7).is_err());
    }

    #[test]
    fn separativity_examples() {
        assert!(binary(4).is_separative().separative);
        let chain = ForcingPoset::chain(3);
        let v = chain.is_separative();
        assert!(!v.separative);
        assert_eq!(
            v.counterexample,
            Some(Counterexample {
                p: "c0".into(),
                q: "c1".into()
            })
        );
        assert!(v.replay(&chain));
        let anti = ForcingPoset::antichain(4);
        assert!(anti.is_separative().separative);
    }

    #[test]
    fn density_examples() {
        let p = binary(2);
        let leaves: Vec<usize> = p.minimal();
        assert_eq!(leaves.len(), 4);
        assert!(p.is_dense_subset(&leaves).unwrap());
        assert!(!p.is_dense_subset(&[0]).unwrap());
        let all: Vec<usize> = (0..p.len()).collect();
        assert!(p.is_dense_subset(&all).unwrap());
        assert!(p.is_dense_subset(&[99]).is_err());
    }

    #[test]
    fn axiom_violations_are_reported() {
        let l = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let pair = |a: &str, b: &str| (a.to_string(), b.to_string());
        assert_eq!(
            ForcingPoset::new(l(&["a", "b"]), &[pair("a", "a")]),
            Err(OrderError::NotReflexive("b".into()))
        );
        assert!(matches!(
            ForcingPoset::new(
                l(&["a", "b"]),
                &[
                    pair("a", "a"),
                    pair("b", "b"),
                    pair("a", "b"),
                    pair("b", "a")
                ]
            ),
            Err(OrderError::NotAntisymmetric(..))
        ));
        assert!(matches!(
            ForcingPoset::new(
                l(&["a", "b", "c"]),
                &[
                    pair("a", "a"),
                    pair("b", "b"),
                    pair("c", "c"),
                    pair("a", "b"),
                    pair("b", "c")
                ]
            ),
            Err(OrderError::NotTransitive(..))
        ));
        assert!(matches!(
            ForcingPoset::from_covers(l(&["a", "b"]), &[pair("a", "b"), pair("b", "a")]),
            Err(OrderError::NotAntisymmetric(..))
        ));
        assert_eq!(
            ForcingPoset::new(l(&["a", "a"]), &[]),
            Err(OrderError::DuplicateCondition("a".into()))
        );
    }

    #[test]
    fn dump_json() {
        let p = binary(1);
        let json = serde_json::to_string(&p.dump()).unwrap();
        assert_eq!(
            json,
            r#"{"conditions":["ε","0","1"],"leq":[["ε","ε"],["0","ε"],["0","0"],["1","ε"],["1","1"]]}"#
        );
    }
}
