//! Regular-open completion of finite posets.
//!
//! An open set of a poset is a down-set. Its regularization is
//! `U* = {p : ∀q ≤ p ∃r ≤ q, r ∈ U}`, the interior of the closure; the
//! fixed points form a complete Boolean algebra with meet `∩`, join
//! `(U ∪ V)*` and complement `{p : ↓p ∩ U = ∅}`.
//!
//! In a finite poset every regular open set is determined by the minimal
//! conditions it contains, so the completion has `2^m` elements for `m`
//! minimal conditions. Enumeration runs over subsets of the minimal
//! conditions and regularizes each one.

mod cantor;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cantor::{branch_to_interval, CantorClopen, CantorInterval};

use crate::bits::BitString;
use crate::order::{poset_from_tree, ForcingPoset};
use crate::tree::{Sign, SignRule, TreeGenerator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("completion has 2^{atoms} elements, above the cap of {cap}")]
    CapExceeded { atoms: usize, cap: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// A regular open subset of a poset's conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ROElement {
    carrier: FixedBitSet,
}

impl ROElement {
    pub fn carrier(&self) -> &FixedBitSet {
        &self.carrier
    }

    pub fn is_zero(&self) -> bool {
        self.carrier.is_clear()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.carrier.contains(p)
    }

    pub fn is_subset(&self, other: &ROElement) -> bool {
        self.carrier.is_subset(&other.carrier)
    }

    pub fn conditions(&self) -> Vec<usize> {
        self.carrier.ones().collect()
    }

    pub fn labels(&self, poset: &ForcingPoset) -> Vec<String> {
        self.carrier
            .ones()
            .map(|p| poset.label(p).to_string())
            .collect()
    }
}

/// `U* = {p : every q ≤ p has some element of U below it}`.
pub fn regularize(poset: &ForcingPoset, set: &FixedBitSet) -> ROElement {
    let n = poset.len();
    let mut hits = poset.empty_set();
    for q in 0..n {
        if !poset.down(q).is_disjoint(set) {
            hits.insert(q);
        }
    }
    let mut carrier = poset.empty_set();
    for p in 0..n {
        if poset.down(p).is_subset(&hits) {
            carrier.insert(p);
        }
    }
    ROElement { carrier }
}

pub fn is_regular_open(poset: &ForcingPoset, set: &FixedBitSet) -> bool {
    regularize(poset, set).carrier == *set
}

/// Size of the completion, `2^(number of minimal conditions)`.
pub fn element_count(poset: &ForcingPoset) -> BigUint {
    BigUint::from(1u8) << poset.minimal().len()
}

/// The atoms of the completion: regularizations of single minimal conditions.
pub fn atoms(poset: &ForcingPoset) -> Vec<ROElement> {
    poset
        .minimal()
        .into_iter()
        .map(|m| {
            let mut s = poset.empty_set();
            s.insert(m);
            regularize(poset, &s)
        })
        .collect()
}

/// A Boolean-algebra law that failed, with the element indices involved.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomViolation {
    #[error("operation {op} leaves the algebra on {args:?}")]
    NotClosed { op: &'static str, args: Vec<usize> },
    #[error("law {law} fails on {args:?}")]
    Law { law: &'static str, args: Vec<usize> },
}

/// The materialized completion of a finite poset.
#[derive(Clone, Debug)]
pub struct ROAlgebra {
    base: ForcingPoset,
    elements: Vec<ROElement>,
    index: HashMap<FixedBitSet, usize>,
}

impl ROAlgebra {
    /// Materializes every regular open set, refusing when the count
    /// exceeds `cap`.
    pub fn complete(base: &ForcingPoset, cap: u64) -> Result<Self, AlgebraError> {
        let minimal = base.minimal();
        let atoms = minimal.len();
        if atoms >= 64 || (1u64 << atoms) > cap {
            return Err(AlgebraError::CapExceeded { atoms, cap });
        }
        let mut elements: Vec<ROElement> = (0u64..(1u64 << atoms))
            .map(|mask| {
                let mut s = base.empty_set();
                for (i, &m) in minimal.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        s.insert(m);
                    }
                }
                regularize(base, &s)
            })
            .collect();
        elements.sort_by_cached_key(|e| (e.carrier.count_ones(..), e.conditions()));
        elements.dedup();
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.carrier.clone(), i))
            .collect();
        Ok(Self {
            base: base.clone(),
            elements,
            index,
        })
    }

    pub fn base(&self) -> &ForcingPoset {
        &self.base
    }

    pub fn elements(&self) -> &[ROElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, e: &ROElement) -> Option<usize> {
        self.index.get(&e.carrier).copied()
    }

    pub fn top(&self) -> ROElement {
        ROElement {
            carrier: self.base.full_set(),
        }
    }

    pub fn bottom(&self) -> ROElement {
        ROElement {
            carrier: self.base.empty_set(),
        }
    }

    pub fn meet(&self, a: &ROElement, b: &ROElement) -> ROElement {
        let mut carrier = a.carrier.clone();
        carrier.intersect_with(&b.carrier);
        ROElement { carrier }
    }

    pub fn join(&self, a: &ROElement, b: &ROElement) -> ROElement {
        let mut union = a.carrier.clone();
        union.union_with(&b.carrier);
        regularize(&self.base, &union)
    }

    pub fn complement(&self, a: &ROElement) -> ROElement {
        let mut carrier = self.base.empty_set();
        for p in 0..self.base.len() {
            if self.base.down(p).is_disjoint(&a.carrier) {
                carrier.insert(p);
            }
        }
        ROElement { carrier }
    }

    fn closed(
        &self,
        op: &'static str,
        e: &ROElement,
        args: &[usize],
    ) -> Result<usize, AxiomViolation> {
        self.index_of(e).ok_or_else(|| AxiomViolation::NotClosed {
            op,
            args: args.to_vec(),
        })
    }

    /// Checks closure and the Boolean laws on one triple of element indices.
    pub fn check_triple(&self, i: usize, j: usize, k: usize) -> Result<(), AxiomViolation> {
        let (a, b, c) = (&self.elements[i], &self.elements[j], &self.elements[k]);
        let args = [i, j, k];
        let law = |law: &'static str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(AxiomViolation::Law {
                    law,
                    args: args.to_vec(),
                })
            }
        };
        for (op, e) in [
            ("meet", self.meet(a, b)),
            ("join", self.join(a, b)),
            ("complement", self.complement(a)),
        ] {
            self.closed(op, &e, &args)?;
        }
        let (top, bottom) = (self.top(), self.bottom());
        law("meet commutes", self.meet(a, b) == self.meet(b, a))?;
        law("join commutes", self.join(a, b) == self.join(b, a))?;
        law(
            "meet associates",
            self.meet(a, &self.meet(b, c)) == self.meet(&self.meet(a, b), c),
        )?;
        law(
            "join associates",
            self.join(a, &self.join(b, c)) == self.join(&self.join(a, b), c),
        )?;
        law("absorption (meet)", self.meet(a, &self.join(a, b)) == *a)?;
        law("absorption (join)", self.join(a, &self.meet(a, b)) == *a)?;
        law(
            "meet distributes",
            self.meet(a, &self.join(b, c)) == self.join(&self.meet(a, b), &self.meet(a, c)),
        )?;
        law(
            "join distributes",
            self.join(a, &self.meet(b, c)) == self.meet(&self.join(a, b), &self.join(a, c)),
        )?;
        let na = self.complement(a);
        law("complement meet", self.meet(a, &na) == bottom)?;
        law("complement join", self.join(a, &na) == top)?;
        law(
            "identities",
            self.meet(a, &top) == *a && self.join(a, &bottom) == *a,
        )?;
        law(
            "de morgan",
            self.complement(&self.join(a, b)) == self.meet(&na, &self.complement(b))
                && self.complement(&self.meet(a, b)) == self.join(&na, &self.complement(b)),
        )?;
        law(
            "order is inclusion",
            (self.meet(a, b) == *a) == a.is_subset(b),
        )
    }

    /// Runs [`check_triple`](Self::check_triple) on every triple.
    pub fn verify_exhaustive(&self) -> Result<(), AxiomViolation> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    self.check_triple(i, j, k)?;
                }
            }
        }
        Ok(())
    }

    pub fn dump(&self) -> AlgebraDump {
        AlgebraDump {
            conditions: self.base.labels().to_vec(),
            elements: self.elements.iter().map(|e| e.labels(&self.base)).collect(),
        }
    }
}

/// JSON form of a materialized algebra; elements as sorted condition lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDump {
    pub conditions: Vec<String>,
    pub elements: Vec<Vec<String>>,
}

/// Materializes the completion of `poset`.
pub fn completion(poset: &ForcingPoset, cap: u64) -> Result<ROAlgebra, AlgebraError> {
    ROAlgebra::complete(poset, cap)
}

/// `e(p) = (↓p)*` for every condition.
pub fn dense_embedding(poset: &ForcingPoset) -> Vec<ROElement> {
    (0..poset.len())
        .map(|p| regularize(poset, poset.down(p)))
        .collect()
}

/// Which clauses of a dense embedding hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseEmbeddingReport {
    pub injective: bool,
    pub order_reflecting: bool,
    pub dense: bool,
    pub failures: Vec<String>,
}

impl DenseEmbeddingReport {
    pub fn holds(&self) -> bool {
        self.injective && self.order_reflecting && self.dense
    }
}

/// Checks injectivity, `p ≤ q ⇔ e(p) ⊆ e(q)`, and that every nonzero
/// element contains a nonzero image. Density is checked on atoms: each
/// nonzero element of a finite Boolean algebra lies above one.
pub fn verify_dense_embedding(poset: &ForcingPoset) -> DenseEmbeddingReport {
    let images = dense_embedding(poset);
    let mut failures = Vec::new();
    let n = poset.len();
    let mut injective = true;
    let mut order_reflecting = true;
    for p in 0..n {
        for q in 0..n {
            if p < q && images[p] == images[q] {
                injective = false;
                failures.push(format!("e({}) = e({})", poset.label(p), poset.label(q)));
            }
            if poset.leq(p, q) != images[p].is_subset(&images[q]) {
                order_reflecting = false;
                failures.push(format!(
                    "order of {} and {} not reflected",
                    poset.label(p),
                    poset.label(q)
                ));
            }
        }
    }
    let mut dense = true;
    for atom in atoms(poset) {
        if !images.iter().any(|e| !e.is_zero() && e.is_subset(&atom)) {
            dense = false;
            failures.push(format!("atom {:?} contains no image", atom.labels(poset)));
        }
    }
    DenseEmbeddingReport {
        injective,
        order_reflecting,
        dense,
        failures,
    }
}

/// Whether every atom at `depth` refines, one level deeper, to an element
/// holding two disjoint nonzero elements. Works on atoms directly and
/// never materializes either algebra.
pub fn atom_splitting(generator: &TreeGenerator, depth: usize) -> Result<bool, AlgebraError> {
    if !matches!(
        generator,
        TreeGenerator::FullBinary(_) | TreeGenerator::BinaryWithBranch(_)
    ) {
        return Err(AlgebraError::Precondition(format!(
            "atom splitting needs a binary generator, got {generator}"
        )));
    }
    if depth == 0 {
        return Err(AlgebraError::Precondition(
            "depth must be at least 1".into(),
        ));
    }
    let coarse = poset_from_tree(&generator.truncate(depth), true);
    let fine = poset_from_tree(&generator.truncate(depth + 1), true);
    for atom in atoms(&coarse) {
        let mut lifted = fine.empty_set();
        for p in atom.carrier.ones() {
            let q = fine
                .index_of(coarse.label(p))
                .expect("coarse nodes survive refinement");
            lifted.insert(q);
        }
        let image = regularize(&fine, &fine.down_closure(&lifted));
        let mut below: Vec<ROElement> = atoms(&fine)
            .into_iter()
            .filter(|a| a.is_subset(&image))
            .collect();
        if below.len() < 2 {
            return Ok(false);
        }
        let (b, a) = (
            below.pop().expect("two atoms"),
            below.pop().expect("two atoms"),
        );
        let mut meet = a.carrier.clone();
        meet.intersect_with(&b.carrier);
        if a.is_zero() || b.is_zero() || !meet.is_clear() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that `s ↦ [s]` extends to an isomorphism from the completion of
/// the depth-`depth` binary tree onto the clopen sets generated by the
/// cylinders of length `depth`.
pub fn iso_check(depth: usize, cap: u64) -> Result<bool, AlgebraError> {
    let tree = TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned)).truncate(depth);
    let poset = poset_from_tree(&tree, true);
    let algebra = completion(&poset, cap)?;
    let words: Vec<BitString> = tree
        .node_ids()
        .map(|id| BitString::from_bits(tree.path(id).iter().map(|&i| i == 1)))
        .collect();
    let image = |e: &ROElement| CantorClopen::from_cylinders(e.carrier.ones().map(|p| &words[p]));

    let images: Vec<CantorClopen> = algebra.elements().iter().map(image).collect();
    let mut target: Vec<CantorClopen> = resolution_algebra(depth);
    target.sort();
    let mut sorted = images.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != images.len() || sorted != target {
        return Ok(false);
    }
    if image(&algebra.top()) != CantorClopen::full()
        || image(&algebra.bottom()) != CantorClopen::empty()
    {
        return Ok(false);
    }
    let elements = algebra.elements();
    for (i, a) in elements.iter().enumerate() {
        if image(&algebra.complement(a)) != images[i].complement() {
            return Ok(false);
        }
        for (j, b) in elements.iter().enumerate() {
            if image(&algebra.meet(a, b)) != images[i].intersect(&images[j])
                || image(&algebra.join(a, b)) != images[i].union(&images[j])
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All unions of cylinders of length `depth`.
pub fn resolution_algebra(depth: usize) -> Vec<CantorClopen> {
    let words: Vec<BitString> = BitString::all_of_length(depth).collect();
    assert!(
        words.len() < 32,
        "resolution {depth} too large to enumerate"
    );
    (0u64..(1u64 << words.len()))
        .map(|mask| {
            CantorClopen::from_cylinders(
                words
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, w)| w),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ELEMENT_CAP;

    fn binary(d: usize) -> ForcingPoset {
        poset_from_tree(
            &TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned)).truncate(d),
            true,
        )
    }

    fn set(poset: &ForcingPoset, labels: &[&str]) -> FixedBitSet {
        let mut s = poset.empty_set();
        for l in labels {
            s.insert(poset.index_of(l).unwrap());
        }
        s
    }

    #[test]
    fn regularize_examples() {
        let p = binary(1);
        assert_eq!(
            regularize(&p, &set(&p, &["0", "1"])).labels(&p),
            ["ε", "0", "1"]
        );
        assert!(regularize(&p, &p.empty_set()).is_zero());
        assert_eq!(regularize(&p, &p.full_set()).carrier(), &p.full_set());
    }

    #[test]
    fn completion_sizes() {
        assert_eq!(
            completion(&binary(1), DEFAULT_ELEMENT_CAP).unwrap().len(),
            4
        );
        assert_eq!(
            completion(&binary(2), DEFAULT_ELEMENT_CAP).unwrap().len(),
            16
        );
        assert_eq!(
            completion(&ForcingPoset::antichain(1), DEFAULT_ELEMENT_CAP)
                .unwrap()
                .len(),
            2
        );
        let dump = completion(&binary(1), DEFAULT_ELEMENT_CAP).unwrap().dump();
        assert_eq!(
            dump.elements,
            vec![
                vec![],
                vec!["0".to_string()],
                vec!["1".to_string()],
                vec!["ε".into(), "0".into(), "1".into()]
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let err = completion(&binary(5), DEFAULT_ELEMENT_CAP).unwrap_err();
        assert_eq!(
            err,
            AlgebraError::CapExceeded {
                atoms: 32,
                cap: DEFAULT_ELEMENT_CAP
            }
        );
        assert_eq!(element_count(&binary(5)), BigUint::from(1u64 << 32));
        assert!(completion(&binary(2), 15).is_err());
    }

    #[test]
    fn embedding_examples() {
        let p = binary(1);
        let e = dense_embedding(&p);
        assert_eq!(e[1].labels(&p), ["0"]);
        assert_eq!(e[2].labels(&p), ["1"]);
        assert_eq!(e[0].labels(&p), ["ε", "0", "1"]);
        assert!(verify_dense_embedding(&p).holds());

        let chain = ForcingPoset::chain(2);
        let report = verify_dense_embedding(&chain);
        assert!(!report.injective);
        assert!(!report.order_reflecting);
        assert!(report.dense);

        let single = ForcingPoset::antichain(1);
        let e = dense_embedding(&single);
        assert_eq!(e[0].carrier(), &single.full_set());
    }

    #[test]
    fn atom_splitting_examples() {
        let binary_gen = TreeGenerator::FullBinary(SignRule::Uniform(Sign::Unsigned));
        assert!(atom_splitting(&binary_gen, 1).unwrap());
        assert!(atom_splitting(&binary_gen, 3).unwrap());
        assert!(atom_splitting(&TreeGenerator::BinaryWithBranch(Sign::Plus), 2).unwrap());
        assert!(matches!(
            atom_splitting(&TreeGenerator::Linear(Sign::Plus), 2),
            Err(AlgebraError::Precondition(_))
        ));
    }

    #[test]
    fn iso_small_depths() {
        assert!(iso_check(1, DEFAULT_ELEMENT_CAP).unwrap());
        assert!(iso_check(2, DEFAULT_ELEMENT_CAP).unwrap());
        assert!(matches!(
            iso_check(5, DEFAULT_ELEMENT_CAP),
            Err(AlgebraError::CapExceeded { .. })
        ));
    }

    #[test]
    fn axioms_on_small_completions() {
        for d in 0..=2 {
            completion(&binary(d), DEFAULT_ELEMENT_CAP)
                .unwrap()
                .verify_exhaustive()
                .unwrap();
        }
    }
}
