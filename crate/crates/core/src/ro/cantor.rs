//! Clopen subsets of Cantor space and the ternary coding of branches.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;

/// Binary trie over cylinders, normalized so that a node with two full
/// children is itself full and one with two empty children is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Trie {
    Empty,
    Full,
    Split(Box<Trie>, Box<Trie>),
}

impl Trie {
    fn split(left: Trie, right: Trie) -> Trie {
        match (left, right) {
            (Trie::Full, Trie::Full) => Trie::Full,
            (Trie::Empty, Trie::Empty) => Trie::Empty,
            (l, r) => Trie::Split(Box::new(l), Box::new(r)),
        }
    }

    fn cylinder(bits: &[bool]) -> Trie {
        match bits.split_first() {
            None => Trie::Full,
            Some((&false, rest)) => Trie::split(Trie::cylinder(rest), Trie::Empty),
            Some((&true, rest)) => Trie::split(Trie::Empty, Trie::cylinder(rest)),
        }
    }

    fn union(a: &Trie, b: &Trie) -> Trie {
        match (a, b) {
            (Trie::Full, _) | (_, Trie::Full) => Trie::Full,
            (Trie::Empty, x) | (x, Trie::Empty) => x.clone(),
            (Trie::Split(al, ar), Trie::Split(bl, br)) => {
                Trie::split(Trie::union(al, bl), Trie::union(ar, br))
            }
        }
    }

    fn intersect(a: &Trie, b: &Trie) -> Trie {
        match (a, b) {
            (Trie::Empty, _) | (_, Trie::Empty) => Trie::Empty,
            (Trie::Full, x) | (x, Trie::Full) => x.clone(),
            (Trie::Split(al, ar), Trie::Split(bl, br)) => {
                Trie::split(Trie::intersect(al, bl), Trie::intersect(ar, br))
            }
        }
    }

    fn complement(&self) -> Trie {
        match self {
            Trie::Empty => Trie::Full,
            Trie::Full => Trie::Empty,
            Trie::Split(l, r) => {
                let (l, r) = (l.complement(), r.complement());
                Trie::split(l, r)
            }
        }
    }

    fn collect(&self, prefix: &mut BitString, out: &mut Vec<BitString>) {
        match self {
            Trie::Empty => {}
            Trie::Full => out.push(prefix.clone()),
            Trie::Split(l, r) => {
                prefix.push(false);
                l.collect(prefix, out);
                prefix.pop();
                prefix.push(true);
                r.collect(prefix, out);
                prefix.pop();
            }
        }
    }
}

/// A clopen subset of Cantor space in canonical form: a sorted antichain
/// of cylinders with no complete sibling pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CantorClopen {
    cylinders: Vec<BitString>,
}

impl CantorClopen {
    pub fn empty() -> Self {
        Self {
            cylinders: Vec::new(),
        }
    }

    pub fn full() -> Self {
        Self::cylinder(&BitString::empty())
    }

    /// All branches extending `s`.
    pub fn cylinder(s: &BitString) -> Self {
        Self {
            cylinders: vec![s.clone()],
        }
    }

    /// Canonical form of an arbitrary finite union of cylinders.
    pub fn from_cylinders<'a>(cylinders: impl IntoIterator<Item = &'a BitString>) -> Self {
        let trie = cylinders.into_iter().fold(Trie::Empty, |acc, s| {
            Trie::union(&acc, &Trie::cylinder(s.bits()))
        });
        Self::from_trie(&trie)
    }

    fn from_trie(trie: &Trie) -> Self {
        let mut cylinders = Vec::new();
        trie.collect(&mut BitString::empty(), &mut cylinders);
        Self { cylinders }
    }

    fn trie(&self) -> Trie {
        self.cylinders.iter().fold(Trie::Empty, |acc, s| {
            Trie::union(&acc, &Trie::cylinder(s.bits()))
        })
    }

    pub fn cylinders(&self) -> &[BitString] {
        &self.cylinders
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_trie(&Trie::union(&self.trie(), &other.trie()))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::from_trie(&Trie::intersect(&self.trie(), &other.trie()))
    }

    pub fn complement(&self) -> Self {
        Self::from_trie(&self.trie().complement())
    }

    /// Equality of the denoted sets; canonical forms make this syntactic.
    pub fn equals(&self, other: &Self) -> bool {
        self == other
    }

    /// Whether the branch extending `prefix` by anything lies in the set,
    /// i.e. `[prefix]` is contained in it.
    pub fn contains_cylinder(&self, prefix: &BitString) -> bool {
        self.cylinders.iter().any(|c| c.is_prefix_of(prefix))
    }

    /// Longest cylinder length; the set is a union of cylinders of this length.
    pub fn resolution(&self) -> usize {
        self.cylinders.iter().map(BitString::len).max().unwrap_or(0)
    }
}

impl fmt::Display for CantorClopen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.cylinders.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if c.is_empty() {
                f.write_str("[ε]")?;
            } else {
                write!(f, "[{c}]")?;
            }
        }
        f.write_str("}")
    }
}

/// A closed subinterval of `[0, 1]` with endpoints in base 3.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CantorInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl CantorInterval {
    /// Interval of reals whose ternary expansion starts with the prefix,
    /// each binary digit `b` written as the ternary digit `2b`.
    pub fn from_prefix(prefix: &BitString) -> Self {
        let three = BigInt::from(3);
        let mut numerator = BigInt::zero();
        let mut denominator = BigInt::one();
        for &b in prefix.bits() {
            numerator = numerator * &three + if b { 2 } else { 0 };
            denominator *= &three;
        }
        let lo = BigRational::new(numerator.clone(), denominator.clone());
        let hi = BigRational::new(numerator + 1, denominator);
        Self { lo, hi }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Whether the open interiors do not meet.
    pub fn interiors_disjoint(&self, other: &Self) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}

impl fmt::Display for CantorInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for CantorInterval {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            lo: [String; 2],
            hi: [String; 2],
        }
        let pair = |r: &BigRational| [r.numer().to_string(), r.denom().to_string()];
        Repr {
            lo: pair(&self.lo),
            hi: pair(&self.hi),
        }
        .serialize(serializer)
    }
}

/// Ternary interval coding of a finite branch of the binary tree.
pub fn branch_to_interval(prefix: &BitString) -> CantorInterval {
    CantorInterval::from_prefix(prefix)
}
