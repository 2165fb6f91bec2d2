//! Cohen forcing with finite binary conditions.
//!
//! A condition is a node of the full binary tree; longer strings are
//! stronger. A generic prefix is built by walking down the tree and, at
//! step `i`, moving to the least extension (shortest, then
//! lexicographically smallest) that lies in the `i`-th dense set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitString, BitStringError};

/// A Cohen condition.
pub type Condition = BitString;

/// Default limit on the number of bits a single step may append.
pub const DEFAULT_EXTENSION_BUDGET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohenError {
    #[error("step {step}: meeting the dense set needs {needed} new bits, budget is {budget}")]
    BudgetExceeded {
        step: usize,
        needed: usize,
        budget: usize,
    },
    #[error("asked for {requested} steps but only {available} dense sets were given")]
    NotEnoughSpecs { requested: usize, available: usize },
    #[error("invalid sequence {text:?}: {reason}")]
    BadSequence { text: String, reason: String },
    #[error("invalid dense set {text:?}: {reason}")]
    BadSpec { text: String, reason: String },
}

impl From<(String, BitStringError)> for CohenError {
    fn from((text, e): (String, BitStringError)) -> Self {
        CohenError::BadSequence {
            text,
            reason: e.to_string(),
        }
    }
}

/// An eventually periodic infinite binary sequence: `prefix` followed by
/// `block` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodicBinarySeq {
    prefix: BitString,
    block: BitString,
}

impl PeriodicBinarySeq {
    /// Builds the sequence in canonical form (primitive block, shortest prefix).
    pub fn new(prefix: BitString, block: BitString) -> Result<Self, CohenError> {
        if block.is_empty() {
            return Err(CohenError::BadSequence {
                text: format!("{prefix}()^"),
                reason: "repeating block is empty".into(),
            });
        }
        Ok(Self { prefix, block }.canonical())
    }

    pub fn constant(bit: bool) -> Self {
        Self {
            prefix: BitString::empty(),
            block: BitString::from_bits([bit]),
        }
    }

    pub fn prefix(&self) -> &BitString {
        &self.prefix
    }

    pub fn block(&self) -> &BitString {
        &self.block
    }

    pub fn at(&self, i: usize) -> bool {
        match self.prefix.get(i) {
            Some(b) => b,
            None => self.block.bits()[(i - self.prefix.len()) % self.block.len()],
        }
    }

    fn canonical(self) -> Self {
        let bits = self.block.bits();
        let n = bits.len();
        let period = (1..=n)
            .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| bits[i] == bits[i % p]))
            .expect("n is a period");
        let mut block: Vec<bool> = bits[..period].to_vec();
        let mut prefix: Vec<bool> = self.prefix.bits().to_vec();
        // Fold the prefix into the cycle while its last bit matches.
        while let Some(&last) = prefix.last() {
            if last != *block.last().expect("block non-empty") {
                break;
            }
            prefix.pop();
            block.rotate_right(1);
        }
        Self {
            prefix: BitString::from_bits(prefix),
            block: BitString::from_bits(block),
        }
    }
}

impl fmt::Display for PeriodicBinarySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() {
            write!(f, "{}^", self.block)
        } else {
            write!(f, "{}({})^", self.prefix, self.block)
        }
    }
}

impl FromStr for PeriodicBinarySeq {
    type Err = CohenError;

    /// `block^` or `prefix(block)^`, e.g. `01^` or `1(0)^`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let bad = |reason: &str| CohenError::BadSequence {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let body = text
            .strip_suffix('^')
            .ok_or_else(|| bad("missing trailing '^'"))?;
        let (prefix, block) = match body.find('(') {
            Some(open) => {
                let inner = body[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad("unclosed '('"))?;
                (&body[..open], inner)
            }
            None => ("", body),
        };
        let parse = |part: &str| part.parse::<BitString>().map_err(|e| (text.to_string(), e));
        PeriodicBinarySeq::new(parse(prefix)?, parse(block)?)
    }
}

impl Serialize for PeriodicBinarySeq {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PeriodicBinarySeq {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A dense set of Cohen conditions from the built-in catalogue.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DenseSetSpec {
    /// Conditions of length at least `n`.
    MinLength { n: usize },
    /// Conditions disagreeing with `x` somewhere.
    DiffersFrom { x: PeriodicBinarySeq },
    /// Conditions containing `w` as a substring.
    ContainsPattern { w: BitString },
}

impl DenseSetSpec {
    pub fn contains(&self, p: &Condition) -> bool {
        match self {
            DenseSetSpec::MinLength { n } => p.len() >= *n,
            DenseSetSpec::DiffersFrom { x } => {
                p.bits().iter().enumerate().any(|(i, &b)| b != x.at(i))
            }
            DenseSetSpec::ContainsPattern { w } => p.contains(w),
        }
    }

    /// How many bits beyond the current length an extension may need.
    pub fn slack(&self) -> usize {
        match self {
            DenseSetSpec::MinLength { n } => *n,
            DenseSetSpec::DiffersFrom { .. } => 1,
            DenseSetSpec::ContainsPattern { w } => w.len(),
        }
    }

    /// The shortest, then lexicographically least, extension of `p` in the set.
    pub fn least_extension(&self, p: &Condition) -> Condition {
        if self.contains(p) {
            return p.clone();
        }
        match self {
            DenseSetSpec::MinLength { n } => {
                let mut out = p.clone();
                while out.len() < *n {
                    out.push(false);
                }
                out
            }
            // p agrees with x so far; the next bit decides.
            DenseSetSpec::DiffersFrom { x } => p.child(!x.at(p.len())),
            // The new occurrence must end at the last bit; appending j bits
            // works iff p ends with the first |w| - j bits of w.
            DenseSetSpec::ContainsPattern { w } => {
                let bits = w.bits();
                let j = (1..=bits.len())
                    .find(|&j| p.ends_with(&bits[..bits.len() - j]))
                    .expect("appending all of w always works");
                p.concat(&BitString::from_bits(
                    bits[bits.len() - j..].iter().copied(),
                ))
            }
        }
    }
}

impl fmt::Display for DenseSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenseSetSpec::MinLength { n } => write!(f, "len:{n}"),
            DenseSetSpec::DiffersFrom { x } => write!(f, "diff:{x}"),
            DenseSetSpec::ContainsPattern { w } => write!(f, "pat:{w}"),
        }
    }
}

impl FromStr for DenseSetSpec {
    type Err = CohenError;

    /// Compact text (`len:3`, `diff:01^`, `pat:101`) or the JSON form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let bad = |reason: String| CohenError::BadSpec {
            text: text.to_string(),
            reason,
        };
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| bad(e.to_string()));
        }
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| bad("expected kind:argument".into()))?;
        match kind {
            "len" => arg
                .parse()
                .map(|n| DenseSetSpec::MinLength { n })
                .map_err(|e| bad(format!("{e}"))),
            "diff" => Ok(DenseSetSpec::DiffersFrom { x: arg.parse()? }),
            "pat" => {
                let w: BitString = arg.parse().map_err(|e| bad(format!("{e}")))?;
                if w.is_empty() {
                    return Err(bad("pattern is empty".into()));
                }
                Ok(DenseSetSpec::ContainsPattern { w })
            }
            other => Err(bad(format!("unknown kind {other:?}"))),
        }
    }
}

/// Checks density up to `depth` by search: every condition of length at
/// most `depth` has an extension of length at most `depth + slack` in
/// the set. Uses only membership, not [`DenseSetSpec::least_extension`].
pub fn verify_dense(spec: &DenseSetSpec, depth: usize) -> bool {
    fn reaches(spec: &DenseSetSpec, p: &mut BitString, max_len: usize) -> bool {
        if spec.contains(p) {
            return true;
        }
        if p.len() >= max_len {
            return false;
        }
        for bit in [false, true] {
            p.push(bit);
            let found = reaches(spec, p, max_len);
            p.pop();
            if found {
                return true;
            }
        }
        false
    }
    let max_len = depth + spec.slack();
    BitString::all_up_to(depth).all(|mut p| reaches(spec, &mut p, max_len))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub spec: usize,
    pub condition: Condition,
}

/// A finite stage of a generic filter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericRun {
    pub prefix: Condition,
    pub trace: Vec<TraceStep>,
}

impl GenericRun {
    /// Trace conditions descend and each meets its dense set.
    pub fn replay(&self, specs: &[DenseSetSpec]) -> bool {
        let mut prev = BitString::empty();
        for step in &self.trace {
            let Some(spec) = specs.get(step.spec) else {
                return false;
            };
            if !prev.is_prefix_of(&step.condition) || !spec.contains(&step.condition) {
                return false;
            }
            prev = step.condition.clone();
        }
        prev == self.prefix
    }
}

/// Meets the first `k` dense sets in order, each time taking the least
/// extension, with at most `budget` new bits per step.
pub fn generic_prefix_with_budget(
    specs: &[DenseSetSpec],
    k: usize,
    budget: usize,
) -> Result<GenericRun, CohenError> {
    if k > specs.len() {
        return Err(CohenError::NotEnoughSpecs {
            requested: k,
            available: specs.len(),
        });
    }
    let mut prefix = BitString::empty();
    let mut trace = Vec::with_capacity(k);
    for (step, spec) in specs.iter().take(k).enumerate() {
        let needed = match spec {
            DenseSetSpec::MinLength { n } => n.saturating_sub(prefix.len()),
            _ => spec.slack(),
        };
        if needed > budget && !spec.contains(&prefix) {
            return Err(CohenError::BudgetExceeded {
                step,
                needed,
                budget,
            });
        }
        prefix = spec.least_extension(&prefix);
        trace.push(TraceStep {
            spec: step,
            condition: prefix.clone(),
        });
    }
    Ok(GenericRun { prefix, trace })
}

/// [`generic_prefix_with_budget`] with [`DEFAULT_EXTENSION_BUDGET`].
pub fn generic_prefix(specs: &[DenseSetSpec], k: usize) -> Result<GenericRun, CohenError> {
    generic_prefix_with_budget(specs, k, DEFAULT_EXTENSION_BUDGET)
}

/// Whether the prefix already disagrees with every listed sequence.
pub fn diagonal_check(prefix: &Condition, xs: &[PeriodicBinarySeq]) -> bool {
    xs.iter()
        .all(|x| prefix.bits().iter().enumerate().any(|(i, &b)| b != x.at(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn spec(s: &str) -> DenseSetSpec {
        s.parse().unwrap()
    }

    #[test]
    fn sequence_syntax() {
        let x: PeriodicBinarySeq = "01^".parse().unwrap();
        assert_eq!(
            (0..5).map(|i| x.at(i)).collect::<Vec<_>>(),
            [false, true, false, true, false]
        );
        let y: PeriodicBinarySeq = "1(0)^".parse().unwrap();
        assert_eq!(
            (0..3).map(|i| y.at(i)).collect::<Vec<_>>(),
            [true, false, false]
        );
        assert_eq!(y.to_string(), "1(0)^");
        assert!("01".parse::<PeriodicBinarySeq>().is_err());
        assert!("1()^".parse::<PeriodicBinarySeq>().is_err());
        assert!("1(02)^".parse::<PeriodicBinarySeq>().is_err());
    }

    #[test]
    fn canonical_sequences() {
        let a: PeriodicBinarySeq = "0101^".parse().unwrap();
        assert_eq!(a.to_string(), "01^");
        let b: PeriodicBinarySeq = "1(01)^".parse().unwrap();
        assert_eq!(b.to_string(), "10^");
        let c: PeriodicBinarySeq = "00(0)^".parse().unwrap();
        assert_eq!(c, PeriodicBinarySeq::constant(false));
    }

    #[test]
    fn spec_syntax() {
        assert_eq!(spec("len:3"), DenseSetSpec::MinLength { n: 3 });
        assert_eq!(
            spec("pat:101"),
            DenseSetSpec::ContainsPattern { w: bs("101") }
        );
        assert_eq!(
            spec("diff:0^"),
            DenseSetSpec::DiffersFrom {
                x: PeriodicBinarySeq::constant(false)
            }
        );
        assert_eq!(
            spec(r#"{"kind":"min_length","n":4}"#),
            DenseSetSpec::MinLength { n: 4 }
        );
        assert_eq!(
            spec(r#"{"kind":"differs_from","x":"01^"}"#).to_string(),
            "diff:01^"
        );
        for bad in ["len", "len:x", "pat:", "pat:12", "foo:1", "diff:01"] {
            assert!(bad.parse::<DenseSetSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn density_examples() {
        assert!(verify_dense(&spec("len:3"), 5));
        assert!(verify_dense(&spec("diff:0^"), 4));
        assert!(verify_dense(&spec("pat:101"), 4));
    }

    #[test]
    fn generic_examples() {
        assert_eq!(
            generic_prefix(&[spec("len:3")], 1).unwrap().prefix,
            bs("000")
        );
        assert_eq!(
            generic_prefix(&[spec("diff:0^")], 1).unwrap().prefix,
            bs("1")
        );
        let run = generic_prefix(&[], 0).unwrap();
        assert!(run.prefix.is_empty() && run.trace.is_empty());
        assert_eq!(
            generic_prefix(&[spec("len:1")], 2),
            Err(CohenError::NotEnoughSpecs {
                requested: 2,
                available: 1
            })
        );
    }

    #[test]
    fn pattern_overlap_is_reused() {
        // "10" already ends with "10", so one more bit completes "101".
        let run = generic_prefix(&[spec("pat:10"), spec("pat:101")], 2).unwrap();
        assert_eq!(run.trace[0].condition, bs("10"));
        assert_eq!(run.prefix, bs("101"));
    }

    #[test]
    fn budget_is_enforced() {
        let err = generic_prefix_with_budget(&[spec("len:10")], 1, 4).unwrap_err();
        assert_eq!(
            err,
            CohenError::BudgetExceeded {
                step: 0,
                needed: 10,
                budget: 4
            }
        );
        assert!(generic_prefix_with_budget(&[spec("len:3"), spec("len:10")], 2, 8).is_ok());
    }

    #[test]
    fn diagonal_examples() {
        let zeros = PeriodicBinarySeq::constant(false);
        assert!(diagonal_check(&bs("1"), std::slice::from_ref(&zeros)));
        assert!(!diagonal_check(&bs("000"), &[zeros]));
        assert!(diagonal_check(&bs("000"), &[]));
    }

    #[test]
    fn run_json() {
        let run = generic_prefix(&[spec("diff:0^")], 1).unwrap();
        assert_eq!(
            serde_json::to_string(&run).unwrap(),
            r#"{"prefix":"1","trace":[{"spec":0,"condition":"1"}]}"#
        );
    }
}
