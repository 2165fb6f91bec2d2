//! A decidable fragment of `P(ω)/Fin` and the almost permutations acting
//! on it.
//!
//! Sets are eventually periodic: above a start `N` membership depends only
//! on `n mod P`, below `N` it is listed. Almost permutations are eventually
//! periodic displacements: above `N`, `f(n) = n + d[n mod P]`, below `N`
//! a finite injective table. Both are kept in canonical form (least period,
//! then least start), so structural equality is equality of the denoted
//! objects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PfinError {
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("residue {residue} is not below the period {period}")]
    ResidueOutOfRange { residue: u64, period: u64 },
    #[error("expected {period} displacements, got {found}")]
    DisplacementCount { period: u64, found: usize },
    #[error("exception at {0} is not below the tail start")]
    ExceptionAboveStart(u64),
    #[error("{n} is sent below zero")]
    NegativeImage { n: u64 },
    #[error("not injective: {a} and {b} both map to {image}")]
    NotInjective { a: u64, b: u64, image: u64 },
    #[error("cannot parse {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

fn residue_of(n: u64, period: u64) -> u64 {
    n % period
}

/// Smallest `n >= start` with `n ≡ r (mod period)`.
fn first_at_or_after(start: u64, r: u64, period: u64) -> u64 {
    start + (r + period - start % period) % period
}

/// An eventually periodic subset of ℕ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModFinSetRepr", into = "ModFinSetRepr")]
pub struct ModFinSet {
    start: u64,
    period: u64,
    residues: BTreeSet<u64>,
    head: BTreeSet<u64>,
}

#[derive(Serialize, Deserialize)]
struct ModFinSetRepr {
    start: u64,
    period: u64,
    residues: Vec<u64>,
    exceptions: Vec<u64>,
}

impl TryFrom<ModFinSetRepr> for ModFinSet {
    type Error = PfinError;

    fn try_from(r: ModFinSetRepr) -> Result<Self, PfinError> {
        ModFinSet::new(r.start, r.period, r.residues, r.exceptions)
    }
}

impl From<ModFinSet> for ModFinSetRepr {
    fn from(s: ModFinSet) -> Self {
        ModFinSetRepr {
            start: s.start,
            period: s.period,
            residues: s.residues.into_iter().collect(),
            exceptions: s.head.into_iter().collect(),
        }
    }
}

impl ModFinSet {
    /// `{n >= start : n mod period ∈ residues} ∪ head`, where every
    /// element of `head` lies below `start`.
    pub fn new(
        start: u64,
        period: u64,
        residues: impl IntoIterator<Item = u64>,
        head: impl IntoIterator<Item = u64>,
    ) -> Result<Self, PfinError> {
        if period == 0 {
            return Err(PfinError::ZeroPeriod);
        }
        let residues: BTreeSet<u64> = residues.into_iter().collect();
        if let Some(&residue) = residues.iter().find(|&&r| r >= period) {
            return Err(PfinError::ResidueOutOfRange { residue, period });
        }
        let head: BTreeSet<u64> = head.into_iter().collect();
        if let Some(&n) = head.iter().find(|&&n| n >= start) {
            return Err(PfinError::ExceptionAboveStart(n));
        }
        Ok(Self {
            start,
            period,
            residues,
            head,
        }
        .canonical())
    }

    pub fn empty() -> Self {
        Self::new(0, 1, [], []).expect("valid")
    }

    pub fn naturals() -> Self {
        Self::new(0, 1, [0], []).expect("valid")
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let head: BTreeSet<u64> = members.into_iter().collect();
        let start = head.iter().next_back().map_or(0, |m| m + 1);
        Self::new(start, 1, [], head).expect("valid")
    }

    /// `ℕ` minus a finite set.
    pub fn cofinite(missing: impl IntoIterator<Item = u64>) -> Self {
        Self::finite(missing).complement()
    }

    pub fn residue_class(period: u64, residue: u64) -> Result<Self, PfinError> {
        Self::new(0, period, [residue], [])
    }

    pub fn evens() -> Self {
        Self::new(0, 2, [0], []).expect("valid")
    }

    pub fn odds() -> Self {
        Self::new(0, 2, [1], []).expect("valid")
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.residues.iter().copied()
    }

    /// Members below the start.
    pub fn head(&self) -> impl Iterator<Item = u64> + '_ {
        self.head.iter().copied()
    }

    fn tail_contains(&self, n: u64) -> bool {
        self.residues.contains(&residue_of(n, self.period))
    }

    pub fn contains(&self, n: u64) -> bool {
        if n < self.start {
            self.head.contains(&n)
        } else {
            self.tail_contains(n)
        }
    }

    fn canonical(mut self) -> Self {
        let p = self.period;
        let smallest = (1..=p)
            .find(|&q| {
                p.is_multiple_of(q)
                    && (0..p)
                        .all(|r| self.residues.contains(&r) == self.residues.contains(&(r % q)))
            })
            .expect("p is a period");
        self.residues = self
            .residues
            .iter()
            .copied()
            .filter(|&r| r < smallest)
            .collect();
        self.period = smallest;
        while self.start > 0 {
            let n = self.start - 1;
            if self.head.contains(&n) != self.tail_contains(n) {
                break;
            }
            self.head.remove(&n);
            self.start = n;
        }
        self
    }

    /// Pointwise combination of two sets.
    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let period = self.period.lcm(&other.period);
        let start = self.start.max(other.start);
        let residues = (0..period).filter(|&r| {
            let n = first_at_or_after(start, r, period);
            op(self.contains(n), other.contains(n))
        });
        let head: Vec<u64> = (0..start)
            .filter(|&n| op(self.contains(n), other.contains(n)))
            .collect();
        Self::new(start, period, residues.collect::<Vec<_>>(), head).expect("combination is valid")
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a != b)
    }

    pub fn complement(&self) -> Self {
        self.combine(&Self::empty(), |a, _| !a)
    }

    /// Whether the set is finite (its tail is empty).
    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    /// Members below `bound`, for display and testing.
    pub fn members_below(&self, bound: u64) -> Vec<u64> {
        (0..bound).filter(|&n| self.contains(n)).collect()
    }
}

impl fmt::Display for ModFinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tail(N={}, P={}, R={{{}}})",
            self.start,
            self.period,
            join(self.residues.iter())
        )?;
        if !self.head.is_empty() {
            write!(f, " + {{{}}}", join(self.head.iter()))?;
        }
        Ok(())
    }
}

impl FromStr for ModFinSet {
    type Err = PfinError;

    /// `tail(N=.., P=.., R={..})`, optionally followed by `+ {..}` listing
    /// the members below `N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let call = parse_call(text, "tail")?;
        let start = call.number("N")?;
        let period = call.number("P")?;
        let residues = call.list("R", '{', '}')?;
        let head = match call.rest {
            Some(rest) => parse_braced(text, rest)?
                .into_iter()
                .map(|item| parse_num(text, item))
                .collect::<Result<Vec<u64>, _>>()?,
            None => Vec::new(),
        };
        ModFinSet::new(start, period, residues, head)
    }
}

/// `A =* B`: the symmetric difference is finite. Decided by comparing the
/// tails over one common period.
pub fn eq_mod_fin(a: &ModFinSet, b: &ModFinSet) -> bool {
    let period = a.period.lcm(&b.period);
    let start = a.start.max(b.start);
    (start..start + period).all(|n| a.contains(n) == b.contains(n))
}

/// Membership in the Fréchet filter: the set is cofinite.
pub fn frechet_contains(a: &ModFinSet) -> bool {
    a.period == 1 && a.residues.contains(&0)
}

/// An injection between cofinite subsets of ℕ with eventually periodic
/// displacement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PermRepr", into = "PermRepr")]
pub struct AlmostPermutation {
    start: u64,
    period: u64,
    displacements: Vec<i64>,
    exceptions: BTreeMap<u64, u64>,
}

#[derive(Serialize, Deserialize)]
struct PermRepr {
    start: u64,
    period: u64,
    displacements: Vec<i64>,
    exceptions: Vec<[u64; 2]>,
}

impl TryFrom<PermRepr> for AlmostPermutation {
    type Error = PfinError;

    fn try_from(r: PermRepr) -> Result<Self, PfinError> {
        AlmostPermutation::new(
            r.start,
            r.period,
            r.displacements,
            r.exceptions.into_iter().map(|[a, b]| (a, b)),
        )
    }
}

impl From<AlmostPermutation> for PermRepr {
    fn from(p: AlmostPermutation) -> Self {
        PermRepr {
            start: p.start,
            period: p.period,
            displacements: p.displacements,
            exceptions: p.exceptions.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl AlmostPermutation {
    /// `n ↦ n + displacements[n mod period]` for `n >= start`; below
    /// `start` the domain and values come from `exceptions`.
    pub fn new(
        start: u64,
        period: u64,
        displacements: Vec<i64>,
        exceptions: impl IntoIterator<Item = (u64, u64)>,
    ) -> Result<Self, PfinError> {
        if period == 0 {
            return Err(PfinError::ZeroPeriod);
        }
        if displacements.len() as u64 != period {
            return Err(PfinError::DisplacementCount {
                period,
                found: displacements.len(),
            });
        }
        let exceptions: BTreeMap<u64, u64> = exceptions.into_iter().collect();
        let f = Self {
            start,
            period,
            displacements,
            exceptions,
        };
        f.validate()?;
        Ok(f.canonical())
    }

    pub fn identity() -> Self {
        Self::new(0, 1, vec![0], []).expect("valid")
    }

    /// `n ↦ n + k` on all of ℕ.
    pub fn shift(k: u64) -> Self {
        Self::new(0, 1, vec![k as i64], []).expect("valid")
    }

    /// `2k ↔ 2k + 1`.
    pub fn pairswap() -> Self {
        Self::new(0, 2, vec![1, -1], []).expect("valid")
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn displacements(&self) -> &[i64] {
        &self.displacements
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, u64> {
        &self.exceptions
    }

    fn displacement(&self, n: u64) -> i64 {
        self.displacements[residue_of(n, self.period) as usize]
    }

    fn tail_value(&self, n: u64) -> Option<u64> {
        u64::try_from(n as i128 + self.displacement(n) as i128).ok()
    }

    pub fn apply(&self, n: u64) -> Option<u64> {
        if n < self.start {
            self.exceptions.get(&n).copied()
        } else {
            self.tail_value(n)
        }
    }

    pub fn in_domain(&self, n: u64) -> bool {
        n >= self.start || self.exceptions.contains_key(&n)
    }

    fn max_displacement(&self) -> i64 {
        *self.displacements.iter().max().expect("period >= 1")
    }

    fn min_displacement(&self) -> i64 {
        *self.displacements.iter().min().expect("period >= 1")
    }

    /// The tail point mapping to `value`, if any.
    fn tail_preimage(&self, value: u64) -> Option<u64> {
        (0..self.period).find_map(|r| {
            let n = value as i128 - self.displacements[r as usize] as i128;
            (n >= self.start as i128 && residue_of(n as u64, self.period) == r).then_some(n as u64)
        })
    }

    fn validate(&self) -> Result<(), PfinError> {
        let p = self.period;
        if let Some(&n) = self.exceptions.keys().find(|&&n| n >= self.start) {
            return Err(PfinError::ExceptionAboveStart(n));
        }
        for r in 0..p {
            let n = first_at_or_after(self.start, r, p);
            if self.tail_value(n).is_none() {
                return Err(PfinError::NegativeImage { n });
            }
        }
        // The tail is injective iff r ↦ r + d[r] permutes the residues.
        let mut owner: Vec<Option<u64>> = vec![None; p as usize];
        for r in 0..p {
            let d = self.displacements[r as usize];
            let target = (r as i128 + d as i128).rem_euclid(p as i128) as usize;
            if let Some(s) = owner[target] {
                // n ≡ s and m ≡ r collide when m = n + d[s] - d[r].
                let ds = self.displacements[s as usize] as i128;
                let shift = ds - d as i128;
                let base = first_at_or_after(self.start + shift.unsigned_abs() as u64, s, p);
                let m = (base as i128 + shift) as u64;
                let image = self.tail_value(base).expect("checked non-negative");
                return Err(PfinError::NotInjective {
                    a: base.min(m),
                    b: base.max(m),
                    image,
                });
            }
            owner[target] = Some(r);
        }
        let mut seen: BTreeMap<u64, u64> = BTreeMap::new();
        for (&n, &v) in &self.exceptions {
            if let Some(&a) = seen.get(&v) {
                return Err(PfinError::NotInjective { a, b: n, image: v });
            }
            if let Some(m) = self.tail_preimage(v) {
                return Err(PfinError::NotInjective {
                    a: n,
                    b: m,
                    image: v,
                });
            }
            seen.insert(v, n);
        }
        Ok(())
    }

    fn canonical(mut self) -> Self {
        let p = self.period;
        let smallest = (1..=p)
            .find(|&q| {
                p.is_multiple_of(q)
                    && (0..p as usize)
                        .all(|r| self.displacements[r] == self.displacements[r % q as usize])
            })
            .expect("p is a period");
        self.displacements.truncate(smallest as usize);
        self.period = smallest;
        while self.start > 0 {
            let n = self.start - 1;
            match (self.exceptions.get(&n), self.tail_value(n)) {
                (Some(&v), Some(t)) if v == t => {
                    self.exceptions.remove(&n);
                    self.start = n;
                }
                _ => break,
            }
        }
        self
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &AlmostPermutation) -> AlmostPermutation {
        let (f, g) = (self, other);
        let period = f.period.lcm(&g.period);
        let start = (g.start as i128)
            .max(f.start as i128 - g.min_displacement() as i128)
            .max(0) as u64;
        let displacements: Vec<i64> = (0..period)
            .map(|c| {
                let dg = g.displacements[(c % g.period) as usize];
                let landing = (c as i128 + dg as i128).rem_euclid(f.period as i128) as usize;
                dg + f.displacements[landing]
            })
            .collect();
        let exceptions: Vec<(u64, u64)> = (0..start)
            .filter_map(|n| g.apply(n).and_then(|m| f.apply(m)).map(|v| (n, v)))
            .collect();
        AlmostPermutation::new(start, period, displacements, exceptions)
            .expect("composition stays in the fragment")
    }

    pub fn invert(&self) -> AlmostPermutation {
        let p = self.period;
        let start = (self.start as i128 + self.max_displacement().max(0) as i128) as u64;
        let mut displacements = vec![0i64; p as usize];
        for r in 0..p {
            let d = self.displacements[r as usize];
            let s = (r as i128 + d as i128).rem_euclid(p as i128) as usize;
            displacements[s] = -d;
        }
        let scan_to = (start as i128 - self.min_displacement() as i128).max(0) as u64;
        let exceptions: Vec<(u64, u64)> = (0..scan_to)
            .filter_map(|n| self.apply(n).map(|v| (v, n)))
            .filter(|&(v, _)| v < start)
            .collect();
        AlmostPermutation::new(start, p, displacements, exceptions)
            .expect("inverse stays in the fragment")
    }

    /// Whether both maps agree on all but finitely many points.
    pub fn eq_mod_fin(&self, other: &AlmostPermutation) -> bool {
        let period = self.period.lcm(&other.period);
        let start = self.start.max(other.start);
        (start..start + period).all(|n| self.apply(n) == other.apply(n))
    }

    /// The exact image `f(A ∩ D_f)`.
    pub fn image_of(&self, a: &ModFinSet) -> ModFinSet {
        let period = a.period.lcm(&self.period);
        let from = a.start.max(self.start);
        let start = from + self.max_displacement().max(0) as u64;
        let residues: Vec<u64> = (0..period)
            .filter(|&c| a.contains(first_at_or_after(from, c, period)))
            .map(|c| (c as i128 + self.displacement(c) as i128).rem_euclid(period as i128) as u64)
            .collect();
        let scan_to = (start as i128 - self.min_displacement() as i128).max(0) as u64;
        let head: BTreeSet<u64> = (0..scan_to)
            .filter(|&n| a.contains(n))
            .filter_map(|n| self.apply(n))
            .filter(|&v| v < start)
            .collect();
        ModFinSet::new(start, period, residues, head).expect("image stays in the fragment")
    }

    /// Looks for `i < j` with `f(i) > f(j)` in the window `[N, N + 2P)`.
    /// A reversal anywhere in the tail has a translate in that window, and
    /// any reversal recurs in every later window.
    pub fn classify_cyclic(&self) -> CyclicityVerdict {
        let window: Vec<(u64, u64)> = (self.start..self.start + 2 * self.period)
            .map(|n| (n, self.tail_value(n).expect("valid tail")))
            .collect();
        for (x, &(i, fi)) in window.iter().enumerate() {
            if let Some(&(j, _)) = window[x + 1..].iter().find(|&&(_, fj)| fi > fj) {
                return CyclicityVerdict {
                    cyclic: true,
                    witness: Some((i, j)),
                };
            }
        }
        CyclicityVerdict {
            cyclic: false,
            witness: None,
        }
    }
}

/// `[A] ↦ [f(A ∩ D_f)]`.
pub fn induced_auto(f: &AlmostPermutation, a: &ModFinSet) -> ModFinSet {
    f.image_of(a)
}

pub fn compose(f: &AlmostPermutation, g: &AlmostPermutation) -> AlmostPermutation {
    f.compose(g)
}

pub fn invert(f: &AlmostPermutation) -> AlmostPermutation {
    f.invert()
}

pub fn classify_cyclic(f: &AlmostPermutation) -> CyclicityVerdict {
    f.classify_cyclic()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicityVerdict {
    pub cyclic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(u64, u64)>,
}

impl fmt::Display for AlmostPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "disp(N={}, P={}, d=[{}])",
            self.start,
            self.period,
            join(self.displacements.iter())
        )?;
        if !self.exceptions.is_empty() {
            let pairs: Vec<String> = self
                .exceptions
                .iter()
                .map(|(a, b)| format!("{a}->{b}"))
                .collect();
            write!(f, " + {{{}}}", pairs.join(", "))?;
        }
        Ok(())
    }
}

impl FromStr for AlmostPermutation {
    type Err = PfinError;

    /// `disp(N=.., P=.., d=[..])`, optionally followed by `+ {a->b, ..}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let call = parse_call(text, "disp")?;
        let start = call.number("N")?;
        let period = call.number("P")?;
        let displacements: Vec<i64> = call
            .raw_list("d", '[', ']')?
            .into_iter()
            .map(|item| {
                item.parse::<i64>().map_err(|e| PfinError::Parse {
                    text: text.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        let exceptions = match call.rest {
            Some(rest) => parse_braced(text, rest)?
                .into_iter()
                .map(|item| {
                    let (a, b) = item.split_once("->").ok_or_else(|| PfinError::Parse {
                        text: text.to_string(),
                        reason: format!("expected a->b, found {item:?}"),
                    })?;
                    Ok((parse_num(text, a)?, parse_num(text, b)?))
                })
                .collect::<Result<Vec<_>, PfinError>>()?,
            None => Vec::new(),
        };
        AlmostPermutation::new(start, period, displacements, exceptions)
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Call<'a> {
    text: &'a str,
    args: BTreeMap<&'a str, &'a str>,
    rest: Option<&'a str>,
}

impl<'a> Call<'a> {
    fn arg(&self, key: &str) -> Result<&'a str, PfinError> {
        self.args.get(key).copied().ok_or_else(|| PfinError::Parse {
            text: self.text.to_string(),
            reason: format!("missing {key}="),
        })
    }

    fn number(&self, key: &str) -> Result<u64, PfinError> {
        parse_num(self.text, self.arg(key)?)
    }

    fn raw_list(&self, key: &str, open: char, close: char) -> Result<Vec<&'a str>, PfinError> {
        let raw = self.arg(key)?;
        let inner = raw
            .strip_prefix(open)
            .and_then(|r| r.strip_suffix(close))
            .ok_or_else(|| PfinError::Parse {
                text: self.text.to_string(),
                reason: format!("{key} must be written {open}..{close}"),
            })?;
        Ok(inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect())
    }

    fn list(&self, key: &str, open: char, close: char) -> Result<Vec<u64>, PfinError> {
        self.raw_list(key, open, close)?
            .into_iter()
            .map(|s| parse_num(self.text, s))
            .collect()
    }
}

fn parse_num(text: &str, s: &str) -> Result<u64, PfinError> {
    s.trim().parse().map_err(|e| PfinError::Parse {
        text: text.to_string(),
        reason: format!("{s:?}: {e}"),
    })
}

/// Parses `name(k=v, ...)` and returns the arguments plus whatever
/// follows a `+` after the closing parenthesis.
fn parse_call<'a>(text: &'a str, name: &str) -> Result<Call<'a>, PfinError> {
    let err = |reason: String| PfinError::Parse {
        text: text.to_string(),
        reason,
    };
    let body = text
        .strip_prefix(name)
        .and_then(|r| r.trim_start().strip_prefix('('))
        .ok_or_else(|| err(format!("expected {name}(...)")))?;
    let mut depth = 0i32;
    let mut close = None;
    for (i, c) in body.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ')' if depth == 0 => {
                close = Some(i);
                break;
            }
            ')' => depth -= 1,
            _ => {}
        }
    }
    let close = close.ok_or_else(|| err("unclosed '('".into()))?;
    let inner = &body[..close];
    let mut args = BTreeMap::new();
    let (mut depth, mut from) = (0i32, 0usize);
    let mut parts = Vec::new();
    for (i, c) in inner.char_indices() {
        match c {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&inner[from..i]);
                from = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&inner[from..]);
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, found {part:?}")))?;
        if args.insert(k.trim(), v.trim()).is_some() {
            return Err(err(format!("repeated key {}", k.trim())));
        }
    }
    let after = body[close + 1..].trim();
    let rest = if after.is_empty() {
        None
    } else {
        Some(
            after
                .strip_prefix('+')
                .ok_or_else(|| err(format!("unexpected trailing {after:?}")))?
                .trim(),
        )
    };
    Ok(Call { text, args, rest })
}

fn parse_braced<'a>(text: &str, s: &'a str) -> Result<Vec<&'a str>, PfinError> {
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| PfinError::Parse {
            text: text.to_string(),
            reason: "exceptions must be written {..}".into(),
        })?;
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> ModFinSet {
        s.parse().unwrap()
    }

    fn perm(s: &str) -> AlmostPermutation {
        s.parse().unwrap()
    }

    #[test]
    fn set_canonical_forms() {
        let evens_plus = ModFinSet::evens().union(&ModFinSet::finite([1, 3, 5]));
        assert_eq!(
            evens_plus.to_string(),
            "tail(N=6, P=2, R={0}) + {0,1,2,3,4,5}"
        );
        assert_eq!(set("tail(N=4, P=4, R={0,2}) + {0,2}"), ModFinSet::evens());
        assert_eq!(
            ModFinSet::cofinite([0]).to_string(),
            "tail(N=1, P=1, R={0})"
        );
        assert_eq!(ModFinSet::empty().to_string(), "tail(N=0, P=1, R={})");
        assert!(ModFinSet::new(0, 0, [], []).is_err());
        assert!(ModFinSet::new(0, 2, [2], []).is_err());
        assert!(ModFinSet::new(1, 1, [], [3]).is_err());
    }

    #[test]
    fn eq_mod_fin_examples() {
        let evens = ModFinSet::evens();
        assert!(eq_mod_fin(
            &evens,
            &evens.union(&ModFinSet::finite([1, 3, 5]))
        ));
        assert!(!eq_mod_fin(&evens, &ModFinSet::odds()));
        assert!(eq_mod_fin(&evens, &evens));
        assert!(eq_mod_fin(&ModFinSet::finite([7, 9]), &ModFinSet::empty()));
    }

    #[test]
    fn frechet_examples() {
        assert!(frechet_contains(&ModFinSet::cofinite([0])));
        assert!(!frechet_contains(&ModFinSet::evens()));
        assert!(!frechet_contains(&ModFinSet::empty()));
    }

    #[test]
    fn induced_examples() {
        let shift = AlmostPermutation::shift(1);
        assert!(eq_mod_fin(
            &induced_auto(&shift, &ModFinSet::evens()),
            &ModFinSet::odds()
        ));
        assert!(frechet_contains(&induced_auto(
            &shift,
            &ModFinSet::cofinite([2, 3])
        )));
        let swap = AlmostPermutation::pairswap();
        assert_eq!(induced_auto(&swap, &ModFinSet::evens()), ModFinSet::odds());
        // Exact image: shift sends ℕ onto ℕ \ {0}.
        assert_eq!(
            induced_auto(&shift, &ModFinSet::naturals()),
            ModFinSet::cofinite([0])
        );
    }

    #[test]
    fn group_examples() {
        let shift = AlmostPermutation::shift(1);
        let back = shift.invert();
        assert_eq!(back.to_string(), "disp(N=1, P=1, d=[-1])");
        assert!(shift
            .compose(&back)
            .eq_mod_fin(&AlmostPermutation::identity()));
        assert_eq!(
            shift.compose(&back),
            AlmostPermutation::new(1, 1, vec![0], []).unwrap()
        );
        assert_eq!(shift.compose(&shift), AlmostPermutation::shift(2));
        assert_eq!(
            AlmostPermutation::pairswap().invert(),
            AlmostPermutation::pairswap()
        );
    }

    #[test]
    fn cyclicity_examples() {
        assert_eq!(
            AlmostPermutation::shift(1).classify_cyclic(),
            CyclicityVerdict {
                cyclic: false,
                witness: None
            }
        );
        assert_eq!(
            AlmostPermutation::pairswap().classify_cyclic(),
            CyclicityVerdict {
                cyclic: true,
                witness: Some((0, 1))
            }
        );
        assert!(!AlmostPermutation::identity().classify_cyclic().cyclic);
        // Exceptions below the tail are ignored.
        let f = perm("disp(N=2, P=1, d=[0]) + {0->1, 1->0}");
        assert!(!f.classify_cyclic().cyclic);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            AlmostPermutation::new(0, 2, vec![0, 1], []),
            Err(PfinError::NotInjective { .. })
        ));
        assert_eq!(
            AlmostPermutation::new(0, 1, vec![-1], []),
            Err(PfinError::NegativeImage { n: 0 })
        );
        assert_eq!(
            AlmostPermutation::new(2, 1, vec![1], [(0, 3)]),
            Err(PfinError::NotInjective {
                a: 0,
                b: 2,
                image: 3
            })
        );
        assert_eq!(
            AlmostPermutation::new(2, 1, vec![5], [(0, 1), (1, 1)]),
            Err(PfinError::NotInjective {
                a: 0,
                b: 1,
                image: 1
            })
        );
        assert!(matches!(
            AlmostPermutation::new(0, 2, vec![0], []),
            Err(PfinError::DisplacementCount { .. })
        ));
        assert_eq!(
            AlmostPermutation::new(1, 1, vec![0], [(3, 3)]),
            Err(PfinError::ExceptionAboveStart(3))
        );
    }

    #[test]
    fn reported_collisions_are_real() {
        let f = AlmostPermutation {
            start: 3,
            period: 3,
            displacements: vec![4, 0, 2],
            exceptions: BTreeMap::new(),
        };
        let Err(PfinError::NotInjective { a, b, image }) = f.validate() else {
            panic!("expected a collision");
        };
        assert_ne!(a, b);
        assert_eq!(f.apply(a), Some(image));
        assert_eq!(f.apply(b), Some(image));
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "disp(N=0, P=1, d=[1])",
            "disp(N=0, P=2, d=[1,-1])",
            "disp(N=3, P=1, d=[0]) + {0->2, 2->0}",
        ] {
            assert_eq!(perm(s).to_string(), s);
        }
        assert_eq!(perm("disp(N=0,P=1,d=[1])"), AlmostPermutation::shift(1));
        assert!("disp(N=0, P=1)".parse::<AlmostPermutation>().is_err());
        assert!("disp(N=0, P=1, d=[1]) {1->2}"
            .parse::<AlmostPermutation>()
            .is_err());
        assert!("tail(N=0, P=1, R=0)".parse::<ModFinSet>().is_err());
    }

    #[test]
    fn json_mirror() {
        let f = perm("disp(N=3, P=1, d=[0]) + {0->2, 2->0}");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"start":3,"period":1,"displacements":[0],"exceptions":[[0,2],[2,0]]}"#
        );
        assert_eq!(serde_json::from_str::<AlmostPermutation>(&json).unwrap(), f);
        let bad = r#"{"start":0,"period":2,"displacements":[0,1],"exceptions":[]}"#;
        assert!(serde_json::from_str::<AlmostPermutation>(bad).is_err());
        let a = ModFinSet::evens().union(&ModFinSet::finite([3]));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(
            json,
            r#"{"start":4,"period":2,"residues":[0],"exceptions":[0,2,3]}"#
        );
        assert_eq!(serde_json::from_str::<ModFinSet>(&json).unwrap(), a);
    }
}
