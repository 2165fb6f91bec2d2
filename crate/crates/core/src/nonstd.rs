//! Nonstandard naturals as sequences modulo eventual equality.
//!
//! A [`NonstandardNat`] is a sequence of naturals that agrees with a
//! polynomial from some index on. Two sequences are identified when they
//! agree on a cofinite set, so only the tail polynomial matters for
//! equality and order; the finite head is kept so the representative can
//! still be printed and evaluated.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NonstdError {
    #[error("polynomial {0} is not integer-valued")]
    NotIntegerValued(String),
    #[error("polynomial {0} is eventually negative")]
    EventuallyNegative(String),
    #[error("value at {n} is negative")]
    NegativeValue { n: u64 },
    #[error("exception at {0} is not below the tail start")]
    ExceptionAboveStart(u64),
    #[error("cannot parse {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// A polynomial in one variable `n` with rational coefficients, lowest
/// degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Poly {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The identity sequence `n`.
    pub fn n() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = BigRational::one();
        Self { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, n: &BigInt) -> BigRational {
        let x = BigRational::from_integer(n.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &x + c)
    }

    pub fn eval_u64(&self, n: u64) -> BigRational {
        self.eval(&BigInt::from(n))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Values at `0..=deg` when all are integers. A polynomial of degree `d`
    /// that is integral at `d + 1` consecutive integers is integral at every
    /// integer, so these values certify integer-valuedness.
    pub fn integrality_certificate(&self) -> Option<Vec<BigInt>> {
        let samples = self.degree().map_or(1, |d| d + 1) as u64;
        (0..samples)
            .map(|n| {
                let v = self.eval_u64(n);
                v.is_integer().then(|| v.to_integer())
            })
            .collect()
    }

    pub fn is_integer_valued(&self) -> bool {
        self.integrality_certificate().is_some()
    }

    /// Sign of `self(n)` for all sufficiently large `n`.
    pub fn eventual_sign(&self) -> Ordering {
        match self.leading() {
            None => Ordering::Equal,
            Some(c) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// An `n0` beyond which the sign never changes (Fujiwara's root bound,
    /// `2·max |a_k/a_d|^(1/(d-k))`).
    fn sign_stable_from(&self) -> u64 {
        let Some(lead) = self.leading() else { return 0 };
        let d = self.coeffs.len() - 1;
        let bound = self.coeffs[..d]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| integer_root_ceil(&(c / lead).abs(), (d - k) as u32))
            .max()
            .unwrap_or(0);
        2 * bound + 1
    }

    /// `Σ_{i=1}^{n} self(i)` as a polynomial in `n`, via Faulhaber's
    /// formula.
    pub fn partial_sums(&self) -> Poly {
        let bernoulli = bernoulli_plus(self.coeffs.len());
        let mut out = Poly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // Σ_{i=1}^{n} i^k = 1/(k+1) Σ_j C(k+1, j) B⁺_j n^{k+1-j}
            let mut power_sum = vec![BigRational::zero(); k + 2];
            for (j, b) in bernoulli.iter().enumerate().take(k + 1) {
                power_sum[k + 1 - j] =
                    BigRational::from_integer(binomial(k + 1, j)) * b / rat(k as i64 + 1);
            }
            out = out + Poly::new(power_sum).scale(c);
        }
        out
    }
}

/// Least `b` with `b^e >= r`.
fn integer_root_ceil(r: &BigRational, e: u32) -> u64 {
    let estimate = r.to_f64().map_or(0.0, |x| x.powf(1.0 / e as f64).ceil()) as u64;
    let fits = |b: u64| BigRational::from_integer(BigInt::from(b).pow(e)) >= *r;
    let mut b = estimate.saturating_sub(1);
    while b > 0 && fits(b - 1) {
        b -= 1;
    }
    while !fits(b) {
        b += 1;
    }
    b
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

/// `B⁺_0 .. B⁺_{count-1}`, the Bernoulli numbers with `B⁺_1 = +1/2`.
fn bernoulli_plus(count: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(count);
    for m in 0..count {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        let s = (0..m).fold(BigRational::zero(), |acc, j| {
            acc + BigRational::from_integer(binomial(m + 1, j)) * &b[j]
        });
        b.push(-s / rat(m as i64 + 1));
    }
    if count > 1 {
        b[1] = -b[1].clone();
    }
    b
}

impl Add for Poly {
    type Output = Poly;

    fn add(self, rhs: Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Neg for Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;

    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }
}

impl fmt::Display for Poly {
    /// Lowest degree first: `1/2·n+1/2·n^2`, `3-n+n^2`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => {}
                _ => write!(f, "{a}·")?,
            }
            match k {
                0 => {}
                1 => write!(f, "n")?,
                _ => write!(f, "n^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = NonstdError;

    /// Sums of terms `c`, `c·n^k`, `c*n^k`, `n^k` with rational `c`, in any
    /// order; repeated degrees add up.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| NonstdError::Parse {
            text: s.to_string(),
            reason,
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty polynomial".into()));
        }
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let mut from = 0;
        let mut negative = false;
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !compact[..i].ends_with('^') {
                terms.push((negative, &compact[from..i]));
                negative = ch == '-';
                from = i + 1;
            } else if (ch == '+' || ch == '-') && i == 0 {
                negative = ch == '-';
                from = 1;
            }
        }
        terms.push((negative, &compact[from..]));
        let mut poly = Poly::zero();
        for (negative, term) in terms {
            if term.is_empty() {
                return Err(err("empty term".into()));
            }
            let (coef, var) = match term.find('n') {
                None => (term, None),
                Some(pos) => {
                    let coef = term[..pos].trim_end_matches(['·', '*']);
                    (coef, Some(&term[pos + 1..]))
                }
            };
            let c: BigRational = if coef.is_empty() {
                BigRational::one()
            } else {
                coef.parse()
                    .map_err(|_| err(format!("bad coefficient {coef:?}")))?
            };
            let degree = match var {
                None => 0,
                Some("") => 1,
                Some(rest) => rest
                    .strip_prefix('^')
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("bad exponent in {term:?}")))?,
            };
            let c = if negative { -c } else { c };
            poly = poly + Poly::monomial(degree).scale(&c);
        }
        Ok(poly)
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_string()))
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|c| c.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(Poly::new)
    }
}

/// A sequence of naturals that equals an integer-valued polynomial from
/// index `start` on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NatRepr", into = "NatRepr")]
pub struct NonstandardNat {
    head: Vec<BigUint>,
    tail: Poly,
}

#[derive(Serialize, Deserialize)]
struct NatRepr {
    start: u64,
    tail: Poly,
    exceptions: BTreeMap<u64, String>,
}

impl TryFrom<NatRepr> for NonstandardNat {
    type Error = NonstdError;

    fn try_from(r: NatRepr) -> Result<Self, NonstdError> {
        let exceptions = r
            .exceptions
            .into_iter()
            .map(|(n, v)| {
                v.parse::<BigUint>()
                    .map(|v| (n, v))
                    .map_err(|e| NonstdError::Parse {
                        text: v.clone(),
                        reason: e.to_string(),
                    })
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        NonstandardNat::new(r.start, r.tail, exceptions)
    }
}

impl From<NonstandardNat> for NatRepr {
    fn from(a: NonstandardNat) -> Self {
        NatRepr {
            start: a.start(),
            exceptions: a
                .exceptions()
                .into_iter()
                .map(|(n, v)| (n, v.to_string()))
                .collect(),
            tail: a.tail,
        }
    }
}

fn to_natural(v: &BigRational) -> Option<BigUint> {
    (v.is_integer() && !v.is_negative()).then(|| v.to_integer().to_biguint().expect("non-negative"))
}

impl NonstandardNat {
    /// The sequence equal to `tail` from `start` on and to `exceptions`
    /// (else `tail`) below it. Every value must be a natural number.
    pub fn new(
        start: u64,
        tail: Poly,
        exceptions: BTreeMap<u64, BigUint>,
    ) -> Result<Self, NonstdError> {
        if !tail.is_integer_valued() {
            return Err(NonstdError::NotIntegerValued(tail.to_string()));
        }
        if tail.eventual_sign() == Ordering::Less {
            return Err(NonstdError::EventuallyNegative(tail.to_string()));
        }
        if let Some(&n) = exceptions.keys().find(|&&n| n >= start) {
            return Err(NonstdError::ExceptionAboveStart(n));
        }
        let stable = tail.sign_stable_from().max(start);
        if let Some(n) = (start..stable).find(|&n| tail.eval_u64(n).is_negative()) {
            return Err(NonstdError::NegativeValue { n });
        }
        let head = (0..start)
            .map(|n| match exceptions.get(&n) {
                Some(v) => Ok(v.clone()),
                None => to_natural(&tail.eval_u64(n)).ok_or(NonstdError::NegativeValue { n }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { head, tail }.canonical())
    }

    /// The sequence `max(q(n), 0)`: negative values before the polynomial
    /// settles are clamped to zero.
    pub fn from_poly(tail: Poly) -> Result<Self, NonstdError> {
        if !tail.is_integer_valued() {
            return Err(NonstdError::NotIntegerValued(tail.to_string()));
        }
        if tail.eventual_sign() == Ordering::Less {
            return Err(NonstdError::EventuallyNegative(tail.to_string()));
        }
        let stable = tail.sign_stable_from();
        let start = (0..stable)
            .rev()
            .find(|&n| tail.eval_u64(n).is_negative())
            .map_or(0, |n| n + 1);
        let exceptions = (0..start)
            .map(|n| (n, to_natural(&tail.eval_u64(n)).unwrap_or_default()))
            .collect();
        Self::new(start, tail, exceptions)
    }

    pub fn standard(k: u64) -> Self {
        Self::from_poly(Poly::constant(rat(k as i64))).expect("constants are valid")
    }

    /// `[n]`, the class of the identity sequence.
    pub fn omega() -> Self {
        Self::from_poly(Poly::n()).expect("valid")
    }

    fn canonical(mut self) -> Self {
        while let Some(last) = self.head.last() {
            let n = self.head.len() as u64 - 1;
            if to_natural(&self.tail.eval_u64(n)).as_ref() != Some(last) {
                break;
            }
            self.head.pop();
        }
        self
    }

    pub fn start(&self) -> u64 {
        self.head.len() as u64
    }

    pub fn tail(&self) -> &Poly {
        &self.tail
    }

    /// Head values that differ from the tail polynomial.
    pub fn exceptions(&self) -> BTreeMap<u64, BigUint> {
        self.head
            .iter()
            .enumerate()
            .filter(|&(n, v)| to_natural(&self.tail.eval_u64(n as u64)).as_ref() != Some(v))
            .map(|(n, v)| (n as u64, v.clone()))
            .collect()
    }

    pub fn value(&self, n: u64) -> BigUint {
        match self.head.get(n as usize) {
            Some(v) => v.clone(),
            None => to_natural(&self.tail.eval_u64(n)).expect("tail is natural from start on"),
        }
    }

    pub fn first_values(&self, count: u64) -> Vec<BigUint> {
        (0..count).map(|n| self.value(n)).collect()
    }

    fn pointwise(
        &self,
        other: &Self,
        tail: Poly,
        op: impl Fn(BigUint, BigUint) -> BigUint,
    ) -> Self {
        let start = self.start().max(other.start());
        let exceptions = (0..start)
            .map(|n| (n, op(self.value(n), other.value(n))))
            .collect();
        Self::new(start, tail, exceptions).expect("naturals are closed under + and ·")
    }

    pub fn ns_add(&self, other: &Self) -> Self {
        self.pointwise(other, self.tail.clone() + other.tail.clone(), |a, b| a + b)
    }

    pub fn ns_mul(&self, other: &Self) -> Self {
        self.pointwise(other, &self.tail * &other.tail, |a, b| a * b)
    }

    /// Eventual comparison: the sign of the leading coefficient of the
    /// difference of tails.
    pub fn ns_cmp(&self, other: &Self) -> Ordering {
        (self.tail.clone() - other.tail.clone()).eventual_sign()
    }

    pub fn is_standard(&self) -> Option<BigUint> {
        match self.tail.degree() {
            None => Some(BigUint::zero()),
            Some(0) => to_natural(&self.tail.coeffs[0]),
            Some(_) => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.tail.degree().is_some_and(|d| d >= 1)
    }
}

pub fn ns_add(a: &NonstandardNat, b: &NonstandardNat) -> NonstandardNat {
    a.ns_add(b)
}

pub fn ns_mul(a: &NonstandardNat, b: &NonstandardNat) -> NonstandardNat {
    a.ns_mul(b)
}

pub fn ns_cmp(a: &NonstandardNat, b: &NonstandardNat) -> Ordering {
    a.ns_cmp(b)
}

/// `n ↦ Σ_{i=1}^{n} term(i)`.
pub fn partial_sums(term: &Poly) -> Result<NonstandardNat, NonstdError> {
    if !term.is_integer_valued() {
        return Err(NonstdError::NotIntegerValued(term.to_string()));
    }
    NonstandardNat::from_poly(term.partial_sums())
}

impl fmt::Display for NonstandardNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poly(N={}, q={})", self.start(), self.tail)?;
        let exceptions = self.exceptions();
        if !exceptions.is_empty() {
            let items: Vec<String> = exceptions.iter().map(|(n, v)| format!("{n}:{v}")).collect();
            write!(f, " + {{{}}}", items.join(", "))?;
        }
        Ok(())
    }
}

impl FromStr for NonstandardNat {
    type Err = NonstdError;

    /// `poly(N=.., q=..)` with an optional `+ {n:v, ..}`; a bare
    /// polynomial such as `n^2` is read as `from_poly`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let err = |reason: &str| NonstdError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let Some(body) = text
            .strip_prefix("poly")
            .map(str::trim_start)
            .and_then(|b| b.strip_prefix('('))
        else {
            return Self::from_poly(text.parse()?);
        };
        let close = body.find(')').ok_or_else(|| err("unclosed '('"))?;
        let (args, after) = (&body[..close], body[close + 1..].trim());
        let (n_part, q_part) = args
            .split_once(',')
            .ok_or_else(|| err("expected N=.., q=.."))?;
        let start: u64 = n_part
            .trim()
            .strip_prefix("N=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| err("expected N=<natural>"))?;
        let tail: Poly = q_part
            .trim()
            .strip_prefix("q=")
            .ok_or_else(|| err("expected q=<polynomial>"))?
            .parse()?;
        let mut exceptions = BTreeMap::new();
        if !after.is_empty() {
            let inner = after
                .strip_prefix('+')
                .map(str::trim)
                .and_then(|r| r.strip_prefix('{'))
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| err("exceptions must be written + {n:v, ..}"))?;
            for item in inner.split(',').map(str::trim).filter(|i| !i.is_empty()) {
                let (n, v) = item.split_once(':').ok_or_else(|| err("expected n:v"))?;
                let n: u64 = n.trim().parse().map_err(|_| err("bad exception index"))?;
                let v: BigUint = v.trim().parse().map_err(|_| err("bad exception value"))?;
                exceptions.insert(n, v);
            }
        }
        Self::new(start, tail, exceptions)
    }
}
