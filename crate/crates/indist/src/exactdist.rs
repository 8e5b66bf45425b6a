//! Exact finite probability distributions with big-rational weights.
//!
//! `ExactDist` is the universal carrier for everything in this crate: scalar
//! integer laws, laws of strictly increasing tuples, and flag-augmented
//! joints. All arithmetic is exact; probabilities are stored in lowest terms,
//! strictly positive, and sum to exactly 1.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A support point: a scalar integer, a tuple of integers, or a value paired
/// with a {0,1} flag bit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Tuple(Vec<BigInt>),
    Flagged(Box<Value>, bool),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(BigInt::from(v))
    }

    pub fn tuple(vs: &[i64]) -> Value {
        Value::Tuple(vs.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn kind(&self) -> Kind {
        match self {
            Value::Int(_) => Kind::Scalar,
            Value::Tuple(t) => Kind::Tuple(t.len()),
            Value::Flagged(v, _) => Kind::Flagged(Box::new(v.kind())),
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[BigInt]> {
        match self {
            Value::Tuple(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Tuple(t) => {
                write!(f, "(")?;
                for (i, v) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Value::Flagged(v, s) => write!(f, "({v},{})", u8::from(*s)),
        }
    }
}

/// The shared shape of all support points of a distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Scalar,
    Tuple(usize),
    Flagged(Box<Kind>),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Scalar => write!(f, "scalar"),
            Kind::Tuple(n) => write!(f, "tuple[{n}]"),
            Kind::Flagged(k) => write!(f, "flagged({k})"),
        }
    }
}

/// A finite distribution: value -> positive rational probability, summing
/// exactly to 1. Zero-mass points are never stored. Immutable after
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDist {
    kind: Kind,
    probs: BTreeMap<Value, Rat>,
}

impl ExactDist {
    /// Build from (value, probability) pairs. Equal values are merged by
    /// exact addition; zero entries are dropped; the total must be exactly 1.
    pub fn from_entries(entries: impl IntoIterator<Item = (Value, Rat)>) -> Result<ExactDist> {
        let mut probs: BTreeMap<Value, Rat> = BTreeMap::new();
        let mut kind: Option<Kind> = None;
        for (v, p) in entries {
            if p.is_negative() {
                return Err(Error::Domain(format!(
                    "negative probability {p} at {v}"
                )));
            }
            if p.is_zero() {
                continue;
            }
            match &kind {
                None => kind = Some(v.kind()),
                Some(k) => {
                    let vk = v.kind();
                    if *k != vk {
                        return Err(Error::KindMismatch {
                            left: k.to_string(),
                            right: vk.to_string(),
                        });
                    }
                }
            }
            *probs.entry(v).or_insert_with(Rat::zero) += p;
        }
        let kind = kind.ok_or_else(|| Error::Domain("empty distribution".into()))?;
        let total: Rat = probs.values().sum();
        if !total.is_one() {
            return Err(Error::Normalization {
                got: crate::rational::format_rational(&total),
            });
        }
        Ok(ExactDist { kind, probs })
    }

    /// Point mass at `v`.
    pub fn point(v: Value) -> ExactDist {
        let kind = v.kind();
        let mut probs = BTreeMap::new();
        probs.insert(v, Rat::one());
        ExactDist { kind, probs }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Tuple arity, if this is a tuple distribution.
    pub fn arity(&self) -> Option<usize> {
        match self.kind {
            Kind::Tuple(n) => Some(n),
            _ => None,
        }
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, v: &Value) -> Rat {
        self.probs.get(v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Rat)> {
        self.probs.iter()
    }

    fn check_same_kind(&self, other: &ExactDist) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                left: self.kind.to_string(),
                right: other.kind.to_string(),
            });
        }
        Ok(())
    }

    /// Exact expectation of a scalar distribution.
    pub fn expectation(&self) -> Result<Rat> {
        if self.kind != Kind::Scalar {
            return Err(Error::KindMismatch {
                left: Kind::Scalar.to_string(),
                right: self.kind.to_string(),
            });
        }
        let mut e = Rat::zero();
        for (v, p) in &self.probs {
            let x = v.as_int().expect("scalar kind");
            e += Rat::from_integer(x.clone()) * p;
        }
        Ok(e)
    }

    /// Largest scalar entry appearing anywhere in the support (max value for
    /// scalars, max coordinate for tuples).
    pub fn max_scalar(&self) -> BigInt {
        self.probs
            .keys()
            .map(|v| match v {
                Value::Int(x) => x.clone(),
                Value::Tuple(t) => t.iter().max().cloned().expect("nonempty tuple"),
                Value::Flagged(inner, _) => match inner.as_ref() {
                    Value::Int(x) => x.clone(),
                    Value::Tuple(t) => t.iter().max().cloned().expect("nonempty tuple"),
                    Value::Flagged(..) => unreachable!("nested flags are not constructed"),
                },
            })
            .max()
            .expect("nonempty support")
    }
}

/// Uniform distribution on the integers [lo, hi].
pub fn uniform_int(lo: &BigInt, hi: &BigInt) -> Result<ExactDist> {
    if lo > hi {
        return Err(Error::InvalidRange {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    let count: BigInt = hi - lo + 1;
    let p = Rat::new(BigInt::one(), count.clone());
    let mut entries = Vec::new();
    let mut v = lo.clone();
    while &v <= hi {
        entries.push((Value::Int(v.clone()), p.clone()));
        v += 1;
    }
    ExactDist::from_entries(entries)
}

/// Convenience for small ranges.
pub fn uniform(lo: i64, hi: i64) -> ExactDist {
    uniform_int(&BigInt::from(lo), &BigInt::from(hi)).expect("lo <= hi")
}

/// Total variation distance, computed exactly over the union of supports by
/// a sorted merge of the two BTree maps.
pub fn tvd(d1: &ExactDist, d2: &ExactDist) -> Result<Rat> {
    d1.check_same_kind(d2)?;
    let mut sum = Rat::zero();
    let mut it1 = d1.probs.iter().peekable();
    let mut it2 = d2.probs.iter().peekable();
    loop {
        match (it1.peek(), it2.peek()) {
            (Some((v1, p1)), Some((v2, p2))) => match v1.cmp(v2) {
                std::cmp::Ordering::Less => {
                    sum += *p1;
                    it1.next();
                }
                std::cmp::Ordering::Greater => {
                    it2.next();
                }
                std::cmp::Ordering::Equal => {
                    if p1 > p2 {
                        sum += &(*p1).clone() - *p2;
                    }
                    it1.next();
                    it2.next();
                }
            },
            (Some((_, p1)), None) => {
                sum += *p1;
                it1.next();
            }
            (None, _) => break,
        }
    }
    Ok(sum)
}

/// Exact pushforward of `d` through `f`. The image probability of each point
/// is the sum of its preimage masses.
pub fn pushforward(
    d: &ExactDist,
    mut f: impl FnMut(&Value) -> Result<Value>,
) -> Result<ExactDist> {
    let mut entries = Vec::with_capacity(d.support_len());
    for (v, p) in d.iter() {
        entries.push((f(v)?, p.clone()));
    }
    ExactDist::from_entries(entries)
}

/// Exact mixture law of weighted components. Weights must be positive and sum
/// exactly to 1; all components must share one value kind.
pub fn mixture(components: &[(Rat, ExactDist)]) -> Result<ExactDist> {
    if components.is_empty() {
        return Err(Error::Domain("empty mixture".into()));
    }
    let total: Rat = components.iter().map(|(w, _)| w.clone()).sum();
    if !total.is_one() {
        return Err(Error::Normalization {
            got: crate::rational::format_rational(&total),
        });
    }
    let mut entries = Vec::new();
    for (w, d) in components {
        if !w.is_positive() {
            return Err(Error::Domain(format!("non-positive weight {w}")));
        }
        for (v, p) in d.iter() {
            entries.push((v.clone(), w * p));
        }
    }
    ExactDist::from_entries(entries)
}

/// Exact law of the independent sum of two scalar-integer distributions.
pub fn convolve(d1: &ExactDist, d2: &ExactDist) -> Result<ExactDist> {
    if d1.kind != Kind::Scalar || d2.kind != Kind::Scalar {
        return Err(Error::KindMismatch {
            left: d1.kind.to_string(),
            right: d2.kind.to_string(),
        });
    }
    let mut entries = Vec::with_capacity(d1.support_len() * d2.support_len());
    for (v1, p1) in d1.iter() {
        let x1 = v1.as_int().expect("scalar");
        for (v2, p2) in d2.iter() {
            let x2 = v2.as_int().expect("scalar");
            entries.push((Value::Int(x1 + x2), p1 * p2));
        }
    }
    ExactDist::from_entries(entries)
}

/// delta(U[1..n1], U[1..n1] + U[1..n2]) = (n2+1)/(2 n1), valid for n1 > n2 >= 1.
pub fn uniform_shift_tvd_closed_form(n1: u64, n2: u64) -> Result<Rat> {
    if n2 < 1 || n1 <= n2 {
        return Err(Error::Domain(format!(
            "closed form requires n1 > n2 >= 1, got n1={n1}, n2={n2}"
        )));
    }
    Ok(Rat::new(BigInt::from(n2 + 1), BigInt::from(2 * n1)))
}

/// The flag coupling: a joint (X1, S) with marginal d1 on values,
/// Pr(S=1 | X1=x) = min(1, Pr2(x)/Pr1(x)), so Pr(S=0) = tvd(d1, d2) and
/// Pr(X1=x, S=1) <= Pr2(x) pointwise.
pub fn coupling_flag(d1: &ExactDist, d2: &ExactDist) -> Result<ExactDist> {
    d1.check_same_kind(d2)?;
    let mut entries = Vec::new();
    for (v, p1) in d1.iter() {
        let p2 = d2.prob(v);
        let kept = if &p2 < p1 { p2 } else { p1.clone() };
        let dropped = p1 - &kept;
        entries.push((Value::Flagged(Box::new(v.clone()), true), kept));
        entries.push((Value::Flagged(Box::new(v.clone()), false), dropped));
    }
    ExactDist::from_entries(entries)
}

/// Conditional law of the value given flag = 1.
pub fn condition_on_flag(joint: &ExactDist) -> Result<ExactDist> {
    let arity_ok = matches!(joint.kind, Kind::Flagged(_));
    if !arity_ok {
        return Err(Error::KindMismatch {
            left: "flagged(..)".into(),
            right: joint.kind.to_string(),
        });
    }
    let mut mass = Rat::zero();
    for (v, p) in joint.iter() {
        if let Value::Flagged(_, true) = v {
            mass += p;
        }
    }
    if mass.is_zero() {
        return Err(Error::ConditionOnNull);
    }
    let mut entries = Vec::new();
    for (v, p) in joint.iter() {
        if let Value::Flagged(inner, true) = v {
            entries.push((inner.as_ref().clone(), p / &mass));
        }
    }
    ExactDist::from_entries(entries)
}

/// Pr(flag = 0) of a flagged joint.
pub fn flag_zero_prob(joint: &ExactDist) -> Result<Rat> {
    if !matches!(joint.kind, Kind::Flagged(_)) {
        return Err(Error::KindMismatch {
            left: "flagged(..)".into(),
            right: joint.kind.to_string(),
        });
    }
    let mut mass = Rat::zero();
    for (v, p) in joint.iter() {
        if let Value::Flagged(_, false) = v {
            mass += p;
        }
    }
    Ok(mass)
}

/// The conditioning bound (delta + eps) / (1 - eps): an upper bound on the
/// distance of two conditioned laws sharing a flag with Pr(flag=0) = eps < 1
/// when the unconditioned marginals are delta apart.
pub fn conditioned_tvd_bound(delta: &Rat, eps: &Rat) -> Result<Rat> {
    if eps >= &Rat::one() {
        return Err(Error::Domain("bound requires Pr(flag=0) < 1".into()));
    }
    Ok((delta + eps) / (Rat::one() - eps))
}

/// max(0, E[d2] - E[d1]) / (b - a) for scalar distributions supported in
/// [a, b]. A lower bound on tvd(d1, d2) whenever E[d2] >= E[d1]; negative
/// gaps clamp to 0 so callers can probe both orderings.
pub fn expectation_gap_lower_bound(
    d1: &ExactDist,
    d2: &ExactDist,
    a: &Rat,
    b: &Rat,
) -> Result<Rat> {
    if a >= b {
        return Err(Error::Domain(format!("interval requires a < b, got [{a},{b}]")));
    }
    for d in [d1, d2] {
        if d.kind != Kind::Scalar {
            return Err(Error::KindMismatch {
                left: Kind::Scalar.to_string(),
                right: d.kind.to_string(),
            });
        }
        for (v, _) in d.iter() {
            let x = Rat::from_integer(v.as_int().expect("scalar").clone());
            if &x < a || &x > b {
                return Err(Error::Domain(format!(
                    "support point {x} outside [{a},{b}]"
                )));
            }
        }
    }
    let gap = d2.expectation()? - d1.expectation()?;
    if gap.is_negative() {
        return Ok(Rat::zero());
    }
    Ok(gap / (b - a))
}
