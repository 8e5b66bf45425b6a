//! Subset marginals of increasing-tuple distributions and their pairwise
//! indistinguishability metrics.
//!
//! Random size-m sets are represented as sorted tuples; since the underlying
//! tuples are strictly increasing, a projection onto a subset of coordinates
//! is already sorted, so set and tuple views coincide.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exactdist::{pushforward, tvd, ExactDist, Value};
use crate::rational::Rat;

/// A strictly increasing tuple of integers, arity >= 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IncreasingTuple(Vec<BigInt>);

impl IncreasingTuple {
    pub fn new(values: Vec<BigInt>) -> Result<IncreasingTuple> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "increasing tuple needs arity >= 2, got {}",
                values.len()
            )));
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!(
                    "tuple not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(IncreasingTuple(values))
    }

    pub fn values(&self) -> &[BigInt] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn into_value(self) -> Value {
        Value::Tuple(self.0)
    }
}

/// Largest arity for which exhaustive subset-pair enumeration is attempted.
pub const DEFAULT_SUBSET_ENUM_LIMIT: usize = 12;

/// An exact max-distance result together with its witness pair.
#[derive(Debug, Clone)]
pub struct MaxTvd {
    pub value: Rat,
    /// The two subsets (1-based coordinate indices) realizing the max.
    pub witness: (Vec<usize>, Vec<usize>),
}

fn tuple_arity(d: &ExactDist) -> Result<usize> {
    d.arity()
        .ok_or_else(|| Error::KindMismatch {
            left: "tuple[..]".into(),
            right: d.kind().to_string(),
        })
}

/// Law of the (n-1)-tuple omitting 1-based coordinate `i`.
pub fn drop_index(d: &ExactDist, i: usize) -> Result<ExactDist> {
    let n = tuple_arity(d)?;
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange { index: i, arity: n });
    }
    pushforward(d, |v| {
        let t = v.as_tuple().expect("tuple kind");
        let kept: Vec<BigInt> = t
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i - 1)
            .map(|(_, x)| x.clone())
            .collect();
        Ok(Value::Tuple(kept))
    })
}

/// Law of the selected 1-based coordinates, in increasing index order.
pub fn project(d: &ExactDist, s: &[usize]) -> Result<ExactDist> {
    let n = tuple_arity(d)?;
    if s.is_empty() {
        return Err(Error::Domain("empty subset index".into()));
    }
    for w in s.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain(format!(
                "subset indices must be strictly increasing, got {:?}",
                s
            )));
        }
    }
    if s[0] < 1 || *s.last().unwrap() > n {
        return Err(Error::IndexOutOfRange {
            index: *s.last().unwrap(),
            arity: n,
        });
    }
    pushforward(d, |v| {
        let t = v.as_tuple().expect("tuple kind");
        Ok(Value::Tuple(s.iter().map(|&i| t[i - 1].clone()).collect()))
    })
}

/// max over i in [n-1] of tvd(X_{-i}, X_{-(i+1)}): the neighbouring
/// (n-1)-subset indistinguishability of the tuple law.
pub fn neighboring_nm1_max_tvd(d: &ExactDist) -> Result<MaxTvd> {
    let n = tuple_arity(d)?;
    if n < 2 {
        return Err(Error::Domain("arity must be >= 2".into()));
    }
    let drops: Vec<ExactDist> = (1..=n).map(|i| drop_index(d, i)).collect::<Result<_>>()?;
    let mut best: Option<MaxTvd> = None;
    for i in 1..n {
        let v = tvd(&drops[i - 1], &drops[i])?;
        if best.as_ref().map_or(true, |b| v > b.value) {
            best = Some(MaxTvd {
                value: v,
                witness: (complement(n, i), complement(n, i + 1)),
            });
        }
    }
    Ok(best.expect("n >= 2 gives at least one pair"))
}

/// eps* = max over all pairs i < j of tvd(X_{-i}, X_{-j}).
pub fn all_nm1_max_tvd(d: &ExactDist) -> Result<MaxTvd> {
    let n = tuple_arity(d)?;
    if n < 2 {
        return Err(Error::Domain("arity must be >= 2".into()));
    }
    let drops: Vec<ExactDist> = (1..=n).map(|i| drop_index(d, i)).collect::<Result<_>>()?;
    let mut best: Option<MaxTvd> = None;
    for i in 1..=n {
        for j in (i + 1)..=n {
            let v = tvd(&drops[i - 1], &drops[j - 1])?;
            if best.as_ref().map_or(true, |b| v > b.value) {
                best = Some(MaxTvd {
                    value: v,
                    witness: (complement(n, i), complement(n, j)),
                });
            }
        }
    }
    Ok(best.expect("n >= 2 gives at least one pair"))
}

/// max over all pairs of m-element subsets of tvd of the projections.
/// Exhaustive; refuses arities beyond `limit` (C(n,m)^2 pairs explode).
pub fn all_m_subset_max_tvd_with_limit(
    d: &ExactDist,
    m: usize,
    limit: usize,
) -> Result<MaxTvd> {
    let n = tuple_arity(d)?;
    if m < 1 || m >= n {
        return Err(Error::Domain(format!(
            "subset size must satisfy 1 <= m < n, got m={m}, n={n}"
        )));
    }
    if n > limit {
        return Err(Error::Capacity {
            predicted: format!("C({n},{m})^2 subset pairs"),
            cap: limit as u64,
        });
    }
    let subsets = combinations(n, m);
    let projections: Vec<ExactDist> = subsets
        .iter()
        .map(|s| project(d, s))
        .collect::<Result<_>>()?;
    let mut best: Option<MaxTvd> = None;
    for a in 0..subsets.len() {
        for b in (a + 1)..subsets.len() {
            let v = tvd(&projections[a], &projections[b])?;
            if best.as_ref().map_or(true, |x| v > x.value) {
                best = Some(MaxTvd {
                    value: v,
                    witness: (subsets[a].clone(), subsets[b].clone()),
                });
            }
        }
    }
    Ok(best.expect("m < n gives at least two subsets"))
}

pub fn all_m_subset_max_tvd(d: &ExactDist, m: usize) -> Result<MaxTvd> {
    all_m_subset_max_tvd_with_limit(d, m, DEFAULT_SUBSET_ENUM_LIMIT)
}

fn complement(n: usize, dropped: usize) -> Vec<usize> {
    (1..=n).filter(|&k| k != dropped).collect()
}

/// All size-m subsets of [1..n], each strictly increasing, in lexicographic
/// order.
pub fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=m).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            if cur[i - 1] < n - (m - i) {
                cur[i - 1] += 1;
                for k in i..m {
                    cur[k] = cur[k - 1] + 1;
                }
                break;
            }
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::ExactDist;
    use crate::rational::{rat, rat_int};

    fn point_tuple(vs: &[i64]) -> ExactDist {
        ExactDist::point(Value::tuple(vs))
    }

    fn two_atom(a: &[i64], b: &[i64]) -> ExactDist {
        ExactDist::from_entries([
            (Value::tuple(a), rat(1, 2)),
            (Value::tuple(b), rat(1, 2)),
        ])
        .unwrap()
    }

    #[test]
    fn drop_index_examples() {
        let p = point_tuple(&[1, 2, 3]);
        let d = drop_index(&p, 2).unwrap();
        assert_eq!(d, point_tuple(&[1, 3]));

        let u = two_atom(&[1, 2], &[2, 3]);
        let d = drop_index(&u, 1).unwrap();
        assert_eq!(d.prob(&Value::Tuple(vec![2.into()])), rat(1, 2));
        assert_eq!(d.prob(&Value::Tuple(vec![3.into()])), rat(1, 2));

        assert!(drop_index(&u, 0).is_err());
        assert!(drop_index(&u, 3).is_err());
    }

    #[test]
    fn drop_index_on_n2_chain() {
        // X1 uniform on [1..2], X2 = X1 + 1
        let d = two_atom(&[1, 2], &[2, 3]);
        let x1 = drop_index(&d, 2).unwrap();
        let x2 = drop_index(&d, 1).unwrap();
        assert_eq!(tvd(&x1, &x2).unwrap(), rat(1, 2));
    }

    #[test]
    fn project_examples() {
        let p = point_tuple(&[1, 5, 9]);
        assert_eq!(project(&p, &[1, 3]).unwrap(), point_tuple(&[1, 9]));
        assert_eq!(project(&p, &[1, 2, 3]).unwrap(), p);
        assert!(project(&p, &[]).is_err());
        assert!(project(&p, &[2, 2]).is_err());
        assert!(project(&p, &[0, 1]).is_err());
        assert!(project(&p, &[1, 4]).is_err());
    }

    #[test]
    fn project_composes() {
        let d = two_atom(&[1, 4, 9, 16], &[2, 5, 10, 17]);
        let s = [1, 2, 4];
        let t = [1, 3];
        let lhs = project(&project(&d, &s).unwrap(), &t).unwrap();
        let composed: Vec<usize> = t.iter().map(|&k| s[k - 1]).collect();
        let rhs = project(&d, &composed).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn max_tvd_on_point_mass() {
        let p = point_tuple(&[1, 2]);
        assert_eq!(neighboring_nm1_max_tvd(&p).unwrap().value, rat_int(1));

        let p3 = point_tuple(&[1, 2, 3]);
        assert_eq!(all_nm1_max_tvd(&p3).unwrap().value, rat_int(1));
        assert_eq!(all_m_subset_max_tvd(&p3, 1).unwrap().value, rat_int(1));
    }

    #[test]
    fn n2_all_equals_neighboring() {
        let d = two_atom(&[1, 2], &[2, 3]);
        assert_eq!(
            all_nm1_max_tvd(&d).unwrap().value,
            neighboring_nm1_max_tvd(&d).unwrap().value
        );
    }

    #[test]
    fn m_equals_nm1_matches_all_nm1() {
        let d = two_atom(&[1, 3, 7], &[2, 5, 11]);
        assert_eq!(
            all_m_subset_max_tvd(&d, 2).unwrap().value,
            all_nm1_max_tvd(&d).unwrap().value
        );
    }

    #[test]
    fn enumeration_limit_enforced() {
        let big: Vec<i64> = (1..=13).collect();
        let d = ExactDist::point(Value::tuple(&big));
        assert!(matches!(
            all_m_subset_max_tvd(&d, 2),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn combinations_counts() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(5, 3).len(), 10);
        assert_eq!(combinations(3, 3), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn increasing_tuple_validation() {
        assert!(IncreasingTuple::new(vec![1.into(), 2.into(), 3.into()]).is_ok());
        assert!(IncreasingTuple::new(vec![1.into(), 1.into()]).is_err());
        assert!(IncreasingTuple::new(vec![1.into()]).is_err());
    }
}
