//! Builders for increasing-tuple distributions with almost indistinguishable
//! neighbouring (n-1)-subsets: the n=2 chain, the n=3 base case, and the
//! recursive induction step, in exact-enumeration mode (small parameters) and
//! big-integer sampling mode (tower-scale parameters).
//!
//! Epsilon is normalized to a dyadic 2^(-t): every exponent in the recursion
//! contains -2*log(eps), so dyadic eps keeps all exponents integral. A
//! non-dyadic request is rounded down (stronger guarantee, larger bound) and
//! the normalization is visible in the certificate.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::exactdist::{ExactDist, Value};
use crate::rational::{ceil_inverse, normalize_dyadic, Rat};
use crate::sampling::{rng_for_sample, uniform_biguint};
use crate::subsets::IncreasingTuple;
use crate::tower::{sum_of_powers_le_pow_minus, Bound, LazyUniform};

/// Default ceiling on exact-enumeration support size.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Largest bit length materialized as a plain big integer; past this, values
/// and bounds go symbolic.
const EXACT_BITS_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sample,
}

/// Full input to the builders.
#[derive(Debug, Clone)]
pub struct ConstructionParams {
    pub n: u32,
    pub eps: Rat,
    pub mode: Mode,
    pub seed: u64,
    pub enumeration_cap: u64,
}

impl ConstructionParams {
    pub fn new(n: u32, eps: Rat, mode: Mode, seed: u64) -> ConstructionParams {
        ConstructionParams {
            n,
            eps,
            mode,
            seed,
            enumeration_cap: DEFAULT_ENUM_CAP,
        }
    }
}

/// The three requirement constants of the recursive construction, evaluated
/// exactly at (n, eps).
#[derive(Debug, Clone)]
pub struct ConstructionCertificate {
    pub n: u32,
    /// normalized (dyadic) epsilon actually used
    pub eps: Rat,
    /// eps = 2^(-t)
    pub t: u64,
    /// requirement-3 ceiling on X_n
    pub bound: Bound,
    /// requirement-2 gap threshold n + 4 - log(eps)
    pub spacing_threshold: Rat,
    /// requirement-2 failure probability budget eps * 2^(-n-3)
    pub spacing_prob_bound: Rat,
    /// requirement-1 budget eps * (1 - 2^(-n))
    pub neighbor_bound: Rat,
}

fn pow2_rat(t: u64) -> Rat {
    Rat::new(BigInt::one(), BigInt::one() << t)
}

/// exp2^(height)(a) - minus, materialized when it fits, symbolic otherwise.
fn tower_minus(height: u32, a: &BigUint, minus: &BigUint) -> Result<Bound> {
    // Walk the tower from the top: after each step the value is 2^previous.
    let mut exponent = a.clone();
    let mut steps_left = height;
    while steps_left > 1 {
        match exponent.to_u64() {
            Some(e) if e <= EXACT_BITS_LIMIT => {
                exponent = BigUint::one() << e;
                steps_left -= 1;
            }
            _ => {
                return Err(Error::Domain(format!(
                    "tower exp2^{height}({a}) exceeds the symbolic representation"
                )))
            }
        }
    }
    // one power application remains: value = 2^exponent - minus
    match exponent.to_u64() {
        Some(e) if e <= EXACT_BITS_LIMIT => {
            Ok(Bound::Exact((BigUint::one() << e) - minus))
        }
        _ => Ok(Bound::PowMinus {
            exponent,
            minus: minus.clone(),
        }),
    }
}

/// Evaluate the requirement constants for the level-n construction.
/// n >= 3; non-dyadic eps is normalized down first, never silently mixed in.
pub fn certificate(n: u32, eps: &Rat) -> Result<ConstructionCertificate> {
    if n < 3 {
        return Err(Error::Domain(
            "certificate applies to the recursive construction (n >= 3); use the n=2 chain directly".into(),
        ));
    }
    let (eps, t) = normalize_dyadic(eps)?;
    let c = ceil_inverse(&eps)?;
    let a = BigUint::from(4u32) * &c + BigUint::from(6u32);
    let minus = BigUint::from(4 * n as u64 + 2 + 2 * t);
    let bound = tower_minus(n - 2, &a, &minus)?;
    Ok(ConstructionCertificate {
        n,
        eps: eps.clone(),
        t,
        bound,
        spacing_threshold: Rat::from_integer(BigInt::from(n as u64 + 4 + t)),
        spacing_prob_bound: &eps * pow2_rat(n as u64 + 3),
        neighbor_bound: &eps * (Rat::one() - pow2_rat(n as u64)),
    })
}

fn check_eps_range(eps: &Rat) -> Result<()> {
    use num_traits::Signed;
    if !eps.is_positive() || eps > &Rat::one() {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0,1], got {}",
            crate::rational::format_rational(eps)
        )));
    }
    Ok(())
}

/// The n=2 chain: X1 uniform on [1..ceil(1/eps)], X2 = X1 + 1.
pub fn build_n2(eps: &Rat) -> Result<ExactDist> {
    check_eps_range(eps)?;
    let c = ceil_inverse(eps)?;
    let c_int = BigInt::from(c.clone());
    let p = Rat::new(BigInt::one(), c_int.clone());
    let mut entries = Vec::new();
    let mut x = BigInt::one();
    while x <= c_int {
        entries.push((Value::Tuple(vec![x.clone(), &x + 1]), p.clone()));
        x += 1;
    }
    ExactDist::from_entries(entries)
}

pub fn build_n2_sample(eps: &Rat, rng: &mut impl RngCore) -> Result<IncreasingTuple> {
    check_eps_range(eps)?;
    let c = ceil_inverse(eps)?;
    let x1 = uniform_biguint(rng, &c)?;
    let x1 = BigInt::from(x1);
    IncreasingTuple::new(vec![x1.clone(), x1 + 1])
}

/// Base-case parameters: X1 uniform on [1..2^(4c+4)], K uniform on
/// [c+3 .. 4c+3], X2 = X1 + 2^K, X3 = X1 + 2^(K+1).
struct N3Params {
    x1_max_bits: u64,
    k_lo: u64,
    k_hi: u64,
}

fn n3_params(eps: &Rat) -> Result<(N3Params, Rat, u64)> {
    let (eps, t) = normalize_dyadic(eps)?;
    let c = ceil_inverse(&eps)?
        .to_u64()
        .ok_or_else(|| Error::Domain("1/eps too large for the base case".into()))?;
    Ok((
        N3Params {
            x1_max_bits: 4 * c + 4,
            k_lo: c + 3,
            k_hi: 4 * c + 3,
        },
        eps,
        t,
    ))
}

/// Predicted atom count of the exact n=3 joint: 2^(4c+4) * (3c+1).
pub fn n3_atom_count(eps: &Rat) -> Result<BigUint> {
    let (p, _, _) = n3_params(eps)?;
    Ok((BigUint::one() << p.x1_max_bits) * BigUint::from(p.k_hi - p.k_lo + 1))
}

/// Exact n=3 joint by enumerating (X1, K).
pub fn build_n3_exact(eps: &Rat, enumeration_cap: u64) -> Result<ExactDist> {
    let (p, _, _) = n3_params(eps)?;
    let atoms = n3_atom_count(eps)?;
    if atoms > BigUint::from(enumeration_cap) {
        return Err(Error::Capacity {
            predicted: atoms.to_string(),
            cap: enumeration_cap,
        });
    }
    let x1_max = 1u64 << p.x1_max_bits;
    let count = atoms.to_u64().expect("under cap");
    let prob = Rat::new(BigInt::one(), BigInt::from(count));
    let mut entries = Vec::with_capacity(count as usize);
    for k in p.k_lo..=p.k_hi {
        let gap = BigInt::one() << k;
        for x1 in 1..=x1_max {
            let x1 = BigInt::from(x1);
            let x2 = &x1 + &gap;
            let x3 = &x2 + &gap;
            entries.push((Value::Tuple(vec![x1, x2, x3]), prob.clone()));
        }
    }
    ExactDist::from_entries(entries)
}

/// Injectable-parameter variant of the base case for toy-scale tests of the
/// recursion: X1 uniform on [1..x1_range], K uniform on [k_lo..k_hi].
pub fn build_n3_toy(x1_range: u64, k_lo: u64, k_hi: u64) -> Result<ExactDist> {
    if x1_range == 0 || k_hi < k_lo {
        return Err(Error::Domain("empty toy base-case ranges".into()));
    }
    let count = x1_range * (k_hi - k_lo + 1);
    let prob = Rat::new(BigInt::one(), BigInt::from(count));
    let mut entries = Vec::with_capacity(count as usize);
    for k in k_lo..=k_hi {
        let gap = BigInt::one() << k;
        for x1 in 1..=x1_range {
            let x1 = BigInt::from(x1);
            let x2 = &x1 + &gap;
            let x3 = &x2 + &gap;
            entries.push((Value::Tuple(vec![x1, x2, x3]), prob.clone()));
        }
    }
    ExactDist::from_entries(entries)
}

pub fn build_n3_sample(eps: &Rat, rng: &mut impl RngCore) -> Result<IncreasingTuple> {
    let (p, _, _) = n3_params(eps)?;
    let x1 = BigInt::from(uniform_biguint(rng, &(BigUint::one() << p.x1_max_bits))?);
    let k_count = BigUint::from(p.k_hi - p.k_lo + 1);
    let k = p.k_lo - 1 + uniform_biguint(rng, &k_count)?.to_u64().expect("small");
    let gap = BigInt::one() << k;
    let x2 = &x1 + &gap;
    let x3 = &x2 + &gap;
    IncreasingTuple::new(vec![x1, x2, x3])
}

/// The latent variables of one exact-valued induction step.
#[derive(Debug, Clone)]
pub struct LatentTrace {
    pub x_prev: IncreasingTuple,
    pub d_values: Vec<BigInt>,
    pub y1: BigInt,
}

/// One induction step n -> n+1 with exactly representable values:
/// Y1 uniform on [1 .. exp2^(n-1)(4c+6)/2 - 4n - 6 + 2 log eps],
/// D_i uniform on [1 .. 2^(X_i + 4n - 2 log eps)], Y_{i+1} = Y_i + D_i.
pub fn recursive_step_sample(
    x_prev: &IncreasingTuple,
    eps: &Rat,
    rng: &mut impl RngCore,
) -> Result<(IncreasingTuple, LatentTrace)> {
    let (eps, t) = normalize_dyadic(eps)?;
    let n = x_prev.arity() as u64;
    let c = ceil_inverse(&eps)?;
    let a = BigUint::from(4u32) * &c + BigUint::from(6u32);

    // Y1 range: 2^(E0) - (4n + 6 + 2t) with E0 = exp2^(n-2)(4c+6) - 1
    let inner = tower_minus((n - 2) as u32, &a, &BigUint::zero())?;
    let e0 = match inner {
        Bound::Exact(v) => v - BigUint::one(),
        Bound::PowMinus { .. } => {
            return Err(Error::Domain(
                "step values exceed exact integers; use the symbolic sampler".into(),
            ))
        }
    };
    let e0_u = e0.to_u64().filter(|&e| e <= EXACT_BITS_LIMIT).ok_or_else(|| {
        Error::Domain("step values exceed exact integers; use the symbolic sampler".into())
    })?;
    let y1_minus = BigUint::from(4 * n + 6 + 2 * t);
    let y1_max = (BigUint::one() << e0_u) - &y1_minus;
    let y1 = BigInt::from(uniform_biguint(rng, &y1_max)?);

    let mut values = vec![y1.clone()];
    let mut d_values = Vec::with_capacity(n as usize);
    for x in x_prev.values() {
        let e = x.to_biguint().ok_or_else(|| Error::Domain("negative X in step".into()))?
            + BigUint::from(4 * n + 2 * t);
        let e = e.to_u64().filter(|&e| e <= EXACT_BITS_LIMIT).ok_or_else(|| {
            Error::Domain("step values exceed exact integers; use the symbolic sampler".into())
        })?;
        let d = BigInt::from(uniform_biguint(rng, &(BigUint::one() << e))?);
        let next = values.last().unwrap() + &d;
        values.push(next);
        d_values.push(d);
    }
    Ok((
        IncreasingTuple::new(values)?,
        LatentTrace {
            x_prev: x_prev.clone(),
            d_values,
            y1,
        },
    ))
}

/// A tuple whose values are too large to write out: Y1 plus a chain of
/// lazily-sampled gap draws. Supports the checks the pipeline needs
/// (spacing, strict increase, requirement-3 ceiling) without materializing.
#[derive(Debug, Clone)]
pub struct HugeTuple {
    pub y1_draw: LazyUniform,
    pub y1_minus: BigUint,
    pub gap_draws: Vec<LazyUniform>,
}

impl HugeTuple {
    pub fn arity(&self) -> usize {
        self.gap_draws.len() + 1
    }

    /// Is gap i (0-based; the value Y_{i+2} - Y_{i+1}) below `threshold`?
    pub fn gap_below(&self, i: usize, threshold: &BigUint) -> bool {
        // gap = 1 + V, so gap < c iff V < c - 1
        if threshold.is_zero() || threshold.is_one() {
            return false;
        }
        self.gap_draws[i].lt(&(threshold - BigUint::one()))
    }

    /// Exact sufficient check that the top value stays under a symbolic
    /// ceiling 2^p - k.
    pub fn within_bound(&self, bound: &Bound) -> bool {
        match bound {
            Bound::PowMinus { exponent, minus } => {
                let mut exps = vec![self.y1_draw.exponent().clone()];
                exps.extend(self.gap_draws.iter().map(|d| d.exponent().clone()));
                sum_of_powers_le_pow_minus(&exps, &self.y1_minus, exponent, minus)
            }
            // an exact bound means the values were representable after all
            Bound::Exact(_) => false,
        }
    }
}

fn fresh_key(rng: &mut impl RngCore) -> [u8; 32] {
    let mut key = [0u8; 32];
    rng.fill_bytes(&mut key);
    key
}

/// The induction step at a level whose outputs only exist symbolically
/// (level 4 -> 5): exact values in, lazy draws out.
pub fn recursive_step_sample_huge(
    x_prev: &IncreasingTuple,
    eps: &Rat,
    rng: &mut impl RngCore,
) -> Result<HugeTuple> {
    let (eps, t) = normalize_dyadic(eps)?;
    let n = x_prev.arity() as u64;
    let c = ceil_inverse(&eps)?;
    let a = BigUint::from(4u32) * &c + BigUint::from(6u32);

    // E0 = exp2^(n-2)(4c+6) - 1 must itself be materializable
    let inner = tower_minus((n - 2) as u32, &a, &BigUint::one())?;
    let e0 = match inner {
        Bound::Exact(v) => v, // 2^... - 1
        Bound::PowMinus { .. } => {
            return Err(Error::Domain(
                "level beyond the symbolic representation (largest supported arity is 5)".into(),
            ))
        }
    };
    let y1_minus = BigUint::from(4 * n + 6 + 2 * t);
    // rejection-sample Y1 = V + 1 uniform on [1 .. 2^E0 - y1_minus]
    let y1_draw = loop {
        let candidate = LazyUniform::new(fresh_key(rng), e0.clone());
        if !candidate.ge_pow_minus(&y1_minus) {
            break candidate;
        }
    };
    let gap_draws = x_prev
        .values()
        .iter()
        .map(|x| {
            let e = x
                .to_biguint()
                .ok_or_else(|| Error::Domain("negative X in step".into()))?
                + BigUint::from(4 * n + 2 * t);
            Ok(LazyUniform::new(fresh_key(rng), e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HugeTuple {
        y1_draw,
        y1_minus,
        gap_draws,
    })
}

/// One draw from the full pipeline at any supported level.
#[derive(Debug, Clone)]
pub enum SampledTuple {
    Exact(IncreasingTuple),
    Huge(HugeTuple),
}

/// Sample tuple number `index` of the run described by `params`:
/// deterministic in (seed, index) and independent of how samples are
/// partitioned across workers.
pub fn sample_tuple(params: &ConstructionParams, index: u64) -> Result<SampledTuple> {
    let mut rng = rng_for_sample(params.seed, index);
    match params.n {
        0 | 1 => Err(Error::Domain("arity must be >= 2".into())),
        2 => Ok(SampledTuple::Exact(build_n2_sample(&params.eps, &mut rng)?)),
        3 => Ok(SampledTuple::Exact(build_n3_sample(&params.eps, &mut rng)?)),
        4 => {
            let base = build_n3_sample(&params.eps, &mut rng)?;
            let (t4, _) = recursive_step_sample(&base, &params.eps, &mut rng)?;
            Ok(SampledTuple::Exact(t4))
        }
        5 => {
            let base = build_n3_sample(&params.eps, &mut rng)?;
            let (t4, _) = recursive_step_sample(&base, &params.eps, &mut rng)?;
            Ok(SampledTuple::Huge(recursive_step_sample_huge(
                &t4,
                &params.eps,
                &mut rng,
            )?))
        }
        _ => Err(Error::Domain(
            "values at levels n >= 6 exceed the symbolic representation; largest supported level is 5"
                .into(),
        )),
    }
}

/// Exact joint law of the construction, where enumerable (n <= 3).
pub fn exact_joint(params: &ConstructionParams) -> Result<ExactDist> {
    match params.n {
        2 => build_n2(&params.eps),
        3 => build_n3_exact(&params.eps, params.enumeration_cap),
        n if n >= 4 => {
            let atoms = "beyond enumeration at faithful parameters".to_string();
            Err(Error::Capacity {
                predicted: atoms,
                cap: params.enumeration_cap,
            })
        }
        _ => Err(Error::Domain("arity must be >= 2".into())),
    }
}

/// One exactly enumerated induction step with injectable toy parameters:
/// Y1 uniform on [1..y1_range], D_i uniform on [1..2^(d_exp(x_i))].
/// Returns the arity-(n+1) marginal law of (Y_1, .., Y_{n+1}).
pub fn recursive_step_exact<F>(
    d: &ExactDist,
    y1_range: u64,
    d_exp: F,
    enumeration_cap: u64,
) -> Result<ExactDist>
where
    F: Fn(&BigInt) -> u64,
{
    let n = d
        .arity()
        .ok_or_else(|| Error::Domain("step input must be a tuple distribution".into()))?;
    if y1_range == 0 {
        return Err(Error::Domain("y1_range must be >= 1".into()));
    }
    // predicted latent atom count
    let mut predicted = BigUint::zero();
    for (v, _) in d.iter() {
        let t = v.as_tuple().expect("tuple");
        let mut per = BigUint::from(y1_range);
        for x in t {
            per <<= d_exp(x);
        }
        predicted += per;
    }
    if predicted > BigUint::from(enumeration_cap) {
        return Err(Error::Capacity {
            predicted: predicted.to_string(),
            cap: enumeration_cap,
        });
    }

    let mut entries: Vec<(Value, Rat)> = Vec::new();
    for (v, p) in d.iter() {
        let xs = v.as_tuple().expect("tuple");
        let ranges: Vec<u64> = xs.iter().map(|x| 1u64 << d_exp(x)).collect();
        let latent_count: BigUint = ranges
            .iter()
            .fold(BigUint::from(y1_range), |acc, r| acc * BigUint::from(*r));
        let atom_p = p / Rat::from_integer(BigInt::from(latent_count));
        // enumerate y1 and all gap vectors
        let mut gaps = vec![1u64; n];
        loop {
            for y1 in 1..=y1_range {
                let mut values = Vec::with_capacity(n + 1);
                let mut acc = BigInt::from(y1);
                values.push(acc.clone());
                for g in &gaps {
                    acc += BigInt::from(*g);
                    values.push(acc.clone());
                }
                entries.push((Value::Tuple(values), atom_p.clone()));
            }
            // odometer over gap vectors
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                if gaps[i] < ranges[i] {
                    gaps[i] += 1;
                    break;
                }
                gaps[i] = 1;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    ExactDist::from_entries(entries)
}

/// The requirement-1 budget of one induction step, term by term, computed
/// exactly from the actual (possibly toy) parameters via the step's triangle
/// decomposition:
///
///   i = 1:        swap(1) + y1-shift
///   i in [2..n]:  swap(i-1) + prev-level neighbour (i-1) + swap(i)
///
/// where swap(k) = sum_x Pr(x) * tvd(U_{R_{k+1}}, U_{R_k} + U_{R_{k+1}}) and
/// the y1-shift term is sum_x Pr(x) * tvd(U_L, U_{R_1} + U_L).
pub fn step_requirement1_budget<F>(d: &ExactDist, y1_range: u64, d_exp: F) -> Result<Vec<Rat>>
where
    F: Fn(&BigInt) -> u64,
{
    use crate::exactdist::{convolve, tvd, uniform_int};
    let n = d
        .arity()
        .ok_or_else(|| Error::Domain("step input must be a tuple distribution".into()))?;

    let uniform_range = |r: u64| uniform_int(&BigInt::one(), &BigInt::from(r));
    // exact tvd(U_b, U_a + U_b) by enumeration (valid for any a, b)
    let shift_tvd = |a: u64, b: u64| -> Result<Rat> {
        let ub = uniform_range(b)?;
        let sum = convolve(&uniform_range(a)?, &ub)?;
        tvd(&ub, &sum)
    };

    let mut swap = vec![Rat::zero(); n]; // swap[k] for k in 1..n at index k-1
    let mut y1_shift = Rat::zero();
    for (v, p) in d.iter() {
        let xs = v.as_tuple().expect("tuple");
        let ranges: Vec<u64> = xs.iter().map(|x| 1u64 << d_exp(x)).collect();
        for k in 1..n {
            swap[k - 1] += p * shift_tvd(ranges[k - 1], ranges[k])?;
        }
        y1_shift += p * shift_tvd(ranges[0], y1_range)?;
    }

    let prev_neighbors: Vec<Rat> = {
        use crate::subsets::drop_index;
        let drops: Vec<ExactDist> = (1..=n)
            .map(|i| drop_index(d, i))
            .collect::<Result<_>>()?;
        (1..n)
            .map(|i| tvd(&drops[i - 1], &drops[i]))
            .collect::<Result<_>>()?
    };

    let mut budget = Vec::with_capacity(n);
    budget.push(&swap[0] + &y1_shift);
    for i in 2..=n {
        budget.push(&swap[i - 2] + &prev_neighbors[i - 2] + &swap[i - 1]);
    }
    Ok(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdist::tvd;
    use crate::rational::{rat, rat_int};
    use crate::sampling::rng_from_seed;
    use crate::subsets::{drop_index, neighboring_nm1_max_tvd};

    #[test]
    fn n2_construction_examples() {
        // eps = 1: point mass (1,2)
        let d = build_n2(&rat_int(1)).unwrap();
        assert_eq!(d.support_len(), 1);
        let x1 = drop_index(&d, 2).unwrap();
        let x2 = drop_index(&d, 1).unwrap();
        assert_eq!(tvd(&x1, &x2).unwrap(), rat_int(1));

        // eps = 1/4: X1 uniform [1..4], max value 5, tvd 1/4
        let d = build_n2(&rat(1, 4)).unwrap();
        assert_eq!(d.support_len(), 4);
        assert_eq!(d.max_scalar(), BigInt::from(5));
        assert_eq!(neighboring_nm1_max_tvd(&d).unwrap().value, rat(1, 4));

        // eps = 1/3
        let d = build_n2(&rat(1, 3)).unwrap();
        assert_eq!(neighboring_nm1_max_tvd(&d).unwrap().value, rat(1, 3));

        assert!(build_n2(&rat_int(2)).is_err());
        assert!(build_n2(&rat_int(0)).is_err());
    }

    #[test]
    fn n3_atom_counts() {
        assert_eq!(n3_atom_count(&rat_int(1)).unwrap(), BigUint::from(1024u32));
        assert_eq!(n3_atom_count(&rat(1, 2)).unwrap(), BigUint::from(28672u32));
    }

    #[test]
    fn n3_exact_eps1() {
        let d = build_n3_exact(&rat_int(1), DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(d.support_len(), 1024);
        // delta((X1,X2),(X1,X3)) = 1/4: the mass of the minimal K
        let d12 = crate::subsets::project(&d, &[1, 2]).unwrap();
        let d13 = crate::subsets::project(&d, &[1, 3]).unwrap();
        assert_eq!(tvd(&d12, &d13).unwrap(), rat(1, 4));
        // delta((X1,X2),(X2,X3)) = 15/64: the Pr(X1 <= 2^K) mass
        let d23 = crate::subsets::project(&d, &[2, 3]).unwrap();
        assert_eq!(tvd(&d12, &d23).unwrap(), rat(15, 64));
    }

    #[test]
    fn n3_exact_capacity_error() {
        let err = build_n3_exact(&rat_int(1), 100).unwrap_err();
        match err {
            Error::Capacity { predicted, cap } => {
                assert_eq!(predicted, "1024");
                assert_eq!(cap, 100);
            }
            other => panic!("expected capacity error, got {other}"),
        }
    }

    #[test]
    fn n3_sample_shape() {
        // eps = 1: X2 - X1 = X3 - X2 = 2^K with K in [4..7]
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let t = build_n3_sample(&rat_int(1), &mut rng).unwrap();
            let v = t.values();
            let g1 = &v[1] - &v[0];
            let g2 = &v[2] - &v[1];
            assert_eq!(g1, g2);
            assert!([16, 32, 64, 128].map(BigInt::from).contains(&g1));
        }
    }

    #[test]
    fn certificate_examples() {
        let c = certificate(3, &rat_int(1)).unwrap();
        assert_eq!(c.bound, Bound::Exact(BigUint::from(1010u32)));
        assert_eq!(c.spacing_threshold, rat_int(7));
        assert_eq!(c.spacing_prob_bound, rat(1, 64));
        assert_eq!(c.neighbor_bound, rat(7, 8));

        let c = certificate(4, &rat_int(1)).unwrap();
        let expected = (BigUint::one() << 1024u32) - BigUint::from(18u32);
        assert_eq!(c.bound, Bound::Exact(expected));
        assert_eq!(c.neighbor_bound, rat(15, 16));

        let c = certificate(3, &rat(1, 2)).unwrap();
        let expected = (BigUint::one() << 14u32) - BigUint::from(16u32);
        assert_eq!(c.bound, Bound::Exact(expected));
        assert_eq!(c.spacing_threshold, rat_int(8));
        assert_eq!(c.spacing_prob_bound, rat(1, 128));

        // n = 5: only the exponent is representable
        let c = certificate(5, &rat_int(1)).unwrap();
        match c.bound {
            Bound::PowMinus { exponent, minus } => {
                assert_eq!(exponent, BigUint::one() << 1024u32);
                assert_eq!(minus, BigUint::from(22u32));
            }
            other => panic!("expected symbolic bound, got {other:?}"),
        }

        // non-dyadic eps normalizes down
        let c = certificate(3, &rat(1, 3)).unwrap();
        assert_eq!(c.eps, rat(1, 4));
        assert_eq!(c.t, 2);

        assert!(certificate(2, &rat_int(1)).is_err());
    }

    #[test]
    fn step_3_to_4_golden() {
        let mut rng = rng_from_seed(42);
        let base = build_n3_sample(&rat_int(1), &mut rng).unwrap();
        let (t4, trace) = recursive_step_sample(&base, &rat_int(1), &mut rng).unwrap();
        assert_eq!(t4.arity(), 4);
        // every gap is >= 2^(X1 + 12) only when the draw is large; what is
        // guaranteed is D_i >= 1 and the level-4 ceiling
        let cert = certificate(4, &rat_int(1)).unwrap();
        let top = t4.values().last().unwrap().to_biguint().unwrap();
        assert!(cert.bound.ge_biguint(&top));
        for d in &trace.d_values {
            assert!(*d >= BigInt::one());
        }
        // deterministic replay
        let mut rng2 = rng_from_seed(42);
        let base2 = build_n3_sample(&rat_int(1), &mut rng2).unwrap();
        let (t4b, _) = recursive_step_sample(&base2, &rat_int(1), &mut rng2).unwrap();
        assert_eq!(t4.values(), t4b.values());
    }

    #[test]
    fn sample_tuple_levels() {
        for n in 2..=4u32 {
            let params = ConstructionParams::new(n, rat_int(1), Mode::Sample, 7);
            match sample_tuple(&params, 0).unwrap() {
                SampledTuple::Exact(t) => assert_eq!(t.arity(), n as usize),
                SampledTuple::Huge(_) => panic!("exact expected at n={n}"),
            }
        }
        let params = ConstructionParams::new(5, rat_int(1), Mode::Sample, 7);
        match sample_tuple(&params, 0).unwrap() {
            SampledTuple::Huge(h) => {
                assert_eq!(h.arity(), 5);
                let cert = certificate(5, &rat_int(1)).unwrap();
                assert!(h.within_bound(&cert.bound));
                for i in 0..4 {
                    assert!(!h.gap_below(i, &BigUint::from(10u32)));
                }
            }
            SampledTuple::Exact(_) => panic!("symbolic expected at n=5"),
        }
        assert!(sample_tuple(&ConstructionParams::new(6, rat_int(1), Mode::Sample, 7), 0).is_err());
    }

    #[test]
    fn sample_tuple_deterministic_per_index() {
        let params = ConstructionParams::new(4, rat(1, 2), Mode::Sample, 11);
        let a = sample_tuple(&params, 3).unwrap();
        let b = sample_tuple(&params, 3).unwrap();
        match (a, b) {
            (SampledTuple::Exact(x), SampledTuple::Exact(y)) => assert_eq!(x.values(), y.values()),
            _ => panic!("exact expected"),
        }
    }

    #[test]
    fn exact_joint_dispatch() {
        let p = ConstructionParams::new(2, rat(1, 2), Mode::Exact, 0);
        assert_eq!(exact_joint(&p).unwrap().support_len(), 2);
        let p = ConstructionParams::new(4, rat_int(1), Mode::Exact, 0);
        assert!(matches!(exact_joint(&p), Err(Error::Capacity { .. })));
    }

    #[test]
    fn toy_step_enumeration_mass() {
        let base = build_n3_toy(2, 1, 2).unwrap(); // 4 atoms
        let stepped = recursive_step_exact(&base, 2, |x| x.to_u64().unwrap().min(3), 1 << 20)
            .unwrap();
        assert_eq!(stepped.arity(), Some(4));
        // mass sums to one by construction of ExactDist; check support sanity
        for (v, _) in stepped.iter() {
            let t = v.as_tuple().unwrap();
            for w in t.windows(2) {
                assert!(w[1] > w[0]);
            }
        }
    }
}
