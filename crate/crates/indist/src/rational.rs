//! Exact rational helpers: parsing, formatting, dyadic normalization.
//!
//! All probabilities and distances in this crate are `BigRational`s kept in
//! lowest terms with a positive denominator (num-rational canonicalizes on
//! construction, so equality is structural).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse "P/Q", "±digits", or a terminating decimal ("0.25" -> 1/4).
/// Binary floats are never accepted.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {num:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {den:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.contains(['+', '-']) || frac_part.is_empty() {
            return Err(Error::Parse(format!("malformed decimal {text:?}")));
        }
        let negative = int_part.starts_with('-');
        let int_digits = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            "0".to_string()
        } else {
            int_part.trim_start_matches(['+', '-']).to_string()
        };
        let i: BigInt = int_digits
            .parse()
            .map_err(|_| Error::Parse(format!("malformed decimal {text:?}")))?;
        let f: BigInt = frac_part
            .parse()
            .map_err(|_| Error::Parse(format!("malformed decimal {text:?}")))?;
        if f.is_negative() {
            return Err(Error::Parse(format!("malformed decimal {text:?}")));
        }
        let scale = BigInt::from(10u8).pow(frac_part.len() as u32);
        let mut value = Rat::from_integer(i) + Rat::new(f, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = text
        .parse()
        .map_err(|_| Error::Parse(format!("malformed rational {text:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Format as "numer/denom" (denominator printed even when 1, so files are
/// uniform and re-parse unambiguously).
pub fn format_rational(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Is `r` of the form 2^(-t) for an integer t >= 0 (1 counts, t = 0)?
pub fn dyadic_exponent(r: &Rat) -> Option<u64> {
    if !r.is_positive() || r > &Rat::one() {
        return None;
    }
    if !r.numer().is_one() {
        return None;
    }
    let den = r.denom().to_biguint().expect("canonical denom is positive");
    let bits = den.bits();
    if den == BigUint::one() << (bits - 1) {
        Some(bits - 1)
    } else {
        None
    }
}

/// Round a requested epsilon in (0,1] DOWN to the nearest power of two
/// 2^(-t). Returns (normalized epsilon, t). Already-dyadic values pass
/// through unchanged.
pub fn normalize_dyadic(eps: &Rat) -> Result<(Rat, u64)> {
    if !eps.is_positive() || eps > &Rat::one() {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0,1], got {}",
            format_rational(eps)
        )));
    }
    if let Some(t) = dyadic_exponent(eps) {
        return Ok((eps.clone(), t));
    }
    // Smallest t with 2^(-t) <= eps.
    let mut t = 0u64;
    let mut pow = Rat::one();
    let half = rat(1, 2);
    while &pow > eps {
        pow *= &half;
        t += 1;
    }
    Ok((pow, t))
}

/// ceil(1/eps) for eps in (0,1].
pub fn ceil_inverse(eps: &Rat) -> Result<BigUint> {
    if !eps.is_positive() {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let inv = eps.recip();
    let c = inv.ceil().to_integer();
    c.to_biguint()
        .ok_or_else(|| Error::Domain("ceil(1/eps) not positive".into()))
}
