//! Exact-to-float bridges.
//!
//! Sizes of curves grow exponentially along orbits, far past `f64` range, so
//! everything upstream stays in big integers and rationals. Logarithms are the
//! only lossy step: they are taken here, once, from the exact value.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Natural log of a positive big integer, accurate to a few ulps regardless of
/// magnitude. The top 53 bits carry the mantissa; the rest contributes through
/// the exponent term.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top: BigUint = x >> shift;
    top.to_f64().expect("53 bits fit in f64").ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of the absolute value of a big integer.
pub fn ln_bigint_abs(x: &BigInt) -> f64 {
    ln_biguint(x.magnitude())
}

/// Natural log of a positive rational.
pub fn ln_bigrational(x: &BigRational) -> f64 {
    debug_assert!(x.is_positive(), "log of non-positive rational");
    ln_bigint_abs(x.numer()) - ln_bigint_abs(x.denom())
}

/// Lossy conversion of a rational to f64; saturates to +/-inf far outside
/// range instead of panicking.
pub fn bigrational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let ln = ln_bigrational(&x.abs());
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    if ln > 700.0 {
        return sign * f64::INFINITY;
    }
    if ln < -700.0 {
        return 0.0;
    }
    // Within range the direct route is exact to 1 ulp.
    let num = x.numer();
    let den = x.denom();
    match (num.to_f64(), den.to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => sign * ln.exp(),
    }
}

/// Parses an integer or `a/b` rational literal, e.g. `"3"` or `"-3/2"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::input(format!("malformed rational literal: {s:?}")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(Error::input(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse_int(num)?, den))
        }
    }
}

/// Renders a rational as an integer when possible, else `a/b`.
pub fn rational_to_string(x: &BigRational) -> String {
    if x.denom() == &BigInt::from(1) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn bigint_from_i64(v: i64) -> BigInt {
    BigInt::from(v)
}

/// True when the integer is non-negative.
pub fn is_nonneg(x: &BigInt) -> bool {
    x.sign() != Sign::Minus
}
