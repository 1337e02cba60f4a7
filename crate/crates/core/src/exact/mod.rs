//! Exact arithmetic over the Gaussian rationals ℚ(i).
//!
//! Rational and exponential-polynomial bodies keep their coefficients here so
//! that derivatives, products and minors are formed without rounding. Floating
//! point only enters at evaluation time.

mod exppoly;
mod linalg;
mod poly;

pub use exppoly::ExpPoly;
pub use linalg::{exact_rank, float_rank};
pub use poly::Poly;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// A Gaussian rational a + b·i with a, b ∈ ℚ.
pub type Gq = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn gq(re: i64, im: i64) -> Gq {
    Complex::new(rat(re, 1), rat(im, 1))
}

pub fn gq_ratio(re: BigRational, im: BigRational) -> Gq {
    Complex::new(re, im)
}

pub fn gq_zero() -> Gq {
    Complex::new(BigRational::zero(), BigRational::zero())
}

pub fn gq_one() -> Gq {
    Complex::new(BigRational::one(), BigRational::zero())
}

/// Exact conversion: every finite double is a dyadic rational.
pub fn gq_from_c64(c: Complex64) -> Gq {
    let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    Complex::new(conv(c.re), conv(c.im))
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large numerators and denominators: fall back to a ratio of
        // truncated big integers.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn gq_to_c64(c: &Gq) -> Complex64 {
    Complex64::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
}

pub fn gq_is_zero(c: &Gq) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Parses `a+bi`, `a-bi`, `bi`, `a` with rational parts like `-1/4` or decimals.
pub fn parse_gq(s: &str) -> Option<Gq> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not the leading one and not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re, im) = match split {
            Some(idx) => (Some(&body[..idx]), &body[idx..]),
            None => (None, body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        let re = match re {
            Some(r) => parse_rational(r)?,
            None => BigRational::zero(),
        };
        Some(Complex::new(re, im))
    } else {
        Some(Complex::new(parse_rational(&s)?, BigRational::zero()))
    }
}

/// Parses `p/q`, integers and finite decimals exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let x: f64 = s.parse().ok()?;
    if !x.is_finite() {
        return None;
    }
    // Decimal literal: reconstruct exactly from its digits when possible.
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if !frac_part.contains(['e', 'E']) && frac_part.chars().all(|c| c.is_ascii_digit()) {
            let neg = int_part.starts_with('-');
            let digits = format!("{}{}", int_part.trim_start_matches('-'), frac_part);
            let n: BigInt = digits.parse().ok()?;
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            let r = BigRational::new(n, d);
            return Some(if neg { -r } else { r });
        }
    }
    BigRational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_gq("1+2i"), Some(gq(1, 2)));
        assert_eq!(parse_gq("-1/4"), Some(Complex::new(rat(-1, 4), rat(0, 1))));
        assert_eq!(parse_gq("i"), Some(gq(0, 1)));
        assert_eq!(parse_gq("-i"), Some(gq(0, -1)));
        assert_eq!(parse_gq("0.5-0.25i"), Some(Complex::new(rat(1, 2), rat(-1, 4))));
        assert_eq!(parse_gq("3"), Some(gq(3, 0)));
        assert!(parse_gq("abc").is_none());
    }

    #[test]
    fn float_round_trip_is_exact() {
        let z = Complex64::new(0.1, -3.75);
        assert_eq!(gq_to_c64(&gq_from_c64(z)), z);
    }
}
