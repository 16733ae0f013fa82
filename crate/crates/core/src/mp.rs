//! Multiprecision scalar helpers on top of MPFR (`rug`).
//!
//! Every value carries its own precision; helpers take the working
//! precision explicitly so that intermediate results never silently drop
//! to a lower precision.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 212;

/// Number of decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> u32 {
    (f64::from(prec) * std::f64::consts::LOG10_2).floor() as u32
}

/// `10^(-d/2)` where `d` is the decimal precision of `prec` bits.
pub fn half_precision_tol(prec: u32) -> Float {
    let d = decimal_digits(prec) / 2;
    let ten = Float::with_val(prec, 10);
    Float::with_val(prec, ten.pow(-(d as i32)))
}

/// `2^(-e)` at precision `prec`.
pub fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, Float::with_val(prec, 1) << e)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn czero(prec: u32) -> Complex {
    Complex::new(prec)
}

pub fn cone(prec: u32) -> Complex {
    Complex::with_val(prec, 1)
}

/// `|z|`.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// `|z|^2`.
pub fn cnorm(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.norm_ref())
}

/// Parse a real number given as an integer, a rational `p/q`, or a decimal
/// (scientific notation allowed).
pub fn parse_real(prec: u32, s: &str) -> Result<Float> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if s.contains('/') {
        let r: Rational = s
            .parse()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
        return Ok(Float::with_val(prec, &r));
    }
    if let Ok(i) = s.parse::<Integer>() {
        return Ok(Float::with_val(prec, &i));
    }
    let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Decimal string with `digits` significant digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    x.to_string_radix(10, Some(digits))
}

/// Round to nearest integer, ties to even.
pub fn round_half_even(x: &Float) -> Integer {
    let mut y = x.clone();
    y.round_even_mut();
    y.to_integer().expect("finite value")
}

/// Fix the precision of a value (rounding if it shrinks).
pub fn at_prec(x: &Float, prec: u32) -> Float {
    Float::with_val(prec, x)
}

pub fn cat_prec(z: &Complex, prec: u32) -> Complex {
    Complex::with_val(prec, z)
}

/// Principal `k`-th root of a complex number.
pub fn croot(z: &Complex, k: u32) -> Complex {
    let prec = z.prec().0;
    if z.is_zero() {
        return czero(prec);
    }
    let l = Complex::with_val(prec, z.ln_ref());
    let l = l / k;
    l.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_number_shapes() {
        let p = 128;
        assert_eq!(parse_real(p, "3").unwrap(), 3);
        assert_eq!(parse_real(p, "-3/4").unwrap(), -0.75);
        assert_eq!(parse_real(p, "1.5e2").unwrap(), 150);
        assert!(parse_real(p, "abc").is_err());
        assert!(parse_real(p, "").is_err());
    }

    #[test]
    fn tolerance_tracks_precision() {
        assert_eq!(decimal_digits(212), 63);
        let t = half_precision_tol(212);
        let expect = Float::with_val(212, 1e-31);
        assert!((t / expect - 1u32).abs() < 1e-12);
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round_half_even(&Float::with_val(64, 2.5)), 2);
        assert_eq!(round_half_even(&Float::with_val(64, 3.5)), 4);
        assert_eq!(round_half_even(&Float::with_val(64, -0.5)), 0);
    }
}
