//! Exact scalar arithmetic: arbitrary-precision rationals and Gaussian rationals.
//!
//! Every quantity the engine computes is a Gaussian rational `re + im·i`
//! (both parts arbitrary-precision rationals); nothing is ever rounded.
//! Floating point appears only in the matrix oracle and in the numeric
//! convenience fields of reports, where π is substituted at the last step.
//!
//! Canonical string forms (used in input and report files):
//!
//! * real rationals: `p` or `p/q` with an optional leading minus,
//!   e.g. `3`, `-1/2`;
//! * Gaussian rationals: `re`, `imi`, or `re±imi`,
//!   e.g. `3/2`, `-1/2i`, `2-3/4i`, `0`.
//!
//! The formatter always emits the canonical form (real part omitted when
//! zero, `+`/`-` separating a nonzero imaginary part, denominator omitted
//! when 1) and the parser accepts exactly that grammar, so values round-trip
//! byte-for-byte.

use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

/// Exact real rational scalar.
pub type Rat = BigRational;

/// Error produced when a rational or Gaussian-rational string is malformed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational `{input}`: {reason}")]
pub struct ScalarParseError {
    /// The offending input string.
    pub input: String,
    /// What was wrong with it.
    pub reason: String,
}

impl ScalarParseError {
    fn new(input: &str, reason: impl Into<String>) -> Self {
        ScalarParseError {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// Build a rational from an integer numerator and denominator.
///
/// # Panics
///
/// Panics if `den == 0`; this constructor is for literals in code, not input.
pub fn ratio(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator in rational literal");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Build a rational from an integer.
pub fn int(value: i64) -> Rat {
    Rat::from_integer(BigInt::from(value))
}

/// Parse a real rational from the canonical `p` / `p/q` form.
///
/// Strict: no whitespace, no leading `+`, no empty parts, nonzero denominator.
pub fn parse_rat(s: &str) -> Result<Rat, ScalarParseError> {
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer = parse_bigint(s, num_str)?;
    let denom = match den_str {
        Some(d) => {
            let d = parse_bigint(s, d)?;
            if d.is_negative() || d.is_zero() {
                return Err(ScalarParseError::new(s, "denominator must be positive"));
            }
            d
        }
        None => BigInt::one(),
    };
    Ok(Rat::new(numer, denom))
}

fn parse_bigint(whole: &str, part: &str) -> Result<BigInt, ScalarParseError> {
    if part.is_empty() {
        return Err(ScalarParseError::new(whole, "empty integer part"));
    }
    let digits = part.strip_prefix('-').unwrap_or(part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ScalarParseError::new(
            whole,
            format!("`{part}` is not an integer"),
        ));
    }
    BigInt::from_str(part).map_err(|e| ScalarParseError::new(whole, e.to_string()))
}

/// Format a real rational in canonical form (`p` or `p/q`).
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Lossy conversion to `f64` for the numeric report fields.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

/// Gaussian rational `re + im·i`, the scalar field of the Clifford algebra.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    /// Real part.
    pub re: Rat,
    /// Imaginary part (coefficient of `i = √-1`).
    pub im: Rat,
}

impl GaussRat {
    /// `re + im·i`.
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    /// Additive identity.
    pub fn zero() -> Self {
        GaussRat::new(Rat::zero(), Rat::zero())
    }

    /// Multiplicative identity.
    pub fn one() -> Self {
        GaussRat::new(Rat::one(), Rat::zero())
    }

    /// The imaginary unit `i`.
    pub fn i() -> Self {
        GaussRat::new(Rat::zero(), Rat::one())
    }

    /// Embed an integer.
    pub fn int(value: i64) -> Self {
        GaussRat::from_rat(int(value))
    }

    /// Embed `num/den`.
    ///
    /// # Panics
    ///
    /// Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        GaussRat::from_rat(ratio(num, den))
    }

    /// Embed a real rational.
    pub fn from_rat(re: Rat) -> Self {
        GaussRat::new(re, Rat::zero())
    }

    /// True when both parts vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True when the imaginary part vanishes.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Reference-based product (avoids cloning at call sites).
    pub fn times(&self, other: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    /// Scale by a real rational.
    pub fn scale(&self, factor: &Rat) -> GaussRat {
        GaussRat::new(&self.re * factor, &self.im * factor)
    }

    /// Multiply by the imaginary unit.
    pub fn times_i(&self) -> GaussRat {
        GaussRat::new(-self.im.clone(), self.re.clone())
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    ///
    /// Panics when the value is zero.
    pub fn inv(&self) -> GaussRat {
        let norm = &self.re * &self.re + &self.im * &self.im;
        assert!(!norm.is_zero(), "inverse of zero");
        GaussRat::new(&self.re / &norm, -(&self.im / &norm))
    }

    /// Integer power; negative exponents invert (`0` raised to a negative
    /// power panics via [`GaussRat::inv`]).
    pub fn pow(&self, exp: i64) -> GaussRat {
        let base = if exp < 0 { self.inv() } else { self.clone() };
        let mut acc = GaussRat::one();
        for _ in 0..exp.unsigned_abs() {
            acc = acc.times(&base);
        }
        acc
    }

    /// Both parts as `f64` (for numeric report fields only).
    pub fn to_f64_parts(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Canonical string form (see module docs).
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// Parse the canonical string form.
    pub fn parse(s: &str) -> Result<Self, ScalarParseError> {
        s.parse()
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for GaussRat {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(body) = s.strip_suffix('i') else {
            // No trailing `i`: purely real.
            return Ok(GaussRat::from_rat(parse_rat(s)?));
        };
        // Find the sign separating real and imaginary parts. Inside a single
        // rational a `-` can only appear at position 0, so any sign at a
        // later position is the separator.
        let sep = body
            .char_indices()
            .skip(1)
            .find(|(_, c)| *c == '+' || *c == '-')
            .map(|(idx, _)| idx);
        match sep {
            Some(idx) => {
                let re = parse_rat(&body[..idx])
                    .map_err(|e| ScalarParseError::new(s, e.reason))?;
                let im_str = &body[idx..];
                let im_str = im_str.strip_prefix('+').unwrap_or(im_str);
                let im = parse_rat(im_str).map_err(|e| ScalarParseError::new(s, e.reason))?;
                Ok(GaussRat::new(re, im))
            }
            None => {
                if body.is_empty() {
                    return Err(ScalarParseError::new(s, "bare `i` is not canonical; use `1i`"));
                }
                let im = parse_rat(body).map_err(|e| ScalarParseError::new(s, e.reason))?;
                Ok(GaussRat::new(Rat::zero(), im))
            }
        }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        GaussRat::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for GaussRat {
    fn add_assign(&mut self, rhs: GaussRat) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        GaussRat::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        self.times(&rhs)
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl From<i64> for GaussRat {
    fn from(value: i64) -> Self {
        GaussRat::int(value)
    }
}

/// `2^m` as a rational (the fibre trace of the identity on spinors).
pub fn two_pow(m: u32) -> Rat {
    Rat::from_integer(BigInt::from(2u8).pow(m))
}

/// `(-1)^k` as a rational.
pub fn sign_pow(k: u32) -> Rat {
    if k % 2 == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// Factorial as a rational (small arguments only).
pub fn factorial(k: u32) -> Rat {
    let mut acc = BigInt::one();
    for j in 2..=k as u64 {
        acc *= BigInt::from_u64(j).unwrap();
    }
    Rat::from_integer(acc)
}

/// Double factorial `k!! = k(k-2)(k-4)…` with `0!! = (-1)!! = 1`.
pub fn double_factorial(k: i64) -> Rat {
    let mut acc = BigInt::one();
    let mut j = k;
    while j > 1 {
        acc *= BigInt::from(j);
        j -= 2;
    }
    Rat::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_round_trip() {
        for s in ["0", "1", "-1", "3/2", "-7/3", "4115/226"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        // Unreduced input is accepted and comes back in lowest terms.
        assert_eq!(format_rat(&parse_rat("12345/678").unwrap()), "4115/226");
        assert_eq!(format_rat(&parse_rat("4/2").unwrap()), "2");
    }

    #[test]
    fn rational_parser_rejects_junk() {
        for s in ["", "1/0", "1/-2", "+3", " 1", "1 ", "a", "1/2/3", "1.5"] {
            assert!(parse_rat(s).is_err(), "expected rejection of {s:?}");
        }
    }

    #[test]
    fn gaussian_strings_round_trip() {
        for s in ["0", "3/2", "-1/2i", "2-3/4i", "1i", "-1i", "5+1i", "-2/7-9i"] {
            let g = GaussRat::parse(s).unwrap();
            assert_eq!(g.canonical(), s, "round trip of {s:?}");
        }
    }

    #[test]
    fn gaussian_parser_rejects_junk() {
        for s in ["i", "+1i", "1+ i", "1i+2", "1..2i", ""] {
            assert!(GaussRat::parse(s).is_err(), "expected rejection of {s:?}");
        }
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let i = GaussRat::i();
        assert_eq!(i.clone() * i, GaussRat::int(-1));
    }

    #[test]
    fn inverse_and_powers_agree() {
        let z = GaussRat::new(ratio(2, 3), ratio(-1, 5));
        assert_eq!(z.times(&z.inv()), GaussRat::one());
        assert_eq!(z.pow(3), z.times(&z).times(&z));
        assert_eq!(z.pow(-2), z.times(&z).inv());
        assert_eq!(z.pow(0), GaussRat::one());
        assert_eq!(GaussRat::i().pow(2), GaussRat::int(-1));
    }

    #[test]
    fn double_factorial_small_values() {
        assert_eq!(double_factorial(-1), int(1));
        assert_eq!(double_factorial(0), int(1));
        assert_eq!(double_factorial(1), int(1));
        assert_eq!(double_factorial(3), int(3));
        assert_eq!(double_factorial(5), int(15));
        assert_eq!(double_factorial(6), int(48));
    }
}
