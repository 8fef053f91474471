//! Scalar kinds: exact rationals for identity checks, binary64 for smooth data.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used throughout the identity checks.
pub type Rat = BigRational;

/// Field operations shared by the exact and floating-point paths.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and zero tests carry no tolerance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rat(q: &Rat) -> Self;
    fn to_f64(&self) -> f64;

    /// Zero test relative to a magnitude `scale` (exact kinds ignore it).
    fn negligible(&self, scale: f64) -> bool;

    /// Pivot preference: larger is better.
    fn pivot_score(&self) -> f64;

    /// Square root when it is representable in this scalar kind.
    fn sqrt_exact(&self) -> Option<Self>;

    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Text form used in serialized output.
    fn repr(&self) -> String;
}

/// Relative tolerance of the floating-point path.
pub const FLOAT_TOL: f64 = 1e-11;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rat(q: &Rat) -> Self {
        rat_to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_TOL * scale.max(f64::MIN_POSITIVE)
    }

    fn pivot_score(&self) -> f64 {
        self.abs()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn repr(&self) -> String {
        format!("{self:e}")
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn from_rat(q: &Rat) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn pivot_score(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Prefer short numerators and denominators to limit coefficient growth.
        let bits = self.numer().bits() + self.denom().bits();
        1.0 / (1.0 + bits as f64)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rat::new(n, d))
    }

    fn repr(&self) -> String {
        self.to_string()
    }
}

/// Converts a rational to the nearest binary64 value.
pub fn rat_to_f64(q: &Rat) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Rescale very long numbers before dividing.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact rational value of a finite binary64 number.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// `(-1)^e` as a scalar.
pub fn sign_pow<S: Scalar>(e: usize) -> S {
    if e.is_multiple_of(2) {
        S::one()
    } else {
        -S::one()
    }
}

/// Applies an integer sign to a scalar.
pub fn signed<S: Scalar>(sign: i32, v: S) -> S {
    if sign < 0 {
        -v
    } else {
        v
    }
}

/// Largest absolute value in a slice, used as a magnitude for float zero tests.
pub fn max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
}

pub fn is_one<S: Scalar>(v: &S) -> bool {
    v.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_roots() {
        assert_eq!(rat(9, 4).sqrt_exact(), Some(rat(3, 2)));
        assert_eq!(rint(2).sqrt_exact(), None);
        assert_eq!(rat(-1, 4).sqrt_exact(), None);
    }

    #[test]
    fn conversion_round_trip() {
        let q = rat(1, 3);
        assert!((rat_to_f64(&q) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(rat_from_f64(0.5), Some(rat(1, 2)));
    }
}
