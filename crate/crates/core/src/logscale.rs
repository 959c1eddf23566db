//! Signed real numbers stored as `(sign, ln|x|)`.
//!
//! Partition-function products over thousands of modes overflow `f64` long
//! before they become interesting, so every product in this crate is
//! accumulated as a sum of logarithms with the sign carried separately.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A real number `sign * exp(log_magnitude)`.
///
/// `sign == 0` means the value is exactly zero and `log_magnitude` is ignored
/// (it is normalised to `-inf`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScaledReal {
    sign: i8,
    log_magnitude: f64,
}

impl LogScaledReal {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        log_magnitude: 0.0,
    };

    /// Builds a value from its parts. A non-positive-infinite log with a
    /// nonzero sign is allowed and means "underflowed to zero".
    pub fn from_parts(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_parts(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// `exp(log)`, always positive.
    pub fn from_ln(log: f64) -> Self {
        Self::from_parts(1, log)
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of `|x|`; `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// True when the magnitude is NaN or `+inf`.
    pub fn is_overflowed(self) -> bool {
        self.sign != 0 && !self.log_magnitude.is_finite()
    }

    /// Descales to a plain `f64` (may overflow to `inf` or underflow to 0).
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn abs(self) -> Self {
        Self::from_parts(self.sign.abs(), self.log_magnitude)
    }

    /// Multiplies by `2^k` exactly in log space.
    pub fn scale_pow2(self, k: i32) -> Self {
        if self.sign == 0 {
            self
        } else {
            Self::from_parts(
                self.sign,
                self.log_magnitude + f64::from(k) * std::f64::consts::LN_2,
            )
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero LogScaledReal");
        Self::from_parts(self.sign, -self.log_magnitude)
    }

    /// Signed sum of several terms, anchored at the largest magnitude.
    pub fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let terms: Vec<Self> = terms.into_iter().filter(|t| t.sign != 0).collect();
        let Some(anchor) = terms
            .iter()
            .map(|t| t.log_magnitude)
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        else {
            return Self::ZERO;
        };
        if !anchor.is_finite() {
            return Self::from_parts(1, anchor);
        }
        let scaled: f64 = terms
            .iter()
            .map(|t| f64::from(t.sign) * (t.log_magnitude - anchor).exp())
            .sum();
        let mut out = Self::from_f64(scaled);
        if out.sign != 0 {
            out.log_magnitude += anchor;
        }
        out
    }

    /// Ratio `self / other` as a plain float.
    pub fn ratio(self, other: Self) -> f64 {
        (self / other).to_f64()
    }
}

impl From<f64> for LogScaledReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for LogScaledReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_parts(-self.sign, self.log_magnitude)
    }
}

impl Mul for LogScaledReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        Self::from_parts(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Div for LogScaledReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Add for LogScaledReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::sum([self, rhs])
    }
}

impl Sub for LogScaledReal {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::sum([self, -rhs])
    }
}

impl fmt::Display for LogScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_magnitude),
            _ => write!(f, "-exp({})", self.log_magnitude),
        }
    }
}

/// `ln(2 cosh x)`, accurate for all finite `x`.
pub(crate) fn ln_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `ln|2 sinh x|`; `-inf` at `x = 0`.
pub(crate) fn ln_abs_2sinh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        (2.0 * a.sinh()).ln()
    } else {
        a + (-(-2.0 * a).exp()).ln_1p()
    }
}

/// `ln|tanh x|`, accurate both near zero and for large `|x|`.
pub(crate) fn ln_abs_tanh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        a.tanh().ln()
    } else {
        let e = (-2.0 * a).exp();
        (-e).ln_1p() - e.ln_1p()
    }
}

/// `ln(-ln|tanh x|)`; stays finite for arguments where `tanh x` rounds to 1.
pub(crate) fn ln_neg_ln_tanh(x: f64) -> f64 {
    let a = x.abs();
    if a < 15.0 {
        (-ln_abs_tanh(a)).ln()
    } else {
        // -ln tanh a = 2e^{-2a}(1 + e^{-4a}/3 + ...)
        std::f64::consts::LN_2 - 2.0 * a
    }
}

/// `ln Σ exp(x_i)`; `-inf` for an empty input.
pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
