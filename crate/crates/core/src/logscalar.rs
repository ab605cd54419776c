//! Signed reals stored as `sign · exp(log_mag)`.
//!
//! The majorant families carry slopes such as `e^{2^n}` and widths such as
//! `2^n e^{-2^n}` that leave the double range long before the interesting
//! indices are reached. Products of such numbers are sums of logs; sums use
//! the log-sum-exp rule.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Largest `|log_mag|` for which conversion to `f64` is considered lossless.
pub const F64_SAFE_LOG: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    pub sign: i8,
    /// Natural log of the magnitude. Meaningless when `sign == 0`.
    pub log_mag: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: LogScalar = LogScalar { sign: 1, log_mag: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogScalar { sign: if x > 0.0 { 1 } else { -1 }, log_mag: x.abs().ln() }
        }
    }

    /// `sign · e^{log_mag}`.
    pub fn from_log(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar { sign: sign.signum(), log_mag }
        }
    }

    /// `e^{x}` for positive results whose exponent may be huge.
    pub fn exp(x: f64) -> Self {
        Self::from_log(1, x)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// Converts to `f64`; saturates to `±inf` or `±0` outside the double range.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_mag.exp(),
        }
    }

    /// `Some(value)` when the value is representable without overflow or underflow.
    pub fn try_f64(&self) -> Option<f64> {
        if self.sign == 0 {
            return Some(0.0);
        }
        let v = self.to_f64();
        (v.is_finite() && v != 0.0).then_some(v)
    }

    pub fn abs(&self) -> Self {
        LogScalar { sign: self.sign.abs(), log_mag: self.log_mag }
    }

    /// Real power of a nonnegative value.
    pub fn powf(&self, p: f64) -> Self {
        match self.sign {
            0 if p > 0.0 => Self::ZERO,
            0 => Self::ONE,
            1 => Self::from_log(1, self.log_mag * p),
            _ => panic!("powf of a negative LogScalar"),
        }
    }

    pub fn recip(&self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        LogScalar { sign: self.sign, log_mag: -self.log_mag }
    }

    /// Natural log of a positive value, as a plain double.
    pub fn ln(&self) -> f64 {
        assert!(self.sign > 0, "ln of a nonpositive LogScalar");
        self.log_mag
    }

    pub fn sum<I: IntoIterator<Item = LogScalar>>(items: I) -> Self {
        items.into_iter().fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl Default for LogScalar {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for LogScalar {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: LogScalar) -> LogScalar {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogScalar { sign: self.sign * rhs.sign, log_mag: self.log_mag + rhs.log_mag }
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: LogScalar) -> LogScalar {
        self * rhs.recip()
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> LogScalar {
        LogScalar { sign: -self.sign, log_mag: self.log_mag }
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: LogScalar) -> LogScalar {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag { (self, rhs) } else { (rhs, self) };
        let d = small.log_mag - big.log_mag;
        if big.sign == small.sign {
            LogScalar { sign: big.sign, log_mag: big.log_mag + d.exp().ln_1p() }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogScalar { sign: big.sign, log_mag: big.log_mag + (-d.exp()).ln_1p() }
        }
    }
}

impl Sub for LogScalar {
    type Output = LogScalar;
    fn sub(self, rhs: LogScalar) -> LogScalar {
        self + (-rhs)
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let key = |x: &LogScalar| -> (i8, f64) {
            match x.sign {
                0 => (0, 0.0),
                1 => (1, x.log_mag),
                _ => (-1, -x.log_mag),
            }
        };
        let (sa, ma) = key(self);
        let (sb, mb) = key(other);
        match sa.cmp(&sb) {
            Ordering::Equal => ma.partial_cmp(&mb),
            o => Some(o),
        }
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.try_f64() {
            Some(v) if self.log_mag.abs() < F64_SAFE_LOG => write!(f, "{v}"),
            _ => {
                let s = if self.sign < 0 { "-" } else { "" };
                write!(f, "{s}exp({})", self.log_mag)
            }
        }
    }
}

/// `ln(Σ e^{x_i})` with the shift-by-max rule. Empty input gives `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + values.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}


/// `mant · e^{exp}` with the exponent kept apart from the mantissa, so that
/// products whose exponents cancel (`e^{2^n} · e^{-2^n}`) stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mant: f64,
    pub exp: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: 0.0, exp: 0.0 };

    pub fn new(mant: f64, exp: f64) -> Self {
        Scaled { mant, exp }
    }

    pub fn plain(x: f64) -> Self {
        Scaled { mant: x, exp: 0.0 }
    }

    /// `x^p` stored as `e^{p ln x}`.
    pub fn power(x: f64, p: f64) -> Self {
        Scaled { mant: 1.0, exp: p * x.ln() }
    }

    pub fn powf(self, p: f64) -> Self {
        Scaled { mant: self.mant.powf(p), exp: self.exp * p }
    }

    pub fn recip(self) -> Self {
        Scaled { mant: 1.0 / self.mant, exp: -self.exp }
    }

    pub fn to_f64(self) -> f64 {
        if self.exp == 0.0 {
            self.mant
        } else {
            self.mant * self.exp.exp()
        }
    }

    pub fn to_log(self) -> LogScalar {
        LogScalar::from_f64(self.mant) * LogScalar::exp(self.exp)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled { mant: self.mant * rhs.mant, exp: self.exp + rhs.exp }
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, rhs: Scaled) -> Scaled {
        Scaled { mant: self.mant / rhs.mant, exp: self.exp - rhs.exp }
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, rhs: Scaled) -> Scaled {
        if self.mant == 0.0 {
            return rhs;
        }
        if rhs.mant == 0.0 {
            return self;
        }
        if self.exp == rhs.exp {
            return Scaled { mant: self.mant + rhs.mant, exp: self.exp };
        }
        let (hi, lo) = if self.exp > rhs.exp { (self, rhs) } else { (rhs, self) };
        Scaled { mant: hi.mant + lo.mant * (lo.exp - hi.exp).exp(), exp: hi.exp }
    }
}
