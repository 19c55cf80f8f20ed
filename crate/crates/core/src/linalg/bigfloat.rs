//! Binary floating point with a configurable mantissa width.
//!
//! A value is `mantissa * 2^exponent` with `|mantissa| < 2^prec` after
//! every operation (round to nearest). Only the operations needed for
//! symmetric square roots and monotone root bracketing are provided.

use core::cmp::Ordering;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Clone, Debug)]
pub struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat {
            mantissa: BigInt::zero(),
            exponent: 0,
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_int(1, prec)
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        BigFloat {
            mantissa: BigInt::from(n),
            exponent: 0,
            prec,
        }
        .rounded()
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let num = BigFloat {
            mantissa: q.numer().clone(),
            exponent: 0,
            prec: prec + 8,
        }
        .rounded();
        let den = BigFloat {
            mantissa: q.denom().clone(),
            exponent: 0,
            prec: prec + 8,
        }
        .rounded();
        let mut r = num / den;
        r.prec = prec;
        r.rounded()
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        match Rational::from_float(x) {
            Some(q) => Self::from_rational(&q, prec),
            None => Self::zero(prec),
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }

    /// Exact dyadic rational value.
    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            Rational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let shift = bits - 60;
        let (m, e) = if shift > 0 {
            (&self.mantissa >> shift as usize, self.exponent + shift)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let m = m.to_f64().unwrap_or(0.0);
        m * libm::exp2(e as f64)
    }

    /// `log2 |x|` rounded down; `i64::MIN` for zero.
    pub fn magnitude(&self) -> i64 {
        if self.mantissa.is_zero() {
            i64::MIN
        } else {
            self.mantissa.bits() as i64 - 1 + self.exponent
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative BigFloat");
        if self.is_zero() {
            return self.clone();
        }
        let want = 2 * self.prec as i64 + 4;
        let mut shift = (want - self.mantissa.bits() as i64).max(0);
        if (self.exponent - shift) % 2 != 0 {
            shift += 1;
        }
        let m = (&self.mantissa << shift as usize).sqrt();
        BigFloat {
            mantissa: m,
            exponent: (self.exponent - shift) / 2,
            prec: self.prec,
        }
        .rounded()
    }

    fn rounded(mut self) -> Self {
        let bits = self.mantissa.bits();
        if bits > self.prec as u64 {
            let drop = (bits - self.prec as u64) as usize;
            let negative = self.mantissa.is_negative();
            let mag = self.mantissa.magnitude();
            let half = num_bigint::BigUint::one() << (drop - 1);
            let rem = mag & ((num_bigint::BigUint::one() << drop) - 1u32);
            let mut q = mag >> drop;
            if rem >= half {
                q += 1u32;
            }
            self.mantissa = BigInt::from_biguint(if negative { Sign::Minus } else { Sign::Plus }, q);
            self.exponent += drop as i64;
        }
        if self.mantissa.is_zero() {
            self.exponent = 0;
        }
        self
    }

    fn combined_prec(&self, other: &Self) -> u32 {
        self.prec.max(other.prec)
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl BigFloat {
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.to_rational().cmp(&other.to_rational())
    }
}

impl Add for &BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: &BigFloat) -> BigFloat {
        let prec = self.combined_prec(rhs);
        if self.is_zero() {
            return BigFloat { prec, ..rhs.clone() }.rounded();
        }
        if rhs.is_zero() {
            return BigFloat { prec, ..self.clone() }.rounded();
        }
        // Operands more than prec + 4 binary orders apart: the smaller one
        // only affects rounding, keep a sticky remnant of it.
        let gap = self.magnitude() - rhs.magnitude();
        let limit = prec as i64 + 4;
        let (a, b) = if gap > limit {
            (self.clone(), clamp_below(rhs, self.magnitude() - limit))
        } else if -gap > limit {
            (rhs.clone(), clamp_below(self, rhs.magnitude() - limit))
        } else {
            (self.clone(), rhs.clone())
        };
        let e = a.exponent.min(b.exponent);
        let ma = &a.mantissa << (a.exponent - e) as usize;
        let mb = &b.mantissa << (b.exponent - e) as usize;
        BigFloat {
            mantissa: ma + mb,
            exponent: e,
            prec,
        }
        .rounded()
    }
}

/// Replace a negligible operand by a single unit at binary order `floor`.
fn clamp_below(x: &BigFloat, floor: i64) -> BigFloat {
    let unit = if x.is_negative() {
        BigInt::from(-1)
    } else {
        BigInt::one()
    };
    BigFloat {
        mantissa: unit,
        exponent: floor - 1,
        prec: x.prec,
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat {
            mantissa: -&self.mantissa,
            ..self.clone()
        }
    }
}

impl Sub for &BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: &BigFloat) -> BigFloat {
        self + &(-rhs)
    }
}

impl Mul for &BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: &BigFloat) -> BigFloat {
        BigFloat {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
            prec: self.combined_prec(rhs),
        }
        .rounded()
    }
}

impl Div for &BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: &BigFloat) -> BigFloat {
        assert!(!rhs.is_zero(), "BigFloat division by zero");
        let prec = self.combined_prec(rhs);
        let shift = (prec as i64 + 4 + rhs.mantissa.bits() as i64 - self.mantissa.bits() as i64).max(0);
        let num = &self.mantissa << shift as usize;
        BigFloat {
            mantissa: num / &rhs.mantissa,
            exponent: self.exponent - rhs.exponent - shift,
            prec,
        }
        .rounded()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: BigFloat) -> BigFloat { (&self).$m(&rhs) }
        }
        impl $tr<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $m(self, rhs: &BigFloat) -> BigFloat { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        -&self
    }
}
