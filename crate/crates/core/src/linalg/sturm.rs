//! Real-root counting on `(0, +inf)` with exact Sturm sequences.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use super::LinalgError;
use crate::rational::Rational;

/// Dense univariate polynomial, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Rational> {
        self.0.last()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Remainder of Euclidean division by a nonzero `divisor`.
    pub fn rem(&self, divisor: &UPoly) -> UPoly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead().unwrap();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / lead;
            for (i, c) in divisor.0.iter().enumerate() {
                r[i + shift] -= &f * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }
}

fn sign_changes<'a>(values: impl Iterator<Item = &'a Rational>) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for v in values.filter(|v| !v.is_zero()) {
        let pos = v.is_positive();
        if last.is_some_and(|l| l != pos) {
            changes += 1;
        }
        last = Some(pos);
    }
    changes
}

/// Number of distinct real roots in the open interval `(0, +inf)`.
///
/// `coeffs` are ascending (`coeffs[k]` multiplies `t^k`).
pub fn sturm_positive_roots(coeffs: &[Rational]) -> Result<usize, LinalgError> {
    let mut c: Vec<Rational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.is_empty() {
        return Err(LinalgError::ZeroPolynomial);
    }
    // Strip the root at t = 0 so both interval ends are non-roots.
    let leading_zeros = c.iter().take_while(|x| x.is_zero()).count();
    c.drain(..leading_zeros);
    let p = UPoly::new(c);

    let mut seq = alloc::vec![p.clone(), p.derivative()];
    while !seq.last().unwrap().is_zero() {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1]);
        seq.push(UPoly::new(r.0.into_iter().map(|x| -x).collect()));
    }
    seq.pop();

    let at_zero = sign_changes(seq.iter().filter_map(|q| q.0.first()));
    let at_inf = sign_changes(seq.iter().filter_map(UPoly::lead));
    Ok(at_zero - at_inf)
}
