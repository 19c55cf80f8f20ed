//! Walk models with a prescribed normalized covariance in dimensions 2 and 3.
//!
//! Planar blocks `Q(x, y)` with off-diagonal `-d` are combined as
//! `Q(x,y) + α Q(z,y) + β Q(x,z)`; the resulting normalized covariance is
//!
//! ```text
//! cov̂_12 = −d/√((1+α)(1+β)),  cov̂_13 = −dβ/√((1+β)(α+β)),  cov̂_23 = −dα/√((1+α)(α+β)).
//! ```

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::BigFloat;
use crate::rational::{exact_sqrt, format_rational, from_f64, Rational};
use crate::stepset::{normalized_covariance, validate, NormalizedCovariance, StepSet, StepSetError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyCheck {
    /// Gradient of the raw inventory at `(1, …, 1)`.
    Drift(Vec<Rational>),
    /// Normalized off-diagonal found, as a square and a sign, against `d²`.
    Covariance {
        expected_sq: Rational,
        found_sq: Rational,
        found_sign: i8,
    },
}

impl fmt::Display for FamilyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyCheck::Drift(v) => {
                write!(f, "drift (")?;
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", format_rational(x))?;
                }
                write!(f, ") is not zero")
            }
            FamilyCheck::Covariance {
                expected_sq,
                found_sq,
                found_sign,
            } => write!(
                f,
                "normalized off-diagonal squared {} (sign {}) differs from {}",
                format_rational(found_sq),
                found_sign,
                format_rational(expected_sq)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrescribeError {
    #[error("d² must lie in [0, 1)")]
    DSquaredOutOfRange,
    #[error("parameter out of range")]
    ParamOutOfRange,
    #[error("a² + b² + c² + 2abc must be < 1")]
    ConditionViolated,
    #[error("target is the identity matrix")]
    DegenerateIdentity,
    #[error("the product abc is required when a, b, c are all nonzero")]
    MissingProduct,
    #[error("abc² does not equal a²·b²·c²")]
    InconsistentProduct,
    #[error("assembled covariance does not match the target")]
    VerificationFailed,
    #[error("negative raw weight")]
    NegativeWeight,
    #[error("invalid family: {0}")]
    InvalidFamily(Box<FamilyCheck>),
    #[error(transparent)]
    Model(#[from] StepSetError),
}

fn rational_sqrt(q: &Rational, prec: u32) -> Rational {
    exact_sqrt(q).unwrap_or_else(|| BigFloat::from_rational(q, prec + 16).sqrt().to_rational())
}

fn round_to(q: &Rational, prec: u32) -> Rational {
    BigFloat::from_rational(q, prec).to_rational()
}

fn two() -> Rational {
    Rational::from_integer(2.into())
}

/// Planar model `q(x ȳ + x̄ y) + x + x̄` with `q = d²/(1−d²)`, normalized.
pub fn q_from_d2(d_sq: &Rational) -> Result<StepSet, PrescribeError> {
    if d_sq.is_negative() || d_sq >= &Rational::one() {
        return Err(PrescribeError::DSquaredOutOfRange);
    }
    let q = d_sq / (Rational::one() - d_sq);
    Ok(StepSet::from_raw(2, asymmetric_block(&q))?)
}

fn asymmetric_block(q: &Rational) -> Vec<(Vec<i64>, Rational)> {
    vec![
        (vec![1, -1], q.clone()),
        (vec![-1, 1], q.clone()),
        (vec![1, 0], Rational::one()),
        (vec![-1, 0], Rational::one()),
    ]
}

/// `q(x ȳ + x̄ y) + x + x̄ + y + ȳ`: equal marginal variances, off-diagonal `−q/(1+q)`.
fn symmetric_block(q: &Rational) -> Vec<(Vec<i64>, Rational)> {
    let mut b = asymmetric_block(q);
    b.push((vec![0, 1], Rational::one()));
    b.push((vec![0, -1], Rational::one()));
    b
}

/// Places a planar block on coordinates `(u, v)` of `R^3`, scaled by `w`.
fn embed(block: &[(Vec<i64>, Rational)], u: usize, v: usize, w: &Rational) -> Vec<(Vec<i64>, Rational)> {
    block
        .iter()
        .map(|(s, a)| {
            let mut t = vec![0; 3];
            t[u] = s[0];
            t[v] = s[1];
            (t, a * w)
        })
        .collect()
}

/// Target `δ = [[1,−a,−b],[−a,1,−c],[−b,−c,1]]` given by squares and the product `abc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target3D {
    pub a_sq: Rational,
    pub b_sq: Rational,
    pub c_sq: Rational,
    pub abc: Rational,
    /// `a, b, c` themselves when known exactly.
    pub roots: Option<[Rational; 3]>,
}

impl Target3D {
    pub fn exact(
        a_sq: Rational,
        b_sq: Rational,
        c_sq: Rational,
        abc: Option<Rational>,
    ) -> Result<Self, PrescribeError> {
        let unit = Rational::one();
        if [&a_sq, &b_sq, &c_sq].iter().any(|q| q.is_negative() || **q >= unit) {
            return Err(PrescribeError::ParamOutOfRange);
        }
        let product = &a_sq * &b_sq * &c_sq;
        let abc = match abc {
            Some(p) => {
                if p.is_negative() || &p * &p != product {
                    return Err(PrescribeError::InconsistentProduct);
                }
                p
            }
            None if product.is_zero() => Rational::zero(),
            None => exact_sqrt(&product).ok_or(PrescribeError::MissingProduct)?,
        };
        let roots = match (exact_sqrt(&a_sq), exact_sqrt(&b_sq), exact_sqrt(&c_sq)) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        Ok(Target3D {
            a_sq,
            b_sq,
            c_sq,
            abc,
            roots,
        })
    }

    /// Float targets, each converted exactly to a dyadic rational.
    pub fn from_floats(a: f64, b: f64, c: f64) -> Result<Self, PrescribeError> {
        let conv = |x: f64| -> Result<Rational, PrescribeError> {
            if !(0.0..1.0).contains(&x) {
                return Err(PrescribeError::ParamOutOfRange);
            }
            from_f64(x).ok_or(PrescribeError::ParamOutOfRange)
        };
        let (a, b, c) = (conv(a)?, conv(b)?, conv(c)?);
        Ok(Target3D {
            a_sq: &a * &a,
            b_sq: &b * &b,
            c_sq: &c * &c,
            abc: &a * &b * &c,
            roots: Some([a, b, c]),
        })
    }

    pub fn sum_of_squares(&self) -> Rational {
        &self.a_sq + &self.b_sq + &self.c_sq
    }

    /// Leading minors `1`, `1 − a²`, `1 − a² − b² − c² − 2abc` all positive.
    pub fn delta_positive_definite(&self) -> bool {
        let one = Rational::one();
        (&one - &self.a_sq).is_positive() && (&one - self.sum_of_squares() - two() * &self.abc).is_positive()
    }

    fn square(&self, i: usize, j: usize) -> &Rational {
        match (i.min(j), i.max(j)) {
            (0, 1) => &self.a_sq,
            (0, 2) => &self.b_sq,
            _ => &self.c_sq,
        }
    }

    fn root(&self, i: usize, j: usize, prec: u32) -> Rational {
        let k = match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            (0, 2) => 1,
            _ => 2,
        };
        match &self.roots {
            Some(r) => r[k].clone(),
            None => rational_sqrt(self.square(i, j), prec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefdSolution {
    pub d_sq: Rational,
    /// `d` itself when computed numerically (a dyadic approximation).
    pub d: Option<Rational>,
    pub exact: bool,
}

/// `S/d² + 2abc/d³` for `S = a² + b² + c²`.
pub fn defd_lhs(t: &Target3D, d: &Rational) -> Rational {
    let d2 = d * d;
    t.sum_of_squares() / &d2 + two() * &t.abc / (d2 * d)
}

/// The unique `d ∈ (0, 1)` with `S/d² + 2abc/d³ = 1`.
pub fn solve_defd(t: &Target3D, precision_bits: u32) -> Result<DefdSolution, PrescribeError> {
    let s = t.sum_of_squares();
    if s.is_zero() {
        return Err(PrescribeError::DegenerateIdentity);
    }
    if !t.delta_positive_definite() {
        return Err(PrescribeError::ConditionViolated);
    }
    if t.abc.is_zero() {
        return Ok(DefdSolution {
            d_sq: s,
            d: None,
            exact: true,
        });
    }
    // Bisection on u = 1/d for S u² + 2abc u³ = 1, increasing in u > 0.
    let f = |u: &Rational| &s * u * u + two() * &t.abc * u * u * u;
    let one = Rational::one();
    let mut lo = one.clone();
    let mut hi = two();
    while f(&hi) < one {
        hi = &hi * two();
    }
    let half = Rational::new(1.into(), 2.into());
    for _ in 0..precision_bits + 16 {
        let mid = (&lo + &hi) * &half;
        if f(&mid) < one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = round_to(&(one / ((lo + hi) * half)), precision_bits + 8);
    Ok(DefdSolution {
        d_sq: &d * &d,
        d: Some(d),
        exact: false,
    })
}

/// A three-dimensional model assembled from planar blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chi3 {
    /// In the target's coordinates.
    pub model: StepSet,
    /// In block coordinates, where the `(1,2)` target entry is nonzero.
    pub block_model: StepSet,
    /// Block coordinate `k` is target coordinate `permutation[k]`.
    pub permutation: [usize; 3],
    pub alpha: Rational,
    pub beta: Rational,
    /// `d²` of the blocks actually used (exact for the rounded `d` on the numeric path).
    pub d_sq: Rational,
    pub exact: bool,
    pub symmetric_block: bool,
}

pub fn build_chi3(t: &Target3D, precision_bits: u32) -> Result<Chi3, PrescribeError> {
    let sol = solve_defd(t, precision_bits)?;
    let permutation = if !t.a_sq.is_zero() {
        [0, 1, 2]
    } else if !t.b_sq.is_zero() {
        [0, 2, 1]
    } else {
        [1, 2, 0]
    };
    let [p0, p1, p2] = permutation;
    let (a_sq, c_sq) = (t.square(p0, p1), t.square(p1, p2));
    let one = Rational::one();

    let (alpha, beta, d_sq, block) = if sol.exact {
        let big_a_sq = a_sq / &sol.d_sq;
        let ratio = (&one - &big_a_sq) / &big_a_sq;
        let (alpha, beta) = if c_sq.is_zero() {
            (Rational::zero(), ratio)
        } else {
            (ratio, Rational::zero())
        };
        let q = &sol.d_sq / (&one - &sol.d_sq);
        (alpha, beta, sol.d_sq.clone(), asymmetric_block(&q))
    } else {
        let d = sol.d.clone().expect("numeric path carries d");
        let a = t.root(p0, p1, precision_bits) / &d;
        let b = t.root(p0, p2, precision_bits) / &d;
        let c = t.root(p1, p2, precision_bits) / &d;
        let lead = &one - &a * &a;
        let alpha = round_to(&(&c * &lead / (&a * (&a * &c + &b))), precision_bits);
        let beta = round_to(&(&b * &lead / (&a * (&a * &b + &c))), precision_bits);
        let q = &d / (&one - &d);
        (alpha, beta, &d * &d, symmetric_block(&q))
    };

    let mut raw = embed(&block, 0, 1, &one);
    if !alpha.is_zero() {
        raw.extend(embed(&block, 2, 1, &alpha));
    }
    if !beta.is_zero() {
        raw.extend(embed(&block, 0, 2, &beta));
    }
    let isolated = alpha.is_zero() && beta.is_zero();
    if isolated {
        // the third coordinate is uncorrelated; give it its own simple walk
        raw.push((vec![0, 0, 1], one.clone()));
        raw.push((vec![0, 0, -1], one.clone()));
    }
    let block_model = StepSet::from_raw(3, raw.clone())?;
    if !isolated && !verify_delp(&block_model, &alpha, &beta, &d_sq) {
        return Err(PrescribeError::VerificationFailed);
    }

    let original: Vec<(Vec<i64>, Rational)> = block_model
        .steps()
        .iter()
        .map(|st| {
            let mut v = vec![0; 3];
            for k in 0..3 {
                v[permutation[k]] = st.vector[k];
            }
            (v, st.weight.clone())
        })
        .collect();
    let model = StepSet::new(3, original)?;
    if !matches_target(&model, t, sol.exact) {
        return Err(PrescribeError::VerificationFailed);
    }
    Ok(Chi3 {
        model,
        block_model,
        permutation,
        alpha,
        beta,
        d_sq,
        exact: sol.exact,
        symmetric_block: !sol.exact,
    })
}

fn matches_target(model: &StepSet, t: &Target3D, exact: bool) -> bool {
    let Ok(nc) = normalized_covariance(&validate(model)) else {
        return false;
    };
    [(0, 1), (0, 2), (1, 2)].iter().all(|&(i, j)| {
        let target = t.square(i, j);
        let sign_ok = if target.is_zero() {
            nc.signs[i][j] == 0
        } else {
            nc.signs[i][j] < 0
        };
        let value_ok = if exact {
            &nc.squared[(i, j)] == target
        } else {
            let want = -libm::sqrt(crate::rational::to_f64(target));
            libm::fabs(nc.entry_f64(i, j) - want) < 1e-12
        };
        sign_ok && value_ok
    })
}

/// Squared closed-form entries `((1,2), (1,3), (2,3))`.
pub fn delp_squares(alpha: &Rational, beta: &Rational, d_sq: &Rational) -> [Rational; 3] {
    let one = Rational::one();
    let e12 = d_sq / ((&one + alpha) * (&one + beta));
    let ab = alpha + beta;
    let (e13, e23) = if ab.is_zero() {
        (Rational::zero(), Rational::zero())
    } else {
        (
            d_sq * beta * beta / ((&one + beta) * &ab),
            d_sq * alpha * alpha / ((&one + alpha) * &ab),
        )
    };
    [e12, e13, e23]
}

/// Exact comparison of a model's normalized covariance with the closed form.
pub fn verify_delp(s: &StepSet, alpha: &Rational, beta: &Rational, d_sq: &Rational) -> bool {
    if s.dimension() != 3 {
        return false;
    }
    let Ok(nc) = normalized_covariance(&validate(s)) else {
        return false;
    };
    let expected = delp_squares(alpha, beta, d_sq);
    [(0, 1), (0, 2), (1, 2)].iter().zip(&expected).all(|(&(i, j), e)| {
        let sign_ok = if e.is_zero() {
            nc.signs[i][j] == 0
        } else {
            nc.signs[i][j] < 0
        };
        sign_ok && &nc.squared[(i, j)] == e
    })
}

/// `(cos²Θ, t²)` with `0 < cos²Θ < 1` and `0 < t² < sin²Θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    pub cos2_theta: Rational,
    pub t_sq: Rational,
}

impl FamilyParams {
    pub fn new(cos2_theta: Rational, t_sq: Rational) -> Result<Self, PrescribeError> {
        let one = Rational::one();
        let ok = cos2_theta.is_positive() && cos2_theta < one && t_sq.is_positive() && t_sq < &one - &cos2_theta;
        if ok {
            Ok(FamilyParams { cos2_theta, t_sq })
        } else {
            Err(PrescribeError::ParamOutOfRange)
        }
    }

    pub fn sin2_theta(&self) -> Rational {
        Rational::one() - &self.cos2_theta
    }

    /// Raw coefficients of `x ȳ + x̄ y`, `x + x̄` and `y + ȳ`.
    pub fn qt_coefficients(&self) -> [Rational; 3] {
        let c = &self.cos2_theta;
        let k = c * (self.sin2_theta() - &self.t_sq) / (c + &self.t_sq);
        [c.clone(), self.t_sq.clone(), k]
    }
}

fn qt_block(p: &FamilyParams) -> Vec<(Vec<i64>, Rational)> {
    let [c, t, k] = p.qt_coefficients();
    vec![
        (vec![1, -1], c.clone()),
        (vec![-1, 1], c),
        (vec![1, 0], t.clone()),
        (vec![-1, 0], t),
        (vec![0, 1], k.clone()),
        (vec![0, -1], k),
    ]
}

/// Planar model whose normalized off-diagonal squared is `cos²Θ` for every `t`.
pub fn qt_family(p: &FamilyParams) -> Result<StepSet, PrescribeError> {
    Ok(StepSet::from_raw(2, qt_block(p))?)
}

/// `Q_t(x,y) + α Q_t(z,y)`, normalized.
pub fn rt_family(p: &FamilyParams, alpha: &Rational) -> Result<StepSet, PrescribeError> {
    if !alpha.is_positive() {
        return Err(PrescribeError::ParamOutOfRange);
    }
    let block = qt_block(p);
    let mut raw = embed(&block, 0, 1, &Rational::one());
    raw.extend(embed(&block, 2, 1, alpha));
    Ok(StepSet::from_raw(3, raw)?)
}

/// Raw weights of the printed three-parameter planar inventory, in the order
/// `x̄y, xȳ, x, y, x̄, ȳ, xy, x̄ȳ`.
pub fn two_param_raw(d: &Rational, r: &Rational, s: &Rational) -> Vec<(Vec<i64>, Rational)> {
    let one = Rational::one();
    let k = (r + s * (&one - two() * d) + Rational::from_integer(4.into()) * d) / (two() * (&one - d));
    vec![
        (vec![-1, 1], k.clone()),
        (vec![1, -1], k),
        (vec![1, 0], &one - r),
        (vec![0, 1], &one - r),
        (vec![-1, 0], one.clone()),
        (vec![0, -1], one.clone()),
        (vec![1, 1], r + s),
        (vec![-1, -1], &one - s),
    ]
}

/// The printed inventory, accepted only if it has zero drift and normalized
/// off-diagonal `−d`.
pub fn two_param_q(d: &Rational, r: &Rational, s: &Rational) -> Result<StepSet, PrescribeError> {
    if !d.is_positive() || d >= &Rational::one() {
        return Err(PrescribeError::ParamOutOfRange);
    }
    let raw = two_param_raw(d, r, s);
    if raw.iter().any(|(_, w)| w.is_negative()) {
        return Err(PrescribeError::NegativeWeight);
    }
    let mut drift = vec![Rational::zero(); 2];
    for (v, w) in &raw {
        for k in 0..2 {
            drift[k] += w * Rational::from_integer(v[k].into());
        }
    }
    if drift.iter().any(|x| !x.is_zero()) {
        return Err(PrescribeError::InvalidFamily(Box::new(FamilyCheck::Drift(drift))));
    }
    let model = StepSet::from_raw(2, raw)?;
    let nc: NormalizedCovariance = normalized_covariance(&validate(&model))?;
    let expected_sq = d * d;
    if nc.squared[(0, 1)] != expected_sq || nc.signs[0][1] >= 0 {
        return Err(PrescribeError::InvalidFamily(Box::new(FamilyCheck::Covariance {
            expected_sq,
            found_sq: nc.squared[(0, 1)].clone(),
            found_sign: nc.signs[0][1],
        })));
    }
    Ok(model)
}
