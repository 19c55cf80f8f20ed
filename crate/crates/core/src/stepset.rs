//! Walk models: finite integer step sets with exact rational weights.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::linalg::QMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepSetError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("step set is empty")]
    Empty,
    #[error("step {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("step {index} has a negative weight")]
    NegativeWeight { index: usize },
    #[error("step {index} has zero weight; drop it from the model")]
    ZeroWeight { index: usize },
    #[error("step {index} duplicates an earlier step")]
    DuplicateStep { index: usize },
    #[error("weights must sum to 1 (they sum to {0})")]
    WeightsNotNormalized(Rational),
    #[error("model has nonzero drift")]
    NonzeroDrift,
    #[error("covariance matrix is singular")]
    DegenerateCovariance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub vector: Vec<i64>,
    pub weight: Rational,
}

/// A walk model: the step set together with its transition probabilities.
///
/// Weights are strictly positive, sum to one, and step vectors are
/// pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSet {
    dimension: usize,
    steps: Vec<Step>,
}

impl StepSet {
    pub fn new(dimension: usize, steps: Vec<(Vec<i64>, Rational)>) -> Result<Self, StepSetError> {
        if dimension == 0 {
            return Err(StepSetError::ZeroDimension);
        }
        if steps.is_empty() {
            return Err(StepSetError::Empty);
        }
        let mut seen = BTreeMap::new();
        let mut total = Rational::zero();
        for (index, (v, w)) in steps.iter().enumerate() {
            if v.len() != dimension {
                return Err(StepSetError::DimensionMismatch {
                    index,
                    expected: dimension,
                    found: v.len(),
                });
            }
            if w.is_negative() {
                return Err(StepSetError::NegativeWeight { index });
            }
            if w.is_zero() {
                return Err(StepSetError::ZeroWeight { index });
            }
            if seen.insert(v.clone(), ()).is_some() {
                return Err(StepSetError::DuplicateStep { index });
            }
            total += w;
        }
        if !total.is_one() {
            return Err(StepSetError::WeightsNotNormalized(total));
        }
        let steps = steps
            .into_iter()
            .map(|(vector, weight)| Step { vector, weight })
            .collect();
        Ok(StepSet { dimension, steps })
    }

    /// Build from unnormalized nonnegative weights. Zero weights are dropped
    /// and repeated vectors are merged before normalizing.
    pub fn from_raw(dimension: usize, raw: Vec<(Vec<i64>, Rational)>) -> Result<Self, StepSetError> {
        let mut merged: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        let mut order = Vec::new();
        for (index, (v, w)) in raw.into_iter().enumerate() {
            if w.is_negative() {
                return Err(StepSetError::NegativeWeight { index });
            }
            if v.len() != dimension {
                return Err(StepSetError::DimensionMismatch {
                    index,
                    expected: dimension,
                    found: v.len(),
                });
            }
            if w.is_zero() {
                continue;
            }
            if !merged.contains_key(&v) {
                order.push(v.clone());
            }
            *merged.entry(v).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = merged.values().cloned().sum();
        if total.is_zero() {
            return Err(StepSetError::Empty);
        }
        let steps = order
            .into_iter()
            .map(|v| {
                let w = &merged[&v] / &total;
                (v, w)
            })
            .collect();
        Self::new(dimension, steps)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn weight_of(&self, v: &[i64]) -> Option<&Rational> {
        self.steps.iter().find(|s| s.vector == v).map(|s| &s.weight)
    }

    /// Largest backward jump over all coordinates, `max(-min s_i)`.
    /// A value `<= 1` means the walk cannot jump over the boundary of the orthant.
    pub fn max_negative_jump(&self) -> i64 {
        self.steps
            .iter()
            .flat_map(|s| s.vector.iter().copied())
            .map(|c| -c)
            .max()
            .unwrap_or(0)
            .max(0)
    }

    pub fn max_abs_coordinate(&self) -> i64 {
        self.steps
            .iter()
            .flat_map(|s| s.vector.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// First and second moments of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentReport {
    pub drift: Vec<Rational>,
    /// `sum a(s) s_i s_j`; the covariance matrix when the drift vanishes.
    pub second_moment: QMatrix,
    pub zero_drift: bool,
    pub identity_covariance: bool,
}

pub fn validate(s: &StepSet) -> MomentReport {
    let d = s.dimension();
    let mut drift = vec![Rational::zero(); d];
    let mut m = QMatrix::zeros(d, d);
    for step in s.steps() {
        for i in 0..d {
            let si = step.vector[i];
            if si == 0 {
                continue;
            }
            drift[i] += &step.weight * Rational::from_integer(si.into());
            for j in 0..d {
                let sj = step.vector[j];
                if sj != 0 {
                    m[(i, j)] += &step.weight * Rational::from_integer((si * sj).into());
                }
            }
        }
    }
    let zero_drift = drift.iter().all(Zero::is_zero);
    let identity_covariance = zero_drift && m == QMatrix::identity(d);
    MomentReport {
        drift,
        second_moment: m,
        zero_drift,
        identity_covariance,
    }
}

/// Normalized covariance `σ_ij / sqrt(σ_ii σ_jj)` kept exact as a squared
/// value plus a sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedCovariance {
    pub squared: QMatrix,
    pub signs: Vec<Vec<i8>>,
}

impl NormalizedCovariance {
    pub fn dimension(&self) -> usize {
        self.squared.rows()
    }

    /// Signed entry `(i, j)` in floating point.
    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        crate::rational::signed_sqrt_f64(&self.squared[(i, j)], self.signs[i][j])
    }

    /// Build from a symmetric matrix with positive diagonal.
    pub fn from_moments(m: &QMatrix) -> Result<Self, StepSetError> {
        let d = m.rows();
        if (0..d).any(|i| !m[(i, i)].is_positive()) {
            return Err(StepSetError::DegenerateCovariance);
        }
        let mut squared = QMatrix::zeros(d, d);
        let mut signs = vec![vec![0i8; d]; d];
        for i in 0..d {
            for j in 0..d {
                let s = &m[(i, j)];
                squared[(i, j)] = s * s / (&m[(i, i)] * &m[(j, j)]);
                signs[i][j] = sign_of(s);
            }
        }
        Ok(NormalizedCovariance { squared, signs })
    }
}

fn sign_of(q: &Rational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Normalized covariance of a zero-drift model. Rank-deficient covariances
/// (some `|cov̂_ij| = 1`, or a singular matrix) are rejected.
pub fn normalized_covariance(r: &MomentReport) -> Result<NormalizedCovariance, StepSetError> {
    if !r.zero_drift {
        return Err(StepSetError::NonzeroDrift);
    }
    if r.second_moment.determinant().map_or(true, |d| d.is_zero()) {
        return Err(StepSetError::DegenerateCovariance);
    }
    NormalizedCovariance::from_moments(&r.second_moment)
}

/// Hessian of the inventory Laurent polynomial `χ(x) = Σ a(s) x^s` at `(1,…,1)`.
///
/// Computed by differentiating each monomial: `∂_i∂_j x^s = s_i s_j x^(s-e_i-e_j)`
/// for `i ≠ j` and `s_i (s_i - 1) x^(s-2e_i)` on the diagonal.
pub fn inventory_second_derivatives(s: &StepSet) -> Result<QMatrix, StepSetError> {
    let d = s.dimension();
    let drift_free = validate(s).zero_drift;
    if !drift_free {
        return Err(StepSetError::NonzeroDrift);
    }
    let mut h = QMatrix::zeros(d, d);
    for step in s.steps() {
        for i in 0..d {
            for j in 0..d {
                let si = step.vector[i];
                let factor = if i == j { si * (si - 1) } else { si * step.vector[j] };
                if factor != 0 {
                    h[(i, j)] += &step.weight * Rational::from_integer(factor.into());
                }
            }
        }
    }
    Ok(h)
}
