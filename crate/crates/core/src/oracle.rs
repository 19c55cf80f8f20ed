//! Exact expectation oracles over killed walks, the one-step harmonicity
//! relation on `N0^d`, an explicit non-polynomial harmonic function, and a
//! seeded Monte Carlo survival estimator.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::poly::MultiPoly;
use crate::rational::{rat, to_f64, Rational};
use crate::stepset::StepSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("starting point must have positive coordinates")]
    NotInOpenQuadrant,
}

/// Which lattice points a path may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Survival {
    /// Killed as soon as some coordinate is `<= 0`.
    OpenOrthant,
    /// Killed as soon as some coordinate is `< 0`.
    ClosedOrthant,
}

impl Survival {
    pub fn alive(self, x: &[i64]) -> bool {
        match self {
            Survival::OpenOrthant => x.iter().all(|&c| c > 0),
            Survival::ClosedOrthant => x.iter().all(|&c| c >= 0),
        }
    }
}

/// Exact law of the killed walk after `n` steps: surviving endpoints with
/// their probabilities.
pub fn killed_distribution(
    s: &StepSet,
    x: &[i64],
    n: u32,
    survival: Survival,
) -> Result<BTreeMap<Vec<i64>, Rational>, OracleError> {
    if x.len() != s.dimension() {
        return Err(OracleError::DimensionMismatch {
            expected: s.dimension(),
            found: x.len(),
        });
    }
    if x.iter().any(|&c| c <= 0) {
        return Err(OracleError::NotInOpenQuadrant);
    }
    let mut layer = BTreeMap::new();
    layer.insert(x.to_vec(), Rational::one());
    for _ in 0..n {
        let mut next: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (y, p) in &layer {
            for step in s.steps() {
                let z: Vec<i64> = y.iter().zip(&step.vector).map(|(a, b)| a + b).collect();
                if survival.alive(&z) {
                    *next.entry(z).or_insert_with(Rational::zero) += p * &step.weight;
                }
            }
        }
        layer = next;
    }
    Ok(layer)
}

/// `E_x[f(x + S(n)); τ > n]` for an arbitrary lattice function.
pub fn dp_expectation_fn(
    s: &StepSet,
    f: impl Fn(&[i64]) -> Rational,
    x: &[i64],
    n: u32,
    survival: Survival,
) -> Result<Rational, OracleError> {
    let law = killed_distribution(s, x, n, survival)?;
    Ok(law.iter().map(|(y, p)| p * f(y)).sum())
}

pub fn dp_expectation(
    s: &StepSet,
    p: &MultiPoly,
    x: &[i64],
    n: u32,
    survival: Survival,
) -> Result<Rational, OracleError> {
    if p.dimension() != s.dimension() {
        return Err(OracleError::DimensionMismatch {
            expected: s.dimension(),
            found: p.dimension(),
        });
    }
    dp_expectation_fn(s, |y| p.eval_i64(y), x, n, survival)
}

/// `P(τ_x > n)`.
pub fn dp_survival(s: &StepSet, x: &[i64], n: u32, survival: Survival) -> Result<Rational, OracleError> {
    dp_expectation_fn(s, |_| Rational::one(), x, n, survival)
}

/// One comparison of `f(x)` with `Σ_{x+s ∈ N0^d} a(s) f(x+s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPoint {
    pub point: Vec<i64>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub pass: bool,
}

/// Evaluates the one-step relation at every point of the planar rectangle
/// `[i0, i1] × [j0, j1]`.
pub fn relation_report(
    s: &StepSet,
    f: impl Fn(&[i64]) -> Rational,
    i_range: (i64, i64),
    j_range: (i64, i64),
) -> Vec<RelationPoint> {
    let mut out = Vec::new();
    for i in i_range.0.max(1)..=i_range.1 {
        for j in j_range.0.max(1)..=j_range.1 {
            let x = [i, j];
            let lhs = f(&x);
            let mut rhs = Rational::zero();
            for step in s.steps() {
                let y = [i + step.vector[0], j + step.vector[1]];
                if y[0] >= 0 && y[1] >= 0 {
                    rhs += &step.weight * f(&y);
                }
            }
            let pass = lhs == rhs;
            out.push(RelationPoint {
                point: vec![i, j],
                lhs,
                rhs,
                pass,
            });
        }
    }
    out
}

/// Points of the rectangle where the one-step relation fails.
pub fn relation_check(
    s: &StepSet,
    f: impl Fn(&[i64]) -> Rational,
    i_range: (i64, i64),
    j_range: (i64, i64),
) -> Vec<RelationPoint> {
    relation_report(s, f, i_range, j_range)
        .into_iter()
        .filter(|r| !r.pass)
        .collect()
}

/// `j (i(i+j) + i/2 + j/4 − 1/8 − (2j−1)/8 · (−1/3)^i)`: positive harmonic
/// for the model with the `(-2, 0)` jump, vanishing on both axes.
pub fn long_jump_harmonic(i: i64, j: i64) -> Rational {
    let qi = Rational::from_integer(i.into());
    let qj = Rational::from_integer(j.into());
    let third = num_traits::pow(rat(-1, 3), i.max(0) as usize);
    let inner = &qi * (&qi + &qj) + &qi * rat(1, 2) + &qj * rat(1, 4)
        - rat(1, 8)
        - (Rational::from_integer(2.into()) * &qj - Rational::one()) * rat(1, 8) * third;
    qj * inner
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo estimate of `P(τ_x > n)` with a ChaCha8 stream seeded from `seed`.
pub fn mc_survival(
    s: &StepSet,
    x: &[i64],
    n: u32,
    samples: u64,
    seed: u64,
    survival: Survival,
) -> Result<McEstimate, OracleError> {
    if x.len() != s.dimension() {
        return Err(OracleError::DimensionMismatch {
            expected: s.dimension(),
            found: x.len(),
        });
    }
    if x.iter().any(|&c| c <= 0) {
        return Err(OracleError::NotInOpenQuadrant);
    }
    let samples = samples.max(1);
    let mut cumulative = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    for step in s.steps() {
        acc += to_f64(&step.weight);
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alive_count = 0u64;
    let mut pos = x.to_vec();
    for _ in 0..samples {
        pos.copy_from_slice(x);
        let mut alive = true;
        for _ in 0..n {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * acc;
            let k = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
            for (p, d) in pos.iter_mut().zip(&s.steps()[k].vector) {
                *p += d;
            }
            if !survival.alive(&pos) {
                alive = false;
                break;
            }
        }
        if alive {
            alive_count += 1;
        }
    }
    let mean = alive_count as f64 / samples as f64;
    let stderr = libm::sqrt(mean * (1.0 - mean) / samples as f64);
    Ok(McEstimate { mean, stderr, samples })
}
