//! Minimal-degree search for the discrete harmonic polynomial vanishing on
//! the coordinate hyperplanes, as the exact kernel of `L_S` on
//! `x_1⋯x_d · Q[x]_{≤ r-d}`.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::cone::ConeReport;
use crate::linalg::{nullspace, QMatrix};
use crate::poly::{monomials_up_to, Monomial, MultiPoly};
use crate::rational::Rational;
use crate::stepset::{validate, StepSet};

pub const DEFAULT_R_MAX: u32 = 12;

/// Grid resolution for sampled positivity in dimension `>= 3`.
const SIMPLEX_RESOLUTION: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarmonicError {
    #[error("model has nonzero drift")]
    NonzeroDrift,
    #[error("degree {r} is smaller than the dimension {d}")]
    DegreeTooSmall { d: usize, r: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicResult {
    pub degree: u32,
    /// Primitive integer coefficients.
    pub polynomial: MultiPoly,
    pub kernel_dim: usize,
    /// Verdict on the dominant term being positive on the open orthant.
    pub positivity: bool,
    /// `false` when positivity was only sampled (dimension `>= 3`).
    pub positivity_certified: bool,
    /// Set in dimension `>= 3`, where existence is not guaranteed.
    pub experimental: bool,
    pub predicted_degree: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarmonicOutcome {
    Found(HarmonicResult),
    /// More than one kernel vector at the minimal degree.
    Anomaly {
        degree: u32,
        kernel_dim: usize,
        basis: Vec<MultiPoly>,
    },
    NotFound {
        r_max: u32,
    },
}

impl HarmonicOutcome {
    pub fn found(&self) -> Option<&HarmonicResult> {
        match self {
            HarmonicOutcome::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// `{x_1⋯x_d · m : deg m ≤ r − d}` in graded-lex order.
pub fn wspace_basis(d: usize, r: u32) -> Result<Vec<MultiPoly>, HarmonicError> {
    if (r as usize) < d {
        return Err(HarmonicError::DegreeTooSmall { d, r });
    }
    Ok(monomials_up_to(d, r - d as u32)
        .into_iter()
        .map(|m| {
            let e: Vec<u32> = m.0.iter().map(|e| e + 1).collect();
            MultiPoly::monomial(e, Rational::from_integer(1.into()))
        })
        .collect())
}

/// Matrix of `L_S` from `wspace_basis(d, r)` to monomials of degree `≤ r − 2`.
pub fn laplacian_matrix(s: &StepSet, r: u32) -> Result<QMatrix, HarmonicError> {
    if !validate(s).zero_drift {
        return Err(HarmonicError::NonzeroDrift);
    }
    let d = s.dimension();
    let basis = wspace_basis(d, r)?;
    let rows: Vec<Monomial> = if r >= 2 { monomials_up_to(d, r - 2) } else { Vec::new() };
    let mut m = QMatrix::zeros(rows.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        let image = b.discrete_laplacian(s).expect("basis has model dimension");
        for (mono, c) in image.terms() {
            let row = rows.binary_search(mono).expect("zero drift lowers the degree by two");
            m[(row, col)] = c.clone();
        }
    }
    Ok(m)
}

fn combine(basis: &[MultiPoly], coeffs: &[Rational]) -> MultiPoly {
    basis
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .fold(MultiPoly::zero(basis[0].dimension()), |acc, (b, c)| acc + b.scale(c))
}

/// Primitive integer form with `P(1,…,1) > 0`, falling back to a positive
/// leading coefficient when `P(1,…,1) = 0`.
pub fn normalize(p: &MultiPoly) -> MultiPoly {
    let prim = p.primitive_part();
    let ones = alloc::vec![Rational::from_integer(1.into()); p.dimension()];
    let at_ones = prim.eval(&ones);
    let flip = if at_ones.is_zero() {
        prim.leading_term().is_some_and(|(_, c)| c.is_negative())
    } else {
        at_ones.is_negative()
    };
    if flip {
        -prim
    } else {
        prim
    }
}

/// Positivity of the dominant term on the open orthant, and whether the
/// verdict is certified.
pub fn dominant_positivity(p: &MultiPoly) -> (bool, bool) {
    let Ok(dom) = p.dominant_term() else {
        return (false, true);
    };
    match p.dimension() {
        1 => (dom.leading_term().is_some_and(|(_, c)| c.is_positive()), true),
        2 => (dom.quadrant_positive_homogeneous().unwrap_or(false), true),
        _ => (
            dom.divisible_by_all_coordinates() && dom.positive_on_simplex_sampled(SIMPLEX_RESOLUTION),
            false,
        ),
    }
}

pub fn find_harmonic(s: &StepSet, r_max: u32) -> Result<HarmonicOutcome, HarmonicError> {
    if !validate(s).zero_drift {
        return Err(HarmonicError::NonzeroDrift);
    }
    let d = s.dimension();
    for r in d as u32..=r_max {
        let m = laplacian_matrix(s, r)?;
        let kernel = nullspace(&m);
        if kernel.is_empty() {
            continue;
        }
        let basis = wspace_basis(d, r)?;
        if kernel.len() > 1 {
            let polys = kernel.iter().map(|v| normalize(&combine(&basis, v))).collect();
            return Ok(HarmonicOutcome::Anomaly {
                degree: r,
                kernel_dim: kernel.len(),
                basis: polys,
            });
        }
        let polynomial = normalize(&combine(&basis, &kernel[0]));
        let degree = polynomial.degree().unwrap_or(0);
        let (positivity, positivity_certified) = dominant_positivity(&polynomial);
        return Ok(HarmonicOutcome::Found(HarmonicResult {
            degree,
            polynomial,
            kernel_dim: 1,
            positivity,
            positivity_certified,
            experimental: d >= 3,
            predicted_degree: None,
        }));
    }
    Ok(HarmonicOutcome::NotFound { r_max })
}

/// True iff the cone is a Weyl chamber whose reflection count equals the
/// degree found by the solver.
pub fn crosscheck_with_cone(result: &HarmonicResult, cone: &ConeReport) -> bool {
    cone.verdict.is_weyl() && cone.reflection_count() == Some(result.degree)
}
