//! Geometry of the cone `C = Z(R_+^d)` with `Z = cov^(-1/2)`: wall angles,
//! the Coxeter verdict, the dihedral group in dimension two, invariance of a
//! model under that group, and the homogeneous harmonic `P0`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{inv_sqrt_sym, positive_definite, FMatrix, LinalgError};
use crate::rational::{rat, signed_sqrt_f64, Rational};
use crate::stepset::{normalized_covariance, MomentReport, NormalizedCovariance, StepSet, StepSetError};

pub const DEFAULT_N_MAX: u32 = 50;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("model has nonzero drift")]
    NonzeroDrift,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("operation needs a planar cone")]
    NotRank2,
    #[error("cone is not a Weyl chamber")]
    NotWeylChamber,
    #[error("reflection group did not close with order {expected}")]
    GroupNotClosed { expected: usize },
}

impl From<StepSetError> for ConeError {
    fn from(e: StepSetError) -> Self {
        match e {
            StepSetError::NonzeroDrift => ConeError::NonzeroDrift,
            _ => ConeError::NotPositiveDefinite,
        }
    }
}

impl From<LinalgError> for ConeError {
    fn from(_: LinalgError) -> Self {
        ConeError::NotPositiveDefinite
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    WeylChamber(String),
    NotWeylChamber,
    Indeterminate,
}

impl Verdict {
    pub fn is_weyl(&self) -> bool {
        matches!(self, Verdict::WeylChamber(_))
    }

    pub fn group(&self) -> Option<&str> {
        match self {
            Verdict::WeylChamber(g) => Some(g),
            _ => None,
        }
    }
}

/// Interior angle between walls `i` and `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallAngle {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
    /// `cov̂_ij²` and the sign of `cov̂_ij`, when known exactly.
    pub exact_cos_sq: Option<(Rational, i8)>,
    /// The `m` with `angle = π/m`, if any.
    pub order: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ConeReport {
    pub dimension: usize,
    pub z: FMatrix,
    pub normalized: NormalizedCovariance,
    pub wall_angles: Vec<WallAngle>,
    pub coxeter_orders: Option<Vec<u32>>,
    pub verdict: Verdict,
}

impl ConeReport {
    /// The dihedral parameter `n` of a planar Weyl chamber (interior angle `π/n`).
    pub fn dihedral_order(&self) -> Option<u32> {
        if self.dimension != 2 || !self.verdict.is_weyl() {
            return None;
        }
        self.coxeter_orders.as_ref().map(|o| o[0])
    }

    /// Number of reflections in the group, which is the degree of `P0`.
    pub fn reflection_count(&self) -> Option<u32> {
        let group = self.verdict.group()?;
        match self.dimension {
            1 => Some(1),
            2 => self.dihedral_order(),
            3 => {
                let orders = self.coxeter_orders.as_ref()?;
                match group {
                    "A3" => Some(6),
                    "B3" => Some(9),
                    "H3" => Some(15),
                    "A1^3" => Some(3),
                    _ => orders.iter().copied().max().map(|n| n + 1),
                }
            }
            _ => None,
        }
    }

    pub fn z_f64(&self) -> Vec<Vec<f64>> {
        self.z.to_f64()
    }
}

/// `m ∈ {2,3,4,6}` when `cov̂² ∈ {0, 1/4, 1/2, 3/4}` with a non-positive sign.
fn crystallographic_order(sq: &Rational, sign: i8) -> Option<u32> {
    if sign > 0 {
        return None;
    }
    [(rat(0, 1), 2), (rat(1, 4), 3), (rat(1, 2), 4), (rat(3, 4), 6)]
        .into_iter()
        .find(|(q, _)| q == sq)
        .map(|(_, m)| m)
}

enum AngleMatch {
    Order(u32),
    NoMatch,
    Borderline,
}

fn match_angle(angle: f64, n_max: u32, tol: f64) -> AngleMatch {
    let mut best = f64::INFINITY;
    let mut best_m = 0;
    for m in 2..=n_max.max(2) {
        let gap = libm::fabs(angle - PI / m as f64);
        if gap < best {
            best = gap;
            best_m = m;
        }
    }
    if best < tol {
        AngleMatch::Order(best_m)
    } else if best < 10.0 * tol {
        AngleMatch::Borderline
    } else {
        AngleMatch::NoMatch
    }
}

pub fn group_name_2d(m: u32) -> String {
    match m {
        2 => String::from("A1xA1"),
        3 => String::from("A2"),
        4 => String::from("B2"),
        6 => String::from("G2"),
        _ => format!("I2({m})"),
    }
}

/// Name of the rank-3 group with pairwise orders `m`, if finite.
pub fn group_name_3d(orders: &[u32]) -> Option<String> {
    let mut t = orders.to_vec();
    t.sort_unstable();
    Some(match (t[0], t[1], t[2]) {
        (2, 2, 2) => String::from("A1^3"),
        (2, 2, n) => format!("A1xI2({n})"),
        (2, 3, 3) => String::from("A3"),
        (2, 3, 4) => String::from("B3"),
        (2, 3, 5) => String::from("H3"),
        _ => return None,
    })
}

pub fn cone_report(m: &MomentReport, n_max: u32, tol: f64) -> Result<ConeReport, ConeError> {
    cone_report_with_precision(m, n_max, tol, crate::linalg::bigfloat::DEFAULT_PRECISION)
}

pub fn cone_report_with_precision(
    m: &MomentReport,
    n_max: u32,
    tol: f64,
    precision_bits: u32,
) -> Result<ConeReport, ConeError> {
    if !m.zero_drift {
        return Err(ConeError::NonzeroDrift);
    }
    if !positive_definite(&m.second_moment)? {
        return Err(ConeError::NotPositiveDefinite);
    }
    let normalized = normalized_covariance(m)?;
    let z = inv_sqrt_sym(&m.second_moment, precision_bits)?;
    let d = m.second_moment.rows();

    let mut wall_angles = Vec::new();
    let mut borderline = false;
    let mut unmatched = false;
    for i in 0..d {
        for j in i + 1..d {
            let sq = normalized.squared[(i, j)].clone();
            let sign = normalized.signs[i][j];
            let angle = libm::acos(-signed_sqrt_f64(&sq, sign));
            let order = match crystallographic_order(&sq, sign) {
                Some(m) => Some(m),
                None => match match_angle(angle, n_max, tol) {
                    AngleMatch::Order(m) => Some(m),
                    AngleMatch::Borderline => {
                        borderline = true;
                        None
                    }
                    AngleMatch::NoMatch => {
                        unmatched = true;
                        None
                    }
                },
            };
            wall_angles.push(WallAngle {
                i,
                j,
                angle,
                exact_cos_sq: Some((sq, sign)),
                order,
            });
        }
    }

    let orders: Option<Vec<u32>> = wall_angles.iter().map(|w| w.order).collect();
    let verdict = if unmatched {
        Verdict::NotWeylChamber
    } else if borderline {
        Verdict::Indeterminate
    } else {
        let orders = orders.as_ref().expect("every angle matched");
        match d {
            1 => Verdict::WeylChamber(String::from("A1")),
            2 => Verdict::WeylChamber(group_name_2d(orders[0])),
            3 => match group_name_3d(orders) {
                Some(name) => Verdict::WeylChamber(name),
                None => Verdict::Indeterminate,
            },
            _ => Verdict::Indeterminate,
        }
    };
    if verdict.is_weyl() {
        // Wall-normal Gram matrix is the normalized covariance, hence PD.
        debug_assert!(positive_definite(&m.second_moment).unwrap_or(false));
    }
    Ok(ConeReport {
        dimension: d,
        z,
        normalized,
        wall_angles,
        coxeter_orders: orders,
        verdict,
    })
}

pub type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_apply(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn mat_close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (0..2).all(|i| (0..2).all(|j| libm::fabs(a[i][j] - b[i][j]) < tol))
}

pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Reflection across the line spanned by `v`.
fn reflection(v: [f64; 2]) -> Mat2 {
    let n = libm::hypot(v[0], v[1]);
    let u = [v[0] / n, v[1] / n];
    [
        [2.0 * u[0] * u[0] - 1.0, 2.0 * u[0] * u[1]],
        [2.0 * u[1] * u[0], 2.0 * u[1] * u[1] - 1.0],
    ]
}

/// The finite reflection group of a planar Weyl chamber, acting in the
/// normalized coordinates `y = Z x`.
#[derive(Debug, Clone)]
pub struct DihedralGroup {
    pub n: u32,
    pub elements: Vec<Mat2>,
    pub generators: (Mat2, Mat2),
    pub z: Mat2,
}

impl DihedralGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn reflections(&self) -> impl Iterator<Item = &Mat2> {
        self.elements.iter().filter(|h| mat_det(h) < 0.0)
    }
}

fn z2(cone: &ConeReport) -> Mat2 {
    let z = cone.z_f64();
    [[z[0][0], z[0][1]], [z[1][0], z[1][1]]]
}

pub fn dihedral_group(n: u32, cone: &ConeReport) -> Result<DihedralGroup, ConeError> {
    if cone.dimension != 2 {
        return Err(ConeError::NotRank2);
    }
    if cone.dihedral_order() != Some(n) {
        return Err(ConeError::NotWeylChamber);
    }
    let z = z2(cone);
    let r1 = reflection(mat_apply(&z, [1.0, 0.0]));
    let r2 = reflection(mat_apply(&z, [0.0, 1.0]));
    let expected = 2 * n as usize;
    let mut elements = vec![IDENTITY];
    let mut frontier = vec![IDENTITY];
    while let Some(g) = frontier.pop() {
        for r in [&r1, &r2] {
            let h = mat_mul(r, &g);
            if !elements.iter().any(|e| mat_close(e, &h, 1e-9)) {
                if elements.len() >= expected {
                    return Err(ConeError::GroupNotClosed { expected });
                }
                elements.push(h);
                frontier.push(h);
            }
        }
    }
    if elements.len() != expected {
        return Err(ConeError::GroupNotClosed { expected });
    }
    Ok(DihedralGroup {
        n,
        elements,
        generators: (r1, r2),
        z,
    })
}

/// True iff every group element permutes the normalized steps `Z s` and
/// preserves their weights exactly.
pub fn invariance_check(s: &StepSet, g: &DihedralGroup, tol: f64) -> bool {
    if s.dimension() != 2 {
        return false;
    }
    let mapped: Vec<([f64; 2], &Rational)> = s
        .steps()
        .iter()
        .map(|st| (mat_apply(&g.z, [st.vector[0] as f64, st.vector[1] as f64]), &st.weight))
        .collect();
    g.elements.iter().all(|h| {
        mapped.iter().all(|(v, w)| {
            let hv = mat_apply(h, *v);
            let hits: Vec<&&Rational> = mapped
                .iter()
                .filter(|(u, _)| libm::fabs(u[0] - hv[0]) < tol && libm::fabs(u[1] - hv[1]) < tol)
                .map(|(_, wu)| wu)
                .collect();
            hits.len() == 1 && *hits[0] == *w
        })
    })
}

/// `ρ^n sin(nθ)` where `(ρ, θ)` are polar coordinates of `Z x`, with `θ`
/// measured from the wall `Z e1` towards `Z e2`.
pub fn p0_eval(cone: &ConeReport, n: u32, x: [f64; 2]) -> Result<f64, ConeError> {
    if cone.dimension != 2 {
        return Err(ConeError::NotRank2);
    }
    if cone.dihedral_order() != Some(n) {
        return Err(ConeError::NotWeylChamber);
    }
    Ok(p0_eval_z(&z2(cone), n, x))
}

fn p0_eval_z(z: &Mat2, n: u32, x: [f64; 2]) -> f64 {
    let w1 = mat_apply(z, [1.0, 0.0]);
    let w2 = mat_apply(z, [0.0, 1.0]);
    let orient = if w1[0] * w2[1] - w1[1] * w2[0] >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let y = mat_apply(z, x);
    let n1 = libm::hypot(w1[0], w1[1]);
    let u = [w1[0] / n1, w1[1] / n1];
    let c = u[0] * y[0] + u[1] * y[1];
    let s = orient * (u[0] * y[1] - u[1] * y[0]);
    let rho = libm::hypot(c, s);
    let theta = libm::atan2(s, c);
    libm::pow(rho, n as f64) * libm::sin(n as f64 * theta)
}

/// Checks `Σ a(s) P0(x+s) − P0(x) ≈ 0` at every `x ∈ [1, grid]²`.
pub fn p0_discrete_harmonicity_check(s: &StepSet, cone: &ConeReport, n: u32, grid: i64, tol: f64) -> bool {
    if s.dimension() != 2 || cone.dimension != 2 {
        return false;
    }
    let z = z2(cone);
    let weights: Vec<(f64, f64, f64)> = s
        .steps()
        .iter()
        .map(|st| {
            (
                st.vector[0] as f64,
                st.vector[1] as f64,
                crate::rational::to_f64(&st.weight),
            )
        })
        .collect();
    for i in 1..=grid {
        for j in 1..=grid {
            let (xi, xj) = (i as f64, j as f64);
            let here = p0_eval_z(&z, n, [xi, xj]);
            let mean: f64 = weights
                .iter()
                .map(|(a, b, w)| w * p0_eval_z(&z, n, [xi + a, xj + b]))
                .sum();
            if libm::fabs(mean - here) >= tol * (1.0 + libm::fabs(here)) {
                return false;
            }
        }
    }
    true
}
