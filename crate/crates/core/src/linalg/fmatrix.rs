use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use super::bigfloat::BigFloat;
use super::{positive_definite, LinalgError, QMatrix};

/// Dense row-major matrix of [`BigFloat`] entries sharing one precision.
#[derive(Clone, Debug)]
pub struct FMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    entries: Vec<BigFloat>,
}

impl FMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        FMatrix {
            rows,
            cols,
            prec,
            entries: vec![BigFloat::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = BigFloat::one(prec);
        }
        m
    }

    pub fn from_qmatrix(m: &QMatrix, prec: u32) -> Self {
        FMatrix {
            rows: m.rows(),
            cols: m.cols(),
            prec,
            entries: m.entries().iter().map(|q| BigFloat::from_rational(q, prec)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.rows, "FMatrix shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols, self.prec.max(other.prec));
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigFloat::zero(out.prec);
                for k in 0..self.cols {
                    acc = acc + &self[(i, k)] * &other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = Self::zeros(self.cols, self.rows, self.prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Max-row-sum norm of `self - other`.
    pub fn dist_inf(&self, other: &FMatrix) -> BigFloat {
        let mut worst = BigFloat::zero(self.prec);
        for i in 0..self.rows {
            let mut row = BigFloat::zero(self.prec);
            for j in 0..self.cols {
                row = row + (&self[(i, j)] - &other[(i, j)]).abs();
            }
            if row > worst {
                worst = row;
            }
        }
        worst
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect())
            .collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        let m = self.to_f64();
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for FMatrix {
    type Output = BigFloat;
    fn index(&self, (i, j): (usize, usize)) -> &BigFloat {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for FMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigFloat {
        &mut self.entries[i * self.cols + j]
    }
}

/// `m^(-1/2)` for a symmetric positive definite rational matrix.
///
/// The 2×2 case uses `sqrt(M) = (M + sI)/t`, `s = sqrt(det M)`,
/// `t = sqrt(tr M + 2s)`; larger sizes use cyclic Jacobi rotations.
/// The result satisfies `‖Z·m·Z − I‖∞ < 2^(−precision_bits/2)`.
pub fn inv_sqrt_sym(m: &QMatrix, precision_bits: u32) -> Result<FMatrix, LinalgError> {
    if !positive_definite(m)? {
        return Err(LinalgError::NotPositiveDefinite);
    }
    let work = precision_bits + 32;
    let z = match m.rows() {
        1 => {
            let mut z = FMatrix::zeros(1, 1, work);
            z[(0, 0)] = &BigFloat::one(work) / &BigFloat::from_rational(&m[(0, 0)], work).sqrt();
            z
        }
        2 => inv_sqrt_2x2(m, work),
        _ => inv_sqrt_jacobi(m, work),
    };
    let z = FMatrix {
        prec: precision_bits,
        entries: z
            .entries
            .into_iter()
            .map(|x| x.with_precision(precision_bits))
            .collect(),
        ..z
    };
    Ok(z)
}

fn inv_sqrt_2x2(m: &QMatrix, prec: u32) -> FMatrix {
    let f = FMatrix::from_qmatrix(m, prec);
    let (a, b, d) = (&f[(0, 0)], &f[(0, 1)], &f[(1, 1)]);
    let det = BigFloat::from_rational(&m.determinant().expect("square"), prec);
    let s = det.sqrt();
    let t = (a + d + &s + &s).sqrt();
    // sqrt(M) = [[a+s, b],[b, d+s]] / t; invert it.
    let ap = a + &s;
    let dp = d + &s;
    let sdet = &(&ap * &dp) - &(b * b);
    let scale = &t / &sdet;
    let mut z = FMatrix::zeros(2, 2, prec);
    z[(0, 0)] = &dp * &scale;
    z[(1, 1)] = &ap * &scale;
    z[(0, 1)] = -(b * &scale);
    z[(1, 0)] = z[(0, 1)].clone();
    z
}

fn inv_sqrt_jacobi(m: &QMatrix, prec: u32) -> FMatrix {
    let n = m.rows();
    let mut a = FMatrix::from_qmatrix(m, prec);
    let mut v = FMatrix::identity(n, prec);
    let one = BigFloat::one(prec);
    let threshold = -(prec as i64) + 8;
    for _sweep in 0..64 {
        let mut largest = i64::MIN;
        for p in 0..n {
            for q in p + 1..n {
                if !a[(p, q)].is_zero() {
                    largest = largest.max(a[(p, q)].magnitude() - scale_of(&a, p, q));
                }
            }
        }
        if largest < threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].is_zero() {
                    continue;
                }
                let two_apq = &a[(p, q)] + &a[(p, q)];
                let theta = &(&a[(q, q)] - &a[(p, p)]) / &two_apq;
                let root = (&(&theta * &theta) + &one).sqrt();
                let mut t = &one / &(&theta.abs() + &root);
                if theta.is_negative() {
                    t = -t;
                }
                let c = &one / &(&(&t * &t) + &one).sqrt();
                let s = &t * &c;
                rotate(&mut a, &mut v, p, q, &c, &s);
            }
        }
    }
    // Z = V diag(1/sqrt(lambda)) V^T
    let mut d = FMatrix::zeros(n, n, prec);
    for i in 0..n {
        d[(i, i)] = &one / &a[(i, i)].sqrt();
    }
    v.mul(&d).mul(&v.transpose())
}

fn scale_of(a: &FMatrix, p: usize, q: usize) -> i64 {
    a[(p, p)].magnitude().max(a[(q, q)].magnitude()).max(0)
}

fn rotate(a: &mut FMatrix, v: &mut FMatrix, p: usize, q: usize, c: &BigFloat, s: &BigFloat) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)].clone();
        let akq = a[(k, q)].clone();
        a[(k, p)] = &(c * &akp) - &(s * &akq);
        a[(k, q)] = &(s * &akp) + &(c * &akq);
    }
    for k in 0..n {
        let apk = a[(p, k)].clone();
        let aqk = a[(q, k)].clone();
        a[(p, k)] = &(c * &apk) - &(s * &aqk);
        a[(q, k)] = &(s * &apk) + &(c * &aqk);
    }
    a[(p, q)] = BigFloat::zero(a.prec);
    a[(q, p)] = BigFloat::zero(a.prec);
    for k in 0..n {
        let vkp = v[(k, p)].clone();
        let vkq = v[(k, q)].clone();
        v[(k, p)] = &(c * &vkp) - &(s * &vkq);
        v[(k, q)] = &(s * &vkp) + &(c * &vkq);
    }
}

impl BigFloat {
    pub(crate) fn with_precision(self, prec: u32) -> BigFloat {
        &self * &BigFloat::one(prec)
    }
}
