//! Right kernel of a rational matrix by fraction-free Gauss–Jordan
//! elimination (Bareiss-style exact division).
//!
//! Rows are first cleared of denominators, then every update has the form
//! `a_ij <- (p * a_ij - a_ic * a_rj) / prev` where `prev` is the previous
//! pivot. The division is exact, so intermediate entries stay integers of
//! controlled size (they are minors of the input).

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::QMatrix;
use crate::rational::{primitive_integer_vector, Rational};

/// Basis of `{v : m v = 0}`. Each vector is primitive-integer with a
/// positive first nonzero entry; one vector per free column, in column order.
pub fn nullspace(m: &QMatrix) -> Vec<Vec<Rational>> {
    let (rows, cols) = (m.rows(), m.cols());
    if cols == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<BigInt>> = (0..rows).map(|i| integer_row(m.row(i))).collect();

    let mut prev = BigInt::one();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pivot = a[r][c].clone();
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            for (j, x) in row.iter_mut().enumerate() {
                if j == c {
                    continue;
                }
                let num = &pivot * &*x - &factor * &pivot_row[j];
                debug_assert!(num.is_multiple_of(&prev));
                *x = num / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot;
        pivot_cols.push(c);
        r += 1;
    }

    // Every pivot now equals `prev`; the reduced system is prev * x_p = -sum a_pf x_f.
    let mut is_pivot = alloc::vec![false; cols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = alloc::vec![Rational::zero(); cols];
            v[f] = Rational::from_integer(prev.clone());
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = Rational::from_integer(-&a[row][f]);
            }
            primitive_integer_vector(&v)
                .into_iter()
                .map(Rational::from_integer)
                .collect()
        })
        .collect()
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
}
