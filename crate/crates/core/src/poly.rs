//! Sparse multivariate polynomials with rational coefficients, and the
//! operators applied to them: shifts, the discrete Laplacian of a walk
//! model, the classical Laplacian, homogeneous parts, positivity tests.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write as _;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::sturm_positive_roots;
use crate::rational::{format_rational, Rational};
use crate::stepset::StepSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial is not bivariate")]
    NotBivariate,
    #[error("polynomial is not divisible by the product of the coordinates")]
    NotCoordinateDivisible,
}

/// Exponent vector ordered graded-lexicographically (total degree first,
/// then larger power of the first variable first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors in `dim` variables with total degree `<= max_degree`,
/// ascending in graded-lex order.
pub fn monomials_up_to(dim: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let mut layer = Vec::new();
        compositions(dim, deg, &mut vec![0; dim], 0, &mut layer);
        layer.sort();
        out.extend(layer);
    }
    out
}

fn compositions(dim: usize, remaining: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Monomial>) {
    if pos + 1 == dim {
        cur[pos] = remaining;
        out.push(Monomial(cur.clone()));
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        compositions(dim, remaining - e, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    dimension: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(dimension: usize) -> Self {
        MultiPoly {
            dimension,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, c: Rational) -> Self {
        let mut p = Self::zero(dimension);
        p.add_term(Monomial(vec![0; dimension]), c);
        p
    }

    /// The coordinate `x_i` (0-based).
    pub fn var(dimension: usize, i: usize) -> Self {
        let mut e = vec![0; dimension];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exponents: Vec<u32>, c: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(Monomial(exponents), c);
        p
    }

    pub fn from_terms(
        dimension: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(dimension);
        for (e, c) in terms {
            if e.len() != dimension {
                return Err(PolyError::DimensionMismatch {
                    expected: dimension,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.dimension);
        }
        MultiPoly {
            dimension: self.dimension,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            Some(d0) => degs.all(|d| d == d0),
            None => true,
        }
    }

    pub fn homogeneous_component(&self, degree: u32) -> MultiPoly {
        MultiPoly {
            dimension: self.dimension,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of top total degree.
    pub fn dominant_term(&self) -> Result<MultiPoly, PolyError> {
        let d = self.degree().ok_or(PolyError::ZeroPolynomial)?;
        Ok(self.homogeneous_component(d))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.dimension, "evaluation point has wrong dimension");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_i64(&self, x: &[i64]) -> Rational {
        let q: Vec<Rational> = x.iter().map(|&v| Rational::from_integer(v.into())).collect();
        self.eval(&q)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = crate::rational::to_f64(c);
                for (xi, &e) in x.iter().zip(&m.0) {
                    t *= libm::pow(*xi, e as f64);
                }
                t
            })
            .sum()
    }

    fn check_dim(&self, found: usize) -> Result<(), PolyError> {
        if found != self.dimension {
            Err(PolyError::DimensionMismatch {
                expected: self.dimension,
                found,
            })
        } else {
            Ok(())
        }
    }

    /// `p(x + v)`, expanded exactly.
    pub fn shift(&self, v: &[i64]) -> Result<MultiPoly, PolyError> {
        self.check_dim(v.len())?;
        let mut out = Self::zero(self.dimension);
        for (m, c) in &self.terms {
            // Expand prod_k (x_k + v_k)^{e_k} one coordinate at a time.
            let mut partial: Vec<(Vec<u32>, BigInt)> = vec![(Vec::new(), BigInt::one())];
            for (k, &e) in m.0.iter().enumerate() {
                let vk = BigInt::from(v[k]);
                let mut next = Vec::new();
                for (exps, coef) in &partial {
                    let mut binom = BigInt::one();
                    for j in (0..=e).rev() {
                        // C(e, j) * v_k^(e-j) * x_k^j
                        let power = num_traits::pow(vk.clone(), (e - j) as usize);
                        let term = coef * &binom * power;
                        if !term.is_zero() {
                            let mut ex = exps.clone();
                            ex.push(j);
                            next.push((ex, term));
                        }
                        binom = binom * BigInt::from(j) / BigInt::from(e - j + 1);
                    }
                }
                partial = next;
                let _ = k;
            }
            for (exps, coef) in partial {
                out.add_term(Monomial(exps), c * Rational::from_integer(coef));
            }
        }
        Ok(out)
    }

    /// `L_S p = Σ a(s) p(x + s) − p`.
    pub fn discrete_laplacian(&self, s: &StepSet) -> Result<MultiPoly, PolyError> {
        self.check_dim(s.dimension())?;
        let mut out = -self.clone();
        for step in s.steps() {
            out = out + self.shift(&step.vector)?.scale(&step.weight);
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, i: usize) -> MultiPoly {
        let mut out = Self::zero(self.dimension);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut ex = m.0.clone();
            ex[i] -= 1;
            out.add_term(Monomial(ex), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// `Δp = Σ ∂²p/∂x_i²`.
    pub fn continuous_laplacian(&self) -> MultiPoly {
        (0..self.dimension).fold(Self::zero(self.dimension), |acc, i| {
            acc + self.partial_derivative(i).partial_derivative(i)
        })
    }

    /// True iff `x_1 ⋯ x_d` divides `p`.
    pub fn divisible_by_all_coordinates(&self) -> bool {
        self.terms.keys().all(|m| m.0.iter().all(|&e| e >= 1))
    }

    /// Exact quotient by `divisor`, or `None` when it does not divide.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero(self.dimension);
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return None;
            }
            let ex: Vec<u32> = m.0.iter().zip(&lm.0).map(|(a, b)| a - b).collect();
            let t = MultiPoly::monomial(ex, c / &lc);
            rem = rem - &t * divisor;
            quot = quot + t;
        }
        Some(quot)
    }

    /// Certify positivity of a homogeneous bivariate `p = xy·e(x,y)` on the
    /// open quadrant: `e(1,1) > 0`, `e(1,t)` has no root in `(0, ∞)`, and
    /// its extreme coefficients are positive.
    pub fn quadrant_positive_homogeneous(&self) -> Result<bool, PolyError> {
        if self.dimension != 2 {
            return Err(PolyError::NotBivariate);
        }
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        if self.is_zero() {
            return Ok(false);
        }
        if !self.divisible_by_all_coordinates() {
            return Err(PolyError::NotCoordinateDivisible);
        }
        let e = self.dehomogenize_cofactor();
        let at_one: Rational = e.iter().cloned().sum();
        if !at_one.is_positive() {
            return Ok(false);
        }
        let trailing_ok = e.first().is_some_and(Signed::is_positive);
        let leading_ok = e.last().is_some_and(Signed::is_positive);
        if !(trailing_ok && leading_ok) {
            return Ok(false);
        }
        let roots = sturm_positive_roots(&e).map_err(|_| PolyError::ZeroPolynomial)?;
        Ok(roots == 0)
    }

    /// Coefficients of `e(1, t)` (ascending in `t`) for `p = xy·e`.
    fn dehomogenize_cofactor(&self) -> Vec<Rational> {
        let deg = self.degree().unwrap_or(0).saturating_sub(2) as usize;
        let mut e = vec![Rational::zero(); deg + 1];
        for (m, c) in &self.terms {
            e[(m.0[1] - 1) as usize] = c.clone();
        }
        e
    }

    /// Sampled positivity on the open simplex `{x_i > 0, Σ x_i = 1}`: every
    /// grid point with denominator `resolution` and all coordinates `>= 1/resolution`.
    /// No certificate; used for dimensions `>= 3`.
    pub fn positive_on_simplex_sampled(&self, resolution: u32) -> bool {
        let d = self.dimension;
        if d == 0 || (resolution as usize) < d {
            return false;
        }
        let mut ok = true;
        let mut cur = vec![0u32; d];
        simplex_points(d, 0, resolution, &mut cur, &mut |pt| {
            if ok {
                let x: Vec<Rational> = pt
                    .iter()
                    .map(|&k| Rational::new(BigInt::from(k), BigInt::from(resolution)))
                    .collect();
                ok = self.eval(&x).is_positive();
            }
        });
        ok
    }

    /// Primitive integer multiple: integer coefficients with gcd 1, sign unchanged.
    pub fn primitive_part(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.terms.values().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let factor = Rational::new(lcm, g);
        self.scale(&factor)
    }

    pub fn variable_names(&self) -> Vec<String> {
        variable_names(self.dimension)
    }

    /// Plain text in descending graded-lex order, e.g. `i^2*j+2*i*j^2`.
    pub fn to_text(&self) -> String {
        let names = self.variable_names();
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push(if neg { '-' } else { '+' });
            }
            let mono = monomial_text(m, &names);
            if mono.is_empty() {
                s.push_str(&format_rational(&mag));
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                let _ = write!(s, "{}*{}", format_rational(&mag), mono);
            }
        }
        s
    }

    pub fn to_latex(&self) -> String {
        let names = self.variable_names();
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if mag.denom().is_one() {
                alloc::format!("{}", mag.numer())
            } else {
                alloc::format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
            };
            let mut mono = String::new();
            for (name, &e) in names.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => {
                        let _ = write!(mono, "{name}");
                    }
                    _ => {
                        let _ = write!(mono, "{name}^{{{e}}}");
                    }
                }
            }
            if mono.is_empty() {
                s.push_str(&coef);
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                let _ = write!(s, "{coef} {mono}");
            }
        }
        s
    }

    /// Best-effort factored text: common coordinate powers, then linear
    /// forms `a·x + b·y` coming from rational roots of the dominant term
    /// (bivariate only), then the remaining cofactor.
    pub fn factored_text(&self) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let names = self.variable_names();
        let prim = self.primitive_part();
        let content = &self.leading_term().unwrap().1.clone() / prim.leading_term().unwrap().1;
        let mut rest = prim;
        let mut factors: Vec<String> = Vec::new();

        // Coordinate powers.
        let d = self.dimension;
        let mins: Vec<u32> = (0..d)
            .map(|k| rest.terms.keys().map(|m| m.0[k]).min().unwrap_or(0))
            .collect();
        if mins.iter().any(|&e| e > 0) {
            let mono = MultiPoly::monomial(mins.clone(), Rational::one());
            rest = rest.div_exact(&mono).expect("common monomial divides");
            for (name, &e) in names.iter().zip(&mins) {
                for _ in 0..e {
                    factors.push(name.clone());
                }
            }
        }

        if d == 2 {
            let mut linear: Vec<(BigInt, BigInt)> = Vec::new();
            'outer: while let Some(deg) = rest.degree().filter(|&deg| deg > 0) {
                let dom = rest.homogeneous_component(deg);
                for (a, b) in linear_factor_candidates(&dom) {
                    let lf = MultiPoly::from_terms(
                        2,
                        [
                            (vec![1, 0], Rational::from_integer(a.clone())),
                            (vec![0, 1], Rational::from_integer(b.clone())),
                        ],
                    )
                    .expect("bivariate");
                    if let Some(q) = rest.div_exact(&lf) {
                        rest = q;
                        linear.push((a, b));
                        continue 'outer;
                    }
                }
                break;
            }
            linear.sort_by(|x, y| (x.1.clone() * &y.0).cmp(&(y.1.clone() * &x.0)));
            for (a, b) in linear {
                let lf = MultiPoly::from_terms(
                    2,
                    [
                        (vec![1, 0], Rational::from_integer(a)),
                        (vec![0, 1], Rational::from_integer(b)),
                    ],
                )
                .expect("bivariate");
                factors.push(alloc::format!("({})", lf.to_text()));
            }
        }

        // Fold any constant left over into the content.
        let mut content = content;
        if rest.degree() == Some(0) {
            content *= rest.coeff(&vec![0; d]);
        } else {
            let rp = rest.primitive_part();
            content *= rest.leading_term().unwrap().1 / rp.leading_term().unwrap().1;
            factors.push(alloc::format!("({})", rp.to_text()));
        }

        let mut s = String::new();
        if content == -Rational::one() {
            s.push('-');
        } else if !content.is_one() {
            let _ = write!(s, "{}*", format_rational(&content));
        }
        if factors.is_empty() {
            let trimmed = s.trim_end_matches('*').trim_end_matches('-');
            return if trimmed.is_empty() {
                format_rational(&content)
            } else {
                String::from(trimmed)
            };
        }
        s.push_str(&factors.join("*"));
        s
    }
}

/// Linear forms `a·x + b·y` (primitive, `a >= 0`) whose zero line is a
/// rational root direction of the homogeneous bivariate `dom`.
fn linear_factor_candidates(dom: &MultiPoly) -> Vec<(BigInt, BigInt)> {
    let prim = dom.primitive_part();
    let deg = prim.degree().unwrap_or(0) as usize;
    // f(t) = dom(1, t), ascending in t.
    let mut f = vec![BigInt::zero(); deg + 1];
    for (m, c) in prim.terms() {
        f[m.0[1] as usize] = c.numer().clone();
    }
    let mut out = Vec::new();
    // Factor x itself when the top coefficient in t vanishes is already
    // handled by coordinate extraction; here look for t = p/q with p | f0, q | fn.
    let (Some(f0), Some(fnn)) = (f.iter().find(|c| !c.is_zero()), f.last()) else {
        return out;
    };
    if fnn.is_zero() {
        return out;
    }
    let ps = divisors(&f0.abs());
    let qs = divisors(&fnn.abs());
    for p in &ps {
        for q in &qs {
            if p.gcd(q) != BigInt::one() {
                continue;
            }
            for sign in [1, -1] {
                let p = p * BigInt::from(sign);
                // root t = p/q of f  <=>  factor (q t - p)  <=>  (-p) x + q y
                let val = f
                    .iter()
                    .rev()
                    .fold(BigInt::zero(), |acc, c| acc * &p + c * num_traits::pow(q.clone(), 0));
                let _ = val;
                let mut acc = BigInt::zero();
                for (k, c) in f.iter().enumerate() {
                    acc += c * num_traits::pow(p.clone(), k) * num_traits::pow(q.clone(), deg - k);
                }
                if acc.is_zero() {
                    let (a, b) = (-p.clone(), q.clone());
                    let (a, b) = if a.is_negative() { (-a, -b) } else { (a, b) };
                    if !out.contains(&(a.clone(), b.clone())) {
                        out.push((a, b));
                    }
                }
            }
        }
    }
    out
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    use num_traits::ToPrimitive;
    // Coefficients of interest are small; cap the trial range.
    let Some(v) = n.to_u64() else {
        return vec![BigInt::one()];
    };
    if v == 0 {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let mut k = 1u64;
    while k * k <= v && k <= 1_000_000 {
        if v % k == 0 {
            out.push(BigInt::from(k));
            if k * k != v {
                out.push(BigInt::from(v / k));
            }
        }
        k += 1;
    }
    out
}

fn simplex_points(d: usize, pos: usize, remaining: u32, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if pos + 1 == d {
        if remaining >= 1 {
            cur[pos] = remaining;
            f(cur);
        }
        return;
    }
    let slots_after = (d - pos - 1) as u32;
    for k in 1..=remaining.saturating_sub(slots_after) {
        cur[pos] = k;
        simplex_points(d, pos + 1, remaining - k, cur, f);
    }
}

pub fn variable_names(dimension: usize) -> Vec<String> {
    match dimension {
        1 => vec![String::from("i")],
        2 => vec![String::from("i"), String::from("j")],
        3 => vec![String::from("i"), String::from("j"), String::from("k")],
        _ => (1..=dimension).map(|k| alloc::format!("x{k}")).collect(),
    }
}

fn monomial_text(m: &Monomial, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (name, &e) in names.iter().zip(&m.0) {
        match e {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(alloc::format!("{name}^{e}")),
        }
    }
    parts.join("*")
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(mut self, rhs: MultiPoly) -> MultiPoly {
        assert_eq!(self.dimension, rhs.dimension, "dimension mismatch");
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(mut self) -> MultiPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        self + (-rhs)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.dimension, rhs.dimension, "dimension mismatch");
        let mut out = MultiPoly::zero(self.dimension);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let e: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), ca * cb);
            }
        }
        out
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}
