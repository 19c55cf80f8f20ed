use proptest::prelude::*;

use num_traits::{One, Signed, Zero};

use crate::cone::{
    cone_report, dihedral_group, invariance_check, p0_discrete_harmonicity_check, p0_eval, DEFAULT_N_MAX, DEFAULT_TOL,
};
use crate::harmonic::{find_harmonic, DEFAULT_R_MAX};
use crate::linalg::{inv_sqrt_sym, nullspace, sturm_positive_roots, QMatrix};
use crate::models;
use crate::oracle::{dp_expectation, dp_survival, Survival};
use crate::prescribe::{build_chi3, defd_lhs, q_from_d2, qt_family, solve_defd, verify_delp, FamilyParams, Target3D};
use crate::rational::{rat, to_f64, Rational};
use crate::stepset::{inventory_second_derivatives, normalized_covariance, validate, NormalizedCovariance, StepSet};
use crate::MultiPoly;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(small_rational(), rows * cols).prop_map(move |e| QMatrix::from_vec(rows, cols, e).unwrap())
}

fn poly2(max_deg: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0..=max_deg), (0..=max_deg), small_rational()), 1..6).prop_map(move |terms| {
        MultiPoly::from_terms(
            2,
            terms
                .into_iter()
                .filter(|(a, b, _)| a + b <= max_deg)
                .map(|(a, b, c)| (vec![a, b], c)),
        )
        .unwrap()
    })
}

/// Symmetric models `±v` with equal weight per pair: zero drift by construction.
fn symmetric_model() -> impl Strategy<Value = StepSet> {
    prop::collection::btree_map((-2i64..=2, -2i64..=2), 1i64..=5, 2..5).prop_filter_map("degenerate", |pairs| {
        let mut raw = Vec::new();
        for ((a, b), w) in pairs {
            if (a, b) == (0, 0) {
                continue;
            }
            raw.push((vec![a, b], rat(w, 1)));
            raw.push((vec![-a, -b], rat(w, 1)));
        }
        let s = StepSet::from_raw(2, raw).ok()?;
        normalized_covariance(&validate(&s)).ok()?;
        Some(s)
    })
}

fn eval_shift(p: &MultiPoly, x: &[i64], v: &[i64]) -> Rational {
    let y: Vec<i64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
    p.eval_i64(&y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nullspace_vectors_annihilate_and_complete_rank(m in (1usize..5, 1usize..6).prop_flat_map(|(r, c)| matrix(r, c))) {
        let basis = nullspace(&m);
        for v in &basis {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
            let first = v.iter().find(|x| !x.is_zero()).unwrap();
            prop_assert!(first.is_positive());
            prop_assert!(v.iter().all(|x| x.denom().is_one()));
        }
        prop_assert_eq!(m.rank() + basis.len(), m.cols());
    }

    #[test]
    fn inverse_square_root_whitens(a in matrix(3, 3)) {
        // AᵀA + I is symmetric positive definite.
        let m = {
            let ata = a.transpose().mul(&a).unwrap();
            let mut m = ata;
            for i in 0..3 { m[(i, i)] += Rational::one(); }
            m
        };
        let z = inv_sqrt_sym(&m, 128).unwrap();
        let zf = z.to_f64();
        for (i, row) in zf.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                prop_assert!((x - zf[j][i]).abs() < 1e-12);
            }
        }
        let mf: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| to_f64(&m[(i, j)])).collect()).collect();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 { for l in 0..3 { acc += zf[i][k] * mf[k][l] * zf[l][j]; } }
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((acc - want).abs() < 1e-9, "entry {} {} = {}", i, j, acc);
            }
        }
    }

    #[test]
    fn sturm_never_undercounts_sampled_sign_changes(coeffs in prop::collection::vec(-6i64..=6, 2..=9)) {
        let c: Vec<Rational> = coeffs.iter().map(|&x| rat(x, 1)).collect();
        prop_assume!(c.iter().any(|x| !x.is_zero()));
        let count = sturm_positive_roots(&c).unwrap();
        let eval = |t: f64| coeffs.iter().rev().fold(0.0, |acc, &k| acc * t + k as f64);
        let mut changes = 0;
        let mut last = eval(1e-4);
        for k in 1..10_000 {
            let v = eval(1e-4 + k as f64 * 1e-3);
            if v != 0.0 && last != 0.0 && (v > 0.0) != (last > 0.0) { changes += 1; }
            if v != 0.0 { last = v; }
        }
        prop_assert!(count >= changes);
    }

    #[test]
    fn sturm_is_exact_on_squarefree_products(roots in prop::collection::btree_set(-8i64..=8, 1..6)) {
        // prod (t - r/2) over distinct r
        let mut c = vec![Rational::one()];
        for r in &roots {
            let root = rat(*r, 2);
            let mut next = vec![Rational::zero(); c.len() + 1];
            for (k, a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * &root;
            }
            c = next;
        }
        let positive = roots.iter().filter(|&&r| r > 0).count();
        prop_assert_eq!(sturm_positive_roots(&c).unwrap(), positive);
    }

    #[test]
    fn from_raw_normalizes_and_inventory_matches(s in symmetric_model()) {
        let total: Rational = s.steps().iter().map(|st| st.weight.clone()).sum();
        prop_assert!(total.is_one());
        let r = validate(&s);
        let direct = normalized_covariance(&r).unwrap();
        // For zero drift the inventory Hessian is the second moment minus its diagonal drift term.
        let h = inventory_second_derivatives(&s).unwrap();
        let mut m = h.clone();
        for i in 0..2 { m[(i, i)] += &r.drift[i]; }
        let via_inventory = NormalizedCovariance::from_moments(&m).unwrap();
        prop_assert_eq!(direct, via_inventory);
    }

    #[test]
    fn shifts_compose(p in poly2(5), u in prop::array::uniform2(-3i64..=3), v in prop::array::uniform2(-3i64..=3)) {
        let w = [u[0] + v[0], u[1] + v[1]];
        prop_assert_eq!(p.shift(&u).unwrap().shift(&v).unwrap(), p.shift(&w).unwrap());
    }

    #[test]
    fn laplacian_is_linear_and_pointwise(p in poly2(5), q in poly2(5), c in small_rational(),
                                         s in symmetric_model(), x in prop::array::uniform2(-20i64..=20)) {
        let lp = p.discrete_laplacian(&s).unwrap();
        let lq = q.discrete_laplacian(&s).unwrap();
        let combo = (p.clone() + q.scale(&c)).discrete_laplacian(&s).unwrap();
        prop_assert_eq!(combo, lp.clone() + lq.scale(&c));
        let pointwise: Rational = s.steps().iter().map(|st| &st.weight * eval_shift(&p, &x, &st.vector)).sum::<Rational>()
            - p.eval_i64(&x);
        prop_assert_eq!(lp.eval_i64(&x), pointwise);
    }

    #[test]
    fn zero_drift_lowers_degree_by_two(p in poly2(7), s in symmetric_model()) {
        let l = p.discrete_laplacian(&s).unwrap();
        if let (Some(dp), Some(dl)) = (p.degree(), l.degree()) {
            prop_assert!(dl + 2 <= dp);
        }
    }

    #[test]
    fn identity_covariance_matches_half_laplacian(p in poly2(2)) {
        let s = models::diagonal();
        prop_assert_eq!(p.discrete_laplacian(&s).unwrap(), p.continuous_laplacian().scale(&rat(1, 2)));
    }

    #[test]
    fn p0_is_homogeneous(lambda in 0.1f64..5.0, x in prop::array::uniform2(0.1f64..10.0)) {
        for (s, n) in [(models::tandem(), 3u32), (models::b2_walk(), 4), (models::dihedral_family(6), 6)] {
            let c = cone_report(&validate(&s), DEFAULT_N_MAX, DEFAULT_TOL).unwrap();
            let a = p0_eval(&c, n, [lambda * x[0], lambda * x[1]]).unwrap();
            let b = lambda.powi(n as i32) * p0_eval(&c, n, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn q_from_d2_round_trips(n in 1i64..50, d in 1i64..50) {
        prop_assume!(n < d);
        let d_sq = rat(n, d);
        let s = q_from_d2(&d_sq).unwrap();
        let r = validate(&s);
        prop_assert!(r.zero_drift);
        let nc = normalized_covariance(&r).unwrap();
        prop_assert_eq!(&nc.squared[(0, 1)], &d_sq);
    }

    #[test]
    fn qt_family_round_trips(c in 1i64..20, t in 1i64..400) {
        let cos2 = rat(c, 20);
        let t_sq = rat(t, 400);
        prop_assume!(t_sq < Rational::one() - &cos2);
        let p = FamilyParams::new(cos2.clone(), t_sq).unwrap();
        let s = qt_family(&p).unwrap();
        let r = validate(&s);
        prop_assert!(r.zero_drift);
        prop_assert_eq!(&normalized_covariance(&r).unwrap().squared[(0, 1)], &cos2);
    }

    #[test]
    fn closed_form_covariance_of_symmetric_blocks(q in 1i64..12, a in 1i64..8, b in 1i64..8, den in 1i64..4) {
        // Symmetric planar block q(x ȳ + x̄ y) + x + x̄ + y + ȳ has off-diagonal −q/(1+q).
        let q = rat(q, 1);
        let (alpha, beta) = (rat(a, den), rat(b, den));
        let block = |u: usize, v: usize, w: &Rational| -> Vec<(Vec<i64>, Rational)> {
            let mut out = Vec::new();
            for (s, c) in [([1, -1], q.clone()), ([-1, 1], q.clone()), ([1, 0], Rational::one()),
                           ([-1, 0], Rational::one()), ([0, 1], Rational::one()), ([0, -1], Rational::one())] {
                let mut t = vec![0i64; 3];
                t[u] = s[0];
                t[v] = s[1];
                out.push((t, c * w));
            }
            out
        };
        let mut raw = block(0, 1, &Rational::one());
        raw.extend(block(2, 1, &alpha));
        raw.extend(block(0, 2, &beta));
        let s = StepSet::from_raw(3, raw).unwrap();
        let d = &q / (&q + Rational::one());
        prop_assert!(verify_delp(&s, &alpha, &beta, &(&d * &d)));
    }

    #[test]
    fn chi3_round_trips(a in 0i64..6, b in 0i64..6, c in 0i64..6) {
        let (a, b, c) = (rat(a, 10), rat(b, 10), rat(c, 10));
        let t = Target3D::exact(&a * &a, &b * &b, &c * &c, Some(&a * &b * &c)).unwrap();
        prop_assume!(!t.sum_of_squares().is_zero() && t.delta_positive_definite());
        let sol = solve_defd(&t, 128).unwrap();
        if let Some(d) = &sol.d {
            let res = to_f64(&(defd_lhs(&t, d) - Rational::one())).abs();
            prop_assert!(res < 2f64.powi(-64));
        }
        let chi = build_chi3(&t, 128).unwrap();
        let r = validate(&chi.model);
        prop_assert!(r.zero_drift);
        let nc = normalized_covariance(&r).unwrap();
        for ((i, j), want) in [((0, 1), &a), ((0, 2), &b), ((1, 2), &c)] {
            prop_assert!((nc.entry_f64(i, j) + to_f64(want)).abs() < 1e-12);
        }
    }

    #[test]
    fn survival_is_nonincreasing(i in 1i64..5, j in 1i64..5, n in 0u32..6) {
        for s in [models::simple(), models::tandem(), models::long_jump()] {
            let a = dp_survival(&s, &[i, j], n, Survival::OpenOrthant).unwrap();
            let b = dp_survival(&s, &[i, j], n + 1, Survival::OpenOrthant).unwrap();
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn step_order_does_not_change_the_solution(seed in any::<u64>()) {
        let s = models::dihedral_family(6);
        let mut steps: Vec<(Vec<i64>, Rational)> = s.steps().iter().map(|st| (st.vector.clone(), st.weight.clone())).collect();
        let k = (seed % steps.len() as u64) as usize;
        steps.rotate_left(k);
        if seed % 2 == 0 { steps.reverse(); }
        let shuffled = StepSet::new(2, steps).unwrap();
        let a = find_harmonic(&s, DEFAULT_R_MAX).unwrap();
        let b = find_harmonic(&shuffled, DEFAULT_R_MAX).unwrap();
        prop_assert_eq!(a.found().unwrap().polynomial.clone(), b.found().unwrap().polynomial.clone());
    }
}

fn weyl_2d() -> Vec<StepSet> {
    vec![
        models::simple(),
        models::tandem(),
        models::long_jump(),
        models::b2_walk(),
        models::dihedral_family(3),
        models::dihedral_family(4),
        models::dihedral_family(6),
        models::diagonal(),
    ]
}

#[test]
fn found_polynomials_are_harmonic_pointwise() {
    for s in weyl_2d() {
        let p = find_harmonic(&s, DEFAULT_R_MAX)
            .unwrap()
            .found()
            .unwrap()
            .polynomial
            .clone();
        assert!(p.divisible_by_all_coordinates());
        for i in -6..=6 {
            for j in -6..=6 {
                let x = [i, j];
                let mean: Rational = s
                    .steps()
                    .iter()
                    .map(|st| &st.weight * eval_shift(&p, &x, &st.vector))
                    .sum();
                assert_eq!(mean, p.eval_i64(&x));
            }
        }
    }
}

#[test]
fn dominant_term_is_proportional_to_p0() {
    for s in weyl_2d() {
        let c = cone_report(&validate(&s), DEFAULT_N_MAX, DEFAULT_TOL).unwrap();
        let n = c.dihedral_order().unwrap();
        let dom = find_harmonic(&s, DEFAULT_R_MAX)
            .unwrap()
            .found()
            .unwrap()
            .polynomial
            .dominant_term()
            .unwrap();
        let mut ratios = Vec::new();
        for k in 0..50 {
            let x = [0.3 + 0.17 * k as f64, 4.1 - 0.07 * k as f64];
            ratios.push(dom.eval_f64(&x) / p0_eval(&c, n, x).unwrap());
        }
        let first = ratios[0];
        assert!(first > 0.0);
        assert!(ratios.iter().all(|r| ((r - first) / first).abs() < 1e-8));
    }
}

#[test]
fn invariance_implies_p0_harmonicity() {
    for s in weyl_2d() {
        let c = cone_report(&validate(&s), DEFAULT_N_MAX, DEFAULT_TOL).unwrap();
        let n = c.dihedral_order().unwrap();
        let g = dihedral_group(n, &c).unwrap();
        if invariance_check(&s, &g, 1e-9) {
            assert!(p0_discrete_harmonicity_check(&s, &c, n, 8, 1e-9));
            let dom = find_harmonic(&s, DEFAULT_R_MAX)
                .unwrap()
                .found()
                .unwrap()
                .polynomial
                .dominant_term()
                .unwrap();
            assert!(dom.discrete_laplacian(&s).unwrap().is_zero());
        }
    }
}

#[test]
fn long_jump_model_expectation_differs_only_where_the_long_jump_lands_off_the_axes() {
    let s = models::long_jump();
    let p = find_harmonic(&s, DEFAULT_R_MAX)
        .unwrap()
        .found()
        .unwrap()
        .polynomial
        .clone();
    assert!(p.discrete_laplacian(&s).unwrap().is_zero());
    for i in 1..=5 {
        for j in 1..=5 {
            let e = dp_expectation(&s, &p, &[i, j], 1, Survival::OpenOrthant).unwrap();
            // only (-2,0) from i = 1 reaches a point where P is nonzero
            let exits = i == 1 && j >= 2;
            assert_eq!(e != p.eval_i64(&[i, j]), exits, "at ({i},{j})");
        }
    }
}
