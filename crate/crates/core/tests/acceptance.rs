//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use rwharm_core::cone::{
    cone_report, dihedral_group, invariance_check, ConeReport, Verdict, DEFAULT_N_MAX, DEFAULT_TOL,
};
use rwharm_core::harmonic::{find_harmonic, HarmonicOutcome, HarmonicResult, DEFAULT_R_MAX};
use rwharm_core::models;
use rwharm_core::oracle::{killed_distribution, long_jump_harmonic, relation_check, Survival};
use rwharm_core::prescribe::{
    build_chi3, q_from_d2, qt_family, solve_defd, two_param_q, verify_delp, FamilyCheck, FamilyParams, PrescribeError,
    Target3D,
};
use rwharm_core::rational::{format_rational, rat, Rational};
use rwharm_core::stepset::{normalized_covariance, validate, StepSet};
use rwharm_core::MultiPoly;

/// Dense bivariate polynomial, used as an expansion oracle independent of `MultiPoly`.
#[derive(Clone, Debug, PartialEq)]
struct Dense(BTreeMap<(u32, u32), Rational>);

impl Dense {
    fn linear(a: Rational, b: Rational, c: Rational) -> Dense {
        let mut m = BTreeMap::new();
        for (k, v) in [((1, 0), a), ((0, 1), b), ((0, 0), c)] {
            if !v.is_zero() {
                m.insert(k, v);
            }
        }
        Dense(m)
    }

    fn i() -> Dense {
        Dense::linear(Rational::one(), Rational::zero(), Rational::zero())
    }

    fn j() -> Dense {
        Dense::linear(Rational::zero(), Rational::one(), Rational::zero())
    }

    fn mul(&self, o: &Dense) -> Dense {
        let mut m: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for ((a1, b1), c1) in &self.0 {
            for ((a2, b2), c2) in &o.0 {
                *m.entry((a1 + a2, b1 + b2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        m.retain(|_, v| !v.is_zero());
        Dense(m)
    }

    fn add(&self, o: &Dense) -> Dense {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            *m.entry(*k).or_insert_with(Rational::zero) += v;
        }
        m.retain(|_, v| !v.is_zero());
        Dense(m)
    }

    fn product(factors: &[Dense]) -> Dense {
        let mut one = BTreeMap::new();
        one.insert((0, 0), Rational::one());
        factors.iter().fold(Dense(one), |acc, f| acc.mul(f))
    }

    fn from_poly(p: &MultiPoly) -> Dense {
        Dense(p.terms().map(|(m, c)| ((m.0[0], m.0[1]), c.clone())).collect())
    }

    /// `self = k · other` for some positive rational `k`.
    fn positively_proportional(&self, other: &Dense) -> bool {
        let Some((key, c)) = self.0.iter().next() else {
            return other.0.is_empty();
        };
        let Some(c2) = other.0.get(key) else { return false };
        let k = c / c2;
        k.is_positive()
            && self.0.len() == other.0.len()
            && other.0.iter().all(|(key, v)| self.0.get(key) == Some(&(v * &k)))
    }
}

fn lin(a: i64, b: i64) -> Dense {
    Dense::linear(rat(a, 1), rat(b, 1), Rational::zero())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn harmonic(s: &StepSet) -> Option<HarmonicResult> {
    find_harmonic(s, DEFAULT_R_MAX).ok()?.found().cloned()
}

fn cone(s: &StepSet) -> ConeReport {
    cone_report(&validate(s), DEFAULT_N_MAX, DEFAULT_TOL).expect("zero drift, positive definite")
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn criterion_1() -> Outcome {
    let ij = Dense::product(&[Dense::i(), Dense::j()]);
    let ij_ipj = Dense::product(&[Dense::i(), Dense::j(), lin(1, 1)]);
    let b2_walk = Dense::product(&[Dense::i(), Dense::j(), lin(1, 1), lin(1, 2)]);
    let cases = [
        ("simple", models::simple(), ij),
        ("tandem", models::tandem(), ij_ipj.clone()),
        ("long_jump", models::long_jump(), ij_ipj),
        ("b2_walk", models::b2_walk(), b2_walk),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, s, expected) in cases {
        let t = Instant::now();
        let found = harmonic(&s);
        let dt = t.elapsed();
        // Primitive normalization makes the scaling factor exactly 1.
        let ok = found
            .as_ref()
            .is_some_and(|r| Dense::from_poly(&r.polynomial) == expected)
            && dt < Duration::from_secs(1);
        pass &= ok;
        notes.push(format!("{name} {}", secs(dt)));
    }
    outcome(pass, notes.join(", "))
}

fn criterion_2() -> Outcome {
    let p3 = Dense::product(&[Dense::i(), Dense::j(), lin(1, 2)]);
    let p4 = Dense::product(&[Dense::i(), Dense::j(), lin(1, 2), lin(1, 1)]);
    let quad = Dense::product(&[
        Dense::linear(rat(1, 1), rat(2, 3), Rational::zero()),
        Dense::linear(rat(1, 1), rat(4, 3), Rational::zero()),
    ])
    .add(&Dense::linear(Rational::zero(), Rational::zero(), rat(10, 9)));
    let p6 = Dense::product(&[Dense::i(), Dense::j(), lin(1, 2), lin(1, 1), quad]);
    let t = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, expected) in [(3, p3), (4, p4), (6, p6)] {
        let r = harmonic(&models::dihedral_family(n));
        let ok = r
            .as_ref()
            .is_some_and(|r| Dense::from_poly(&r.polynomial).positively_proportional(&expected));
        let homogeneous = r.as_ref().is_some_and(|r| r.polynomial.is_homogeneous());
        pass &= ok && (homogeneous == (n != 6));
        notes.push(format!("n={n} {}", if ok { "match" } else { "mismatch" }));
    }
    let dt = t.elapsed();
    pass &= dt < Duration::from_secs(5);
    notes.push(secs(dt));
    outcome(pass, notes.join(", "))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let s = models::non_weyl();
    let not_found = matches!(find_harmonic(&s, 10), Ok(HarmonicOutcome::NotFound { r_max: 10 }));
    let c = cone(&s);
    let dt = t.elapsed();
    let pass = not_found && c.verdict == Verdict::NotWeylChamber && dt < Duration::from_secs(10);
    outcome(pass, format!("angle {:.6} rad, {}", c.wall_angles[0].angle, secs(dt)))
}

fn weyl_fixtures() -> Vec<(&'static str, StepSet)> {
    vec![
        ("simple", models::simple()),
        ("tandem", models::tandem()),
        ("long_jump", models::long_jump()),
        ("b2_walk", models::b2_walk()),
        ("dihedral_n3", models::dihedral_family(3)),
        ("dihedral_n4", models::dihedral_family(4)),
        ("dihedral_n6", models::dihedral_family(6)),
        ("diagonal", models::diagonal()),
        ("simple3", models::simple3()),
    ]
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for (name, s) in weyl_fixtures() {
        assert!(cone(&s).verdict.is_weyl(), "{name} is a Weyl fixture");
        match find_harmonic(&s, DEFAULT_R_MAX) {
            Ok(HarmonicOutcome::Found(r)) if r.kernel_dim == 1 => {}
            _ => bad.push(name),
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} fixtures, kernel_dim != 1: {:?}", weyl_fixtures().len(), bad),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for (name, s) in weyl_fixtures() {
        if s.dimension() != 2 || s.max_negative_jump() > 1 {
            continue;
        }
        let p = harmonic(&s).expect("Weyl fixture has a harmonic polynomial").polynomial;
        for i in 1..=5 {
            for j in 1..=5 {
                let x = [i, j];
                let px = p.eval_i64(&x);
                for n in 0..=8 {
                    let law = killed_distribution(&s, &x, n, Survival::OpenOrthant).unwrap();
                    let e: Rational = law.iter().map(|(y, w)| w * p.eval_i64(y)).sum();
                    checked += 1;
                    if e != px {
                        failures.push(format!("{name} x=({i},{j}) n={n}"));
                    }
                }
            }
        }
    }
    let dt = t.elapsed();
    let pass = failures.is_empty() && dt < Duration::from_secs(30);
    outcome(
        pass,
        format!("{checked} exact identities, {} failures, {}", failures.len(), secs(dt)),
    )
}

fn criterion_6() -> Outcome {
    let s = models::long_jump();
    let p = |x: &[i64]| {
        let (i, j) = (rat(x[0], 1), rat(x[1], 1));
        &i * &j * (&i + &j)
    };
    let fails = relation_check(&s, p, (1, 5), (1, 5));
    let on_column = fails.iter().all(|f| f.point[0] == 1);
    let whole_column = (2..=5).all(|j| fails.iter().any(|f| f.point == vec![1, j]));
    let at_12 = fails
        .iter()
        .find(|f| f.point == vec![1, 2])
        .is_some_and(|f| f.rhs == rat(19, 3) && f.lhs == rat(6, 1));
    let bm = relation_check(&s, |x: &[i64]| long_jump_harmonic(x[0], x[1]), (1, 8), (1, 8));
    let pass = on_column && whole_column && at_12 && bm.is_empty() && long_jump_harmonic(1, 1) == rat(8, 3);
    let pts: Vec<String> = fails
        .iter()
        .map(|f| format!("({},{})", f.point[0], f.point[1]))
        .collect();
    outcome(
        pass,
        format!(
            "ij(i+j) fails at {} (19/3 vs 6 at (1,2)); the long-jump harmonic function holds on [1,8]^2; f(1,1) = {}",
            pts.join(" "),
            format_rational(&long_jump_harmonic(1, 1))
        ),
    )
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize, max_deg: u32) -> MultiPoly {
    let terms = 1 + (rng.next_u32() % 6) as usize;
    let mut out = Vec::new();
    for _ in 0..terms {
        let mut e = vec![0u32; d];
        let mut budget = rng.next_u32() % (max_deg + 1);
        for slot in e.iter_mut() {
            let take = if budget == 0 { 0 } else { rng.next_u32() % (budget + 1) };
            *slot = take;
            budget -= take;
        }
        let c = (rng.next_u32() % 19) as i64 - 9;
        let den = 1 + (rng.next_u32() % 4) as i64;
        out.push((e, rat(c, den)));
    }
    MultiPoly::from_terms(d, out).unwrap()
}

fn criterion_7() -> Outcome {
    let diag = models::diagonal();
    let identity = validate(&diag).identity_covariance;
    let half = rat(1, 2);
    let mut half_laplacian_ok = identity;
    for e in [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
        let p = MultiPoly::monomial(e.to_vec(), Rational::one());
        half_laplacian_ok &= p.discrete_laplacian(&diag).unwrap() == p.continuous_laplacian().scale(&half);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut drop_ok = true;
    let mut count = 0;
    for (_, s) in weyl_fixtures().into_iter().chain([("nonweyl", models::non_weyl())]) {
        for _ in 0..100 {
            let p = random_poly(&mut rng, s.dimension(), 6);
            let l = p.discrete_laplacian(&s).unwrap();
            count += 1;
            drop_ok &= match (p.degree(), l.degree()) {
                (_, None) => true,
                (Some(dp), Some(dl)) => dl + 2 <= dp,
                (None, Some(_)) => false,
            };
        }
    }
    outcome(
        half_laplacian_ok && drop_ok,
        format!("identity-covariance model: L = Δ/2 on degree <= 2; degree drop on {count} random polynomials"),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let m = q_from_d2(&rat(3, 4)).unwrap();
    // 3(x ȳ + x̄ y) + x + x̄ has total mass 8.
    let raw = [([1, -1], 3), ([-1, 1], 3), ([1, 0], 1), ([-1, 0], 1)];
    let q_ok = m.len() == 4 && raw.iter().all(|(v, w)| m.weight_of(v) == Some(&rat(*w, 8)));
    let target = Target3D::exact(rat(1, 2), rat(1, 4), Rational::zero(), None).unwrap();
    let d_ok = solve_defd(&target, 128)
        .map(|s| s.d_sq == rat(3, 4) && s.exact)
        .unwrap_or(false);
    let b3_ok = build_chi3(&target, 128)
        .map(|c| {
            let nc = normalized_covariance(&validate(&c.model)).unwrap();
            let want = [-(PI / 4.0).cos(), -(PI / 3.0).cos(), 0.0];
            verify_delp(&c.block_model, &c.alpha, &c.beta, &c.d_sq)
                && [(0, 1), (0, 2), (1, 2)]
                    .iter()
                    .zip(want)
                    .all(|(&(i, j), w)| (nc.entry_f64(i, j) - w).abs() < 1e-12)
                && cone(&c.model).verdict == Verdict::WeylChamber("B3".into())
        })
        .unwrap_or(false);
    let h3 = Target3D::from_floats((PI / 5.0).cos(), 0.5, 0.0).unwrap();
    let h3_ok = build_chi3(&h3, 128)
        .map(|c| {
            let r = cone(&c.model);
            let mut angles: Vec<f64> = r.wall_angles.iter().map(|w| w.angle).collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let want = [PI / 5.0, PI / 3.0, PI / 2.0];
            angles.iter().zip(want).all(|(a, w)| (a - w).abs() < 1e-9) && r.verdict == Verdict::WeylChamber("H3".into())
        })
        .unwrap_or(false);
    let dt = t.elapsed();
    let pass = q_ok && d_ok && b3_ok && h3_ok && dt < Duration::from_secs(5);
    outcome(
        pass,
        format!("q={q_ok} defd={d_ok} B3={b3_ok} H3={h3_ok}, {}", secs(dt)),
    )
}

fn criterion_9() -> Outcome {
    let cos2 = rat(3, 4);
    let mut pass = true;
    let values = [rat(1, 100), rat(1, 25), rat(9, 64), rat(1, 5), rat(6, 25)];
    for t2 in &values {
        let p = FamilyParams::new(cos2.clone(), t2.clone()).unwrap();
        let s = qt_family(&p).unwrap();
        let nc = normalized_covariance(&validate(&s)).unwrap();
        let [c, t, k] = p.qt_coefficients();
        let printed = (rat(3, 1) - rat(12, 1) * t2) / (rat(12, 1) + rat(16, 1) * t2);
        // Normalized weights are the raw coefficients over their total mass.
        let mass = rat(2, 1) * (&c + &t + &k);
        let weights_ok = s.weight_of(&[0, 1]) == Some(&(&printed / &mass))
            && s.weight_of(&[1, -1]) == Some(&(&cos2 / &mass))
            && s.weight_of(&[1, 0]) == Some(&(t2 / &mass));
        pass &= nc.squared[(0, 1)] == cos2 && nc.signs[0][1] < 0 && c == cos2 && &t == t2 && k == printed && weights_ok;
    }
    let shown: Vec<String> = values.iter().map(format_rational).collect();
    outcome(pass, format!("t^2 in {{{}}}", shown.join(", ")))
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let basic = [
        ("simple", models::simple()),
        ("tandem", models::tandem()),
        ("long_jump", models::long_jump()),
        ("b2_walk", models::b2_walk()),
    ];
    for (name, s) in basic {
        let c = cone(&s);
        let n = c.dihedral_order().unwrap();
        let g = dihedral_group(n, &c).unwrap();
        let inv = invariance_check(&s, &g, 1e-9);
        let dom = harmonic(&s).unwrap().polynomial.dominant_term().unwrap();
        let dom_harmonic = dom.discrete_laplacian(&s).unwrap().is_zero();
        pass &= inv && dom_harmonic;
        notes.push(format!("{name}: invariant={inv} dominant-harmonic={dom_harmonic}"));
    }
    let s = models::dihedral_family(6);
    let c = cone(&s);
    let g = dihedral_group(6, &c).unwrap();
    let inv = invariance_check(&s, &g, 1e-9);
    let dom = harmonic(&s).unwrap().polynomial.dominant_term().unwrap();
    let residual_nonzero = !dom.discrete_laplacian(&s).unwrap().is_zero();
    pass &= !inv && residual_nonzero;
    notes.push(format!(
        "dihedral_n6: invariant={inv} dominant-residual-nonzero={residual_nonzero}"
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_11() -> Outcome {
    let drift = matches!(
        two_param_q(&rat(1, 2), &Rational::zero(), &Rational::zero()),
        Err(PrescribeError::InvalidFamily(ref check)) if **check == FamilyCheck::Drift(vec![rat(-1, 1), rat(-1, 1)])
    );
    let cov = matches!(
        two_param_q(&rat(1, 2), &Rational::zero(), &rat(1, 2)),
        Err(PrescribeError::InvalidFamily(ref check))
            if matches!(**check, FamilyCheck::Covariance { ref found_sq, found_sign: -1, .. } if *found_sq == rat(9, 49))
    );
    outcome(
        drift && cov,
        "(1/2,0,0) rejected on drift (-1,-1); (1/2,0,1/2) rejected on covariance (-3/7 vs -1/2)",
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("basic model polynomials", criterion_1),
        ("dihedral family P3, P4, P6", criterion_2),
        ("negative control", criterion_3),
        ("kernel dimension one", criterion_4),
        ("exact martingale identity", criterion_5),
        ("boundary-jump counterexample", criterion_6),
        ("Laplacian comparison and degree drop", criterion_7),
        ("covariance prescription", criterion_8),
        ("one-parameter family", criterion_9),
        ("group invariance", criterion_10),
        ("three-parameter validator", criterion_11),
    ];
    let mut passed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if o.pass {
            passed += 1;
        }
        println!(
            "criterion {:>2} [{}] {}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
