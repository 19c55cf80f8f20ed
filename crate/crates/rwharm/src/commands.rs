//! The subcommands as pure functions from parsed inputs to a JSON report,
//! a human summary and an exit code.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, ensure, Result};
use serde_json::{json, Value};

use rwharm_core::cone::{
    cone_report_with_precision, dihedral_group, invariance_check, p0_discrete_harmonicity_check, p0_eval, ConeReport,
    Verdict,
};
use rwharm_core::harmonic::{crosscheck_with_cone, find_harmonic, HarmonicOutcome};
use rwharm_core::oracle::{dp_expectation_fn, dp_survival, long_jump_harmonic, mc_survival, Survival};
use rwharm_core::prescribe::{build_chi3, q_from_d2, qt_family, rt_family, FamilyParams, PrescribeError, Target3D};
use rwharm_core::rational::{format_rational, to_f64};
use rwharm_core::stepset::{normalized_covariance, validate, MomentReport};
use rwharm_core::{MultiPoly, Rational, StepSet};

use crate::io::{rationals, ModelJson, PolyJson};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_WEYL: u8 = 3;
pub const EXIT_NOT_FOUND: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub summary: String,
    pub code: u8,
}

/// Cone-geometry settings shared by several commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub n_max: u32,
    pub tol: f64,
    pub precision_bits: u32,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            n_max: rwharm_core::cone::DEFAULT_N_MAX,
            tol: rwharm_core::cone::DEFAULT_TOL,
            precision_bits: 128,
        }
    }
}

fn matrix_json(m: &rwharm_core::linalg::QMatrix) -> Value {
    json!((0..m.rows()).map(|i| rationals(m.row(i))).collect::<Vec<_>>())
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::WeylChamber(_) => "weyl_chamber",
        Verdict::NotWeylChamber => "not_weyl_chamber",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn moments_json(m: &MomentReport) -> Value {
    json!({
        "drift": rationals(&m.drift),
        "zero_drift": m.zero_drift,
        "covariance": matrix_json(&m.second_moment),
    })
}

pub fn cone_json(c: &ConeReport) -> Value {
    let walls: Vec<Value> = c
        .wall_angles
        .iter()
        .map(|w| {
            json!({
                "walls": [w.i, w.j],
                "angle": w.angle,
                "angle_over_pi": w.angle / PI,
                "order": w.order,
                "cos_sq": w.exact_cos_sq.as_ref().map(|(q, _)| format_rational(q)),
            })
        })
        .collect();
    json!({
        "angles": c.wall_angles.iter().map(|w| w.angle).collect::<Vec<_>>(),
        "orders": c.coxeter_orders,
        "group": c.verdict.group(),
        "verdict": verdict_name(&c.verdict),
        "reflections": c.reflection_count(),
        "normalized_covariance_squared": matrix_json(&c.normalized.squared),
        "normalized_covariance_signs": c.normalized.signs,
        "whitening": c.z_f64(),
        "wall_angles": walls,
    })
}

fn cone_for(s: &StepSet, g: &Geometry) -> Result<ConeReport> {
    let m = validate(s);
    ensure!(
        m.zero_drift,
        "model has nonzero drift ({})",
        rationals(&m.drift).join(", ")
    );
    Ok(cone_report_with_precision(&m, g.n_max, g.tol, g.precision_bits)?)
}

fn cone_summary(c: &ConeReport) -> String {
    let angles: Vec<String> = c
        .wall_angles
        .iter()
        .map(|w| match w.order {
            Some(m) => format!("pi/{m}"),
            None => format!("{:.6} rad", w.angle),
        })
        .collect();
    match &c.verdict {
        Verdict::WeylChamber(g) => format!("Weyl chamber of {g}; angles {}", angles.join(", ")),
        Verdict::NotWeylChamber => format!("not a Weyl chamber; angles {}", angles.join(", ")),
        Verdict::Indeterminate => format!("indeterminate within tolerance; angles {}", angles.join(", ")),
    }
}

pub fn analyze(s: &StepSet, g: &Geometry) -> Result<Outcome> {
    let m = validate(s);
    let cone = cone_for(s, g)?;
    let mut json = cone_json(&cone);
    json["dimension"] = json!(s.dimension());
    json["moments"] = moments_json(&m);
    let code = if cone.verdict.is_weyl() { EXIT_OK } else { EXIT_NOT_WEYL };
    Ok(Outcome {
        json,
        summary: cone_summary(&cone),
        code,
    })
}

fn poly_fields(p: &MultiPoly, json: &mut Value) {
    let pj = PolyJson::from_poly(p);
    json["dimension"] = json!(pj.dimension);
    json["terms"] = serde_json::to_value(&pj.terms).expect("terms serialize");
    json["text"] = json!(p.to_text());
    json["factored"] = json!(p.factored_text());
    json["latex"] = json!(p.to_latex());
}

/// The output carries `dimension` and `terms` at top level, so it can be
/// passed back as a polynomial file.
pub fn harmonic(s: &StepSet, r_max: u32, g: &Geometry) -> Result<Outcome> {
    let outcome = find_harmonic(s, r_max)?;
    let cone = cone_for(s, g).ok();
    let cone_json_value = cone
        .as_ref()
        .map(|c| json!({"group": c.verdict.group(), "verdict": verdict_name(&c.verdict)}));
    match outcome {
        HarmonicOutcome::Found(r) => {
            let mut json = json!({
                "degree": r.degree,
                "kernel_dim": r.kernel_dim,
                "positivity": r.positivity,
                "positivity_certified": r.positivity_certified,
                "experimental": r.experimental,
                "predicted_degree": cone.as_ref().and_then(|c| c.reflection_count()),
                "crosscheck": cone_json_value,
                "crosscheck_consistent": cone.as_ref().map(|c| crosscheck_with_cone(&r, c)),
            });
            poly_fields(&r.polynomial, &mut json);
            let mut summary = format!(
                "degree {}: {}\nfactored: {}",
                r.degree,
                r.polynomial.to_text(),
                r.polynomial.factored_text()
            );
            if r.experimental {
                summary.push_str("\nexperimental: existence is not guaranteed in dimension >= 3");
            }
            Ok(Outcome {
                json,
                summary,
                code: EXIT_OK,
            })
        }
        HarmonicOutcome::Anomaly {
            degree,
            kernel_dim,
            basis,
        } => {
            let json = json!({
                "degree": degree,
                "kernel_dim": kernel_dim,
                "basis": basis.iter().map(PolyJson::from_poly).collect::<Vec<_>>(),
                "crosscheck": cone_json_value,
            });
            let summary = format!("kernel of dimension {kernel_dim} at degree {degree}; no unique polynomial");
            Ok(Outcome {
                json,
                summary,
                code: EXIT_NOT_FOUND,
            })
        }
        HarmonicOutcome::NotFound { r_max } => {
            let json = json!({"degree": null, "r_max": r_max, "crosscheck": cone_json_value});
            let mut summary = format!("no harmonic polynomial vanishing on the axes up to degree {r_max}");
            if let Some(c) = cone.as_ref().filter(|c| !c.verdict.is_weyl()) {
                let _ = write!(summary, "; the cone is {}, so none is expected", cone_summary(c));
            }
            Ok(Outcome {
                json,
                summary,
                code: EXIT_NOT_FOUND,
            })
        }
    }
}

/// Function checked by `verify`.
pub enum Target<'a> {
    Poly(&'a MultiPoly),
    /// The closed-form positive harmonic function of the model with the `(-2, 0)` jump.
    LongJump,
}

impl Target<'_> {
    fn eval(&self, x: &[i64]) -> Rational {
        match self {
            Target::Poly(p) => p.eval_i64(x),
            Target::LongJump => long_jump_harmonic(x[0], x[1]),
        }
    }

    fn dimension(&self) -> usize {
        match self {
            Target::Poly(p) => p.dimension(),
            Target::LongJump => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Every coordinate ranges over `lo..=hi`.
    pub grid: (i64, i64),
    /// Expectations are checked for `n = 1..=steps`.
    pub steps: u32,
    pub survival: Survival,
    pub monte_carlo: Option<MonteCarlo>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: (1, 8),
            steps: 2,
            survival: Survival::OpenOrthant,
            monte_carlo: None,
        }
    }
}

fn grid_points(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut points = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    points
}

fn check_json(point: &[i64], lhs: &Rational, rhs: &Rational) -> Value {
    json!({"point": point, "lhs": format_rational(lhs), "rhs": format_rational(rhs), "pass": lhs == rhs})
}

/// One-step relation on the closed orthant and exact killed expectations
/// `E_x[f(x+S(n)); τ > n] = f(x)` at every grid point.
pub fn verify(s: &StepSet, f: &Target<'_>, opts: &VerifyOptions) -> Result<Outcome> {
    let d = s.dimension();
    ensure!(
        f.dimension() == d,
        "function has dimension {} but the model has dimension {d}",
        f.dimension()
    );
    let (lo, hi) = opts.grid;
    ensure!(1 <= lo && lo <= hi, "grid must satisfy 1 <= lo <= hi");
    let mut relation = Vec::new();
    let mut expectation = Vec::new();
    let mut failures: Vec<Value> = Vec::new();
    for x in grid_points(d, lo, hi) {
        let lhs = f.eval(&x);
        let rhs = dp_expectation_fn(s, |y| f.eval(y), &x, 1, Survival::ClosedOrthant)?;
        if lhs != rhs {
            failures.push(json!({"point": x, "check": "relation"}));
        }
        relation.push(check_json(&x, &lhs, &rhs));
        for n in 1..=opts.steps {
            let rhs = dp_expectation_fn(s, |y| f.eval(y), &x, n, opts.survival)?;
            if lhs != rhs {
                failures.push(json!({"point": x, "check": "expectation", "n": n}));
            }
            let mut entry = check_json(&x, &lhs, &rhs);
            entry["n"] = json!(n);
            expectation.push(entry);
        }
    }
    let mut json = json!({
        "relation": relation,
        "expectation": expectation,
        "survival_convention": match opts.survival {
            Survival::OpenOrthant => "open",
            Survival::ClosedOrthant => "closed",
        },
    });
    if let Some(mc) = opts.monte_carlo {
        let x = vec![lo; d];
        let exact = dp_survival(s, &x, opts.steps, opts.survival)?;
        let est = mc_survival(s, &x, opts.steps, mc.samples, mc.seed, opts.survival)?;
        let agree = (est.mean - to_f64(&exact)).abs() <= 4.0 * est.stderr.max(1e-12);
        if !agree {
            failures.push(json!({"point": x, "check": "monte_carlo"}));
        }
        json["monte_carlo"] = json!({
            "point": x,
            "n": opts.steps,
            "exact": format_rational(&exact),
            "mean": est.mean,
            "stderr": est.stderr,
            "samples": est.samples,
            "seed": mc.seed,
            "pass": agree,
        });
    }
    let pass = failures.is_empty();
    let summary = if pass {
        format!(
            "all {} relation and {} expectation checks pass",
            relation.len(),
            expectation.len()
        )
    } else {
        let pts: Vec<String> = failures.iter().map(|v| v.to_string()).collect();
        format!("{} failures:\n{}", failures.len(), pts.join("\n"))
    };
    json["failures"] = json!(failures);
    json["pass"] = json!(pass);
    Ok(Outcome {
        json,
        summary,
        code: if pass { EXIT_OK } else { EXIT_VERIFY },
    })
}

/// Group invariance of the step set, discrete harmonicity of `P0`, and
/// proportionality of the solver's dominant term to `P0`.
pub fn p0check(s: &StepSet, grid: i64, r_max: u32, g: &Geometry) -> Result<Outcome> {
    ensure!(s.dimension() == 2, "p0check needs a planar model");
    ensure!(grid >= 1, "grid must be at least 1");
    let cone = cone_for(s, g)?;
    let Some(n) = cone.dihedral_order() else {
        let json = json!({"verdict": verdict_name(&cone.verdict), "group": null});
        return Ok(Outcome {
            json,
            summary: cone_summary(&cone),
            code: EXIT_NOT_WEYL,
        });
    };
    let group = dihedral_group(n, &cone)?;
    let invariant = invariance_check(s, &group, g.tol.max(1e-9));
    let harmonic = p0_discrete_harmonicity_check(s, &cone, n, grid, 1e-8);
    let dominant = match find_harmonic(s, r_max)? {
        HarmonicOutcome::Found(r) => Some(r.polynomial.dominant_term()?),
        _ => None,
    };
    let proportional = dominant.as_ref().map(|dom| {
        let ratios: Vec<f64> = (0..40)
            .map(|k| {
                let x = [0.3 + 0.21 * k as f64, 5.0 - 0.11 * k as f64];
                dom.eval_f64(&x) / p0_eval(&cone, n, x).expect("planar cone")
            })
            .collect();
        ratios[0] > 0.0 && ratios.iter().all(|r| ((r - ratios[0]) / ratios[0]).abs() < 1e-8)
    });
    let consistent = (!invariant || harmonic) && proportional != Some(false);
    let json = json!({
        "group": cone.verdict.group(),
        "n": n,
        "group_order": group.order(),
        "invariant": invariant,
        "p0_discrete_harmonic": harmonic,
        "dominant_proportional_to_p0": proportional,
        "consistent": consistent,
    });
    let summary = format!(
        "{}: invariant={invariant} p0-harmonic={harmonic} dominant~p0={}",
        cone.verdict.group().unwrap_or("?"),
        proportional.map_or("n/a".to_string(), |b| b.to_string())
    );
    Ok(Outcome {
        json,
        summary,
        code: if consistent { EXIT_OK } else { EXIT_VERIFY },
    })
}

/// Inputs of `prescribe`.
#[derive(Debug, Clone, PartialEq)]
pub enum Prescription {
    /// Planar model with normalized off-diagonal squared `d²`.
    Planar {
        d_sq: Rational,
    },
    Spatial(Box<Target3D>),
}

fn model_report(s: &StepSet, g: &Geometry) -> Result<Value> {
    let m = validate(s);
    let cone = cone_for(s, g)?;
    Ok(json!({"moments": moments_json(&m), "cone": cone_json(&cone)}))
}

pub fn prescribe(p: &Prescription, g: &Geometry) -> Result<Outcome> {
    match p {
        Prescription::Planar { d_sq } => {
            let s = q_from_d2(d_sq)?;
            let nc = normalized_covariance(&validate(&s));
            let matches = nc.as_ref().is_ok_and(|nc| &nc.squared[(0, 1)] == d_sq);
            let mut verification = json!({"target_d_sq": format_rational(d_sq), "matches": matches});
            if let Ok(r) = model_report(&s, g) {
                verification["report"] = r;
            }
            let json = json!({"model": ModelJson::from_model(&s), "verification": verification});
            let code = if matches { EXIT_OK } else { EXIT_VERIFY };
            Ok(Outcome {
                json,
                summary: format!("planar model for d^2 = {}", format_rational(d_sq)),
                code,
            })
        }
        Prescription::Spatial(t) => match build_chi3(t, g.precision_bits) {
            Ok(chi) => {
                let report = model_report(&chi.model, g)?;
                let verification = json!({
                    "exact": chi.exact,
                    "alpha": format_rational(&chi.alpha),
                    "beta": format_rational(&chi.beta),
                    "d_sq": format_rational(&chi.d_sq),
                    "permutation": chi.permutation,
                    "symmetric_block": chi.symmetric_block,
                    "matches": true,
                    "report": report,
                });
                let summary = format!(
                    "3D model with {} steps ({}), verdict {}",
                    chi.model.len(),
                    if chi.exact { "exact" } else { "dyadic approximation" },
                    report["cone"]["group"].as_str().unwrap_or("none")
                );
                Ok(Outcome {
                    json: json!({"model": ModelJson::from_model(&chi.model), "verification": verification}),
                    summary,
                    code: EXIT_OK,
                })
            }
            Err(PrescribeError::VerificationFailed) => Ok(Outcome {
                json: json!({"model": null, "verification": {"matches": false}}),
                summary: "assembled covariance does not match the target".into(),
                code: EXIT_VERIFY,
            }),
            Err(e) => bail!(e),
        },
    }
}

/// Planar `Q_t` family, or the spatial `Q_t(x,y) + α Q_t(z,y)` when `alpha` is given.
pub fn family(cos2: &Rational, t_sq: &Rational, alpha: Option<&Rational>, g: &Geometry) -> Result<Outcome> {
    let params = FamilyParams::new(cos2.clone(), t_sq.clone())?;
    let s = match alpha {
        None => qt_family(&params)?,
        Some(a) => rt_family(&params, a)?,
    };
    let nc = normalized_covariance(&validate(&s))?;
    // the planar member has exactly cos²Θ; the spatial one is only sign-checked
    let matches = match alpha {
        None => nc.squared[(0, 1)] == *cos2 && nc.signs[0][1] < 0,
        Some(_) => nc
            .signs
            .iter()
            .flatten()
            .enumerate()
            .all(|(k, &sg)| k % 4 == 0 || sg <= 0),
    };
    let report = model_report(&s, g)?;
    let verification = json!({
        "target_cos_sq": format_rational(cos2),
        "coefficients": rationals(&params.qt_coefficients()),
        "matches": matches,
        "report": report,
    });
    let summary = format!(
        "{}D family member with {} steps, verdict {}",
        s.dimension(),
        s.len(),
        report["cone"]["verdict"].as_str().unwrap_or("?")
    );
    Ok(Outcome {
        json: json!({"model": ModelJson::from_model(&s), "verification": verification}),
        summary,
        code: if matches { EXIT_OK } else { EXIT_VERIFY },
    })
}
