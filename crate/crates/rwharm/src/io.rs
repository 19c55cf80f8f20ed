//! Model and polynomial file formats. Every rational is a `"p/q"` string.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rwharm_core::rational::{format_rational, parse_rational};
use rwharm_core::{MultiPoly, Rational, StepSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub s: Vec<i64>,
    pub w: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelJson {
    pub dimension: usize,
    pub steps: Vec<StepJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub e: Vec<u32>,
    pub c: String,
}

/// Extra fields are ignored so that a harmonic report is itself a valid
/// polynomial file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub dimension: usize,
    pub terms: Vec<TermJson>,
}

fn rational_field(text: &str, what: &str) -> Result<Rational> {
    parse_rational(text).with_context(|| format!("{what}: {text:?} is not an exact fraction p/q"))
}

impl ModelJson {
    pub fn from_model(s: &StepSet) -> Self {
        ModelJson {
            dimension: s.dimension(),
            steps: s
                .steps()
                .iter()
                .map(|st| StepJson {
                    s: st.vector.clone(),
                    w: format_rational(&st.weight),
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<StepSet> {
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, st)| Ok((st.s.clone(), rational_field(&st.w, &format!("weight of step {k}"))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(StepSet::new(self.dimension, steps)?)
    }
}

impl PolyJson {
    pub fn from_poly(p: &MultiPoly) -> Self {
        PolyJson {
            dimension: p.dimension(),
            terms: p
                .terms()
                .map(|(m, c)| TermJson {
                    e: m.0.clone(),
                    c: format_rational(c),
                })
                .collect(),
        }
    }

    pub fn to_poly(&self) -> Result<MultiPoly> {
        if self.dimension == 0 {
            bail!("polynomial dimension must be at least 1");
        }
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(k, t)| Ok((t.e.clone(), rational_field(&t.c, &format!("coefficient of term {k}"))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiPoly::from_terms(self.dimension, terms)?)
    }
}

pub fn parse_model(text: &str) -> Result<StepSet> {
    let json: ModelJson = serde_json::from_str(text).context("malformed model JSON")?;
    json.to_model()
}

pub fn parse_poly(text: &str) -> Result<MultiPoly> {
    let json: PolyJson = serde_json::from_str(text).context("malformed polynomial JSON")?;
    json.to_poly()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<StepSet> {
    parse_model(&read(path)?).with_context(|| format!("invalid model file {}", path.display()))
}

pub fn load_poly(path: &Path) -> Result<MultiPoly> {
    parse_poly(&read(path)?).with_context(|| format!("invalid polynomial file {}", path.display()))
}

pub fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}
