//! JSON family specifications.
//!
//! ```json
//! { "kind": "rough_coupling", "params": { "scale": 1.0 }, "alpha": 0.5 }
//! ```
//!
//! `kind` is one of `rough_coupling`, `crossing_lines`, `schrodinger`,
//! `random_holder`. Unknown fields are rejected with the field name.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    build_crossing_lines, build_crossing_lines_with_offsets, build_random_holder, build_rough_coupling,
    build_schrodinger_1d, Mixer, ParamFamily,
};
use crate::error::{Result, SpectraError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughCouplingParams {
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingLinesParams {
    pub slopes: Vec<f64>,
    #[serde(default)]
    pub offsets: Option<Vec<f64>>,
    /// Seed of the conjugating unitary; identity when absent.
    #[serde(default)]
    pub mixer_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerParams {
    pub n: usize,
    #[serde(default)]
    pub potential: PotentialSpec,
}

/// Potentials `V(u, x)` available from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = 0`
    #[default]
    Zero,
    /// `V = u`
    Shift,
    /// `V = u·x`
    Ramp,
    /// `V = |u|^exponent · x`
    RoughRamp { exponent: f64 },
}

impl PotentialSpec {
    pub fn value(self, u: f64, x: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Shift => u,
            PotentialSpec::Ramp => u * x,
            PotentialSpec::RoughRamp { exponent } => u.abs().powf(exponent) * x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomHolderParams {
    #[serde(default)]
    pub seed: Option<u64>,
    pub n: usize,
    pub terms: usize,
}

fn one() -> f64 {
    1.0
}

/// A parsed family specification.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    RoughCoupling { alpha: f64, params: RoughCouplingParams },
    CrossingLines { alpha: f64, params: CrossingLinesParams },
    Schrodinger { alpha: f64, params: SchrodingerParams },
    RandomHolder { alpha: f64, params: RandomHolderParams },
}

fn bad(field: &str, reason: impl Into<String>) -> SpectraError {
    SpectraError::BadSpec { field: field.to_string(), reason: reason.into() }
}

fn typed<T: for<'de> Deserialize<'de>>(params: Value) -> Result<T> {
    serde_json::from_value(params).map_err(|e| {
        let msg = e.to_string();
        // serde names the offending field inside backticks
        let field = msg
            .split('`')
            .nth(1)
            .map(|f| format!("params.{f}"))
            .unwrap_or_else(|| "params".to_string());
        bad(&field, msg)
    })
}

impl FamilySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| bad("<root>", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut root) = value else {
            return Err(bad("<root>", "expected a JSON object"));
        };
        let kind = match root.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(bad("kind", "expected a string")),
            None => return Err(bad("kind", "missing")),
        };
        let params = root.remove("params").unwrap_or_else(|| Value::Object(Default::default()));
        if !params.is_object() {
            return Err(bad("params", "expected an object"));
        }
        let alpha = match root.remove("alpha") {
            Some(Value::Number(n)) => Some(n.as_f64().ok_or_else(|| bad("alpha", "not representable"))?),
            Some(_) => return Err(bad("alpha", "expected a number")),
            None => None,
        };
        if let Some(extra) = root.keys().next() {
            return Err(bad(extra, "unknown field"));
        }
        if let Some(a) = alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(bad("alpha", format!("{a} is outside (0, 1]")));
            }
        }
        let required = |alpha: Option<f64>| alpha.ok_or_else(|| bad("alpha", "missing"));
        match kind.as_str() {
            "rough_coupling" => Ok(FamilySpec::RoughCoupling { alpha: required(alpha)?, params: typed(params)? }),
            "crossing_lines" => Ok(FamilySpec::CrossingLines { alpha: alpha.unwrap_or(1.0), params: typed(params)? }),
            "schrodinger" => Ok(FamilySpec::Schrodinger { alpha: alpha.unwrap_or(1.0), params: typed(params)? }),
            "random_holder" => Ok(FamilySpec::RandomHolder { alpha: required(alpha)?, params: typed(params)? }),
            other => Err(bad("kind", format!("unknown kind `{other}`"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::RoughCoupling { .. } => "rough_coupling",
            FamilySpec::CrossingLines { .. } => "crossing_lines",
            FamilySpec::Schrodinger { .. } => "schrodinger",
            FamilySpec::RandomHolder { .. } => "random_holder",
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            FamilySpec::RoughCoupling { alpha, .. }
            | FamilySpec::CrossingLines { alpha, .. }
            | FamilySpec::Schrodinger { alpha, .. }
            | FamilySpec::RandomHolder { alpha, .. } => *alpha,
        }
    }

    /// Builds the family; `default_seed` fills in a missing random seed.
    pub fn build(&self, default_seed: u64) -> Result<ParamFamily> {
        let respecify = |e: SpectraError| match e {
            SpectraError::InvalidArgument { name, reason } => bad(&format!("params.{name}"), reason),
            other => other,
        };
        match self {
            FamilySpec::RoughCoupling { alpha, params } => build_rough_coupling(*alpha, params.scale).map_err(respecify),
            FamilySpec::CrossingLines { alpha, params } => {
                let mixer = params.mixer_seed.map_or(Mixer::Identity, Mixer::Seeded);
                let family = match &params.offsets {
                    Some(offsets) => build_crossing_lines_with_offsets(&params.slopes, offsets, mixer),
                    None => build_crossing_lines(&params.slopes, mixer),
                }
                .map_err(respecify)?;
                with_alpha(family, *alpha)
            }
            FamilySpec::Schrodinger { alpha, params } => {
                let potential = params.potential;
                let family = build_schrodinger_1d(move |u, x| potential.value(u, x), params.n).map_err(respecify)?;
                with_alpha(family, *alpha)
            }
            FamilySpec::RandomHolder { alpha, params } => {
                build_random_holder(params.seed.unwrap_or(default_seed), *alpha, params.n, params.terms).map_err(respecify)
            }
        }
    }
}

fn with_alpha(family: ParamFamily, alpha: f64) -> Result<ParamFamily> {
    let mut family = family;
    family.claimed_alpha = alpha;
    Ok(family)
}
