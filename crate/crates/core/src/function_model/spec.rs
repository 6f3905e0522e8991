//! Function-spec documents (JSON).
//!
//! ```json
//! {"preset": "cosh_sqrt", "A": 0.2, "truncate": 30}
//! {"preset": "monomial", "degree": 3}
//! {"preset": "polynomial", "coeffs": [[1, 0], [0.5, 0]], "A": 0.2}
//! {"preset": "exp_uncertified"}
//! {"coeffs": [[1, 0], [0.1, 0]], "M": 1, "A": 0.2, "R": 10}
//! ```

use super::TaylorFunction;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

const DEFAULT_A: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Preset(Preset),
    Explicit(ExplicitSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    Monomial {
        degree: usize,
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Polynomial {
        coeffs: Vec<[f64; 2]>,
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    CoshSqrt {
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<usize>,
        #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    ExpUncertified {
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        m: Option<f64>,
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub coeffs: Vec<[f64; 2]>,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(default)]
    pub tail_bound: f64,
    #[serde(default = "default_true")]
    pub certified: bool,
}

fn default_true() -> bool {
    true
}

fn to_complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

impl FunctionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolves the document into a function; certificates are validated
    /// here (presets other than `exp_uncertified` must pass).
    pub fn load(&self) -> Result<TaylorFunction> {
        match self {
            FunctionSpec::Preset(p) => p.build(),
            FunctionSpec::Explicit(e) => {
                let coeffs = to_complex(&e.coeffs);
                if e.certified {
                    TaylorFunction::new(coeffs, e.m, e.a, e.radius, e.tail_bound)
                } else {
                    TaylorFunction::new_uncertified(coeffs, e.m, e.a, e.radius, e.tail_bound)
                }
            }
        }
    }

    /// Overrides the `A`/`M` parameters where the document has them.
    pub fn with_overrides(mut self, a: Option<f64>, m: Option<f64>) -> Self {
        match &mut self {
            FunctionSpec::Preset(Preset::Monomial { a: pa, .. })
            | FunctionSpec::Preset(Preset::Polynomial { a: pa, .. }) => {
                if a.is_some() {
                    *pa = a;
                }
            }
            FunctionSpec::Preset(Preset::CoshSqrt { a: pa, m: pm, .. })
            | FunctionSpec::Preset(Preset::ExpUncertified { a: pa, m: pm, .. }) => {
                if a.is_some() {
                    *pa = a;
                }
                if m.is_some() {
                    *pm = m;
                }
            }
            FunctionSpec::Explicit(e) => {
                if let Some(a) = a {
                    e.a = a;
                }
                if let Some(m) = m {
                    e.m = m;
                }
            }
        }
        self
    }
}

impl Preset {
    pub fn build(&self) -> Result<TaylorFunction> {
        match self {
            Preset::Monomial { degree, a, radius } => {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
                coeffs[*degree] = Complex64::new(1.0, 0.0);
                TaylorFunction::polynomial(coeffs, a.unwrap_or(DEFAULT_A), *radius)
            }
            Preset::Polynomial { coeffs, a, radius } => {
                if coeffs.is_empty() {
                    return Err(Error::Parse("polynomial preset needs at least one coefficient".into()));
                }
                TaylorFunction::polynomial(to_complex(coeffs), a.unwrap_or(DEFAULT_A), *radius)
            }
            Preset::CoshSqrt { a, m, truncate, radius } => {
                TaylorFunction::cosh_sqrt(a.unwrap_or(DEFAULT_A), m.unwrap_or(1.0), *truncate, *radius)
            }
            Preset::ExpUncertified { m, a, radius } => TaylorFunction::exp_uncertified(*m, *a, *radius),
        }
    }
}

fn raw(x: f64) -> Box<RawValue> {
    // 17 significant digits; every finite f64 round-trips.
    let text = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct ExplicitOut {
    coeffs: Vec<[Box<RawValue>; 2]>,
    #[serde(rename = "M")]
    m: Box<RawValue>,
    #[serde(rename = "A")]
    a: Box<RawValue>,
    #[serde(rename = "R")]
    radius: Box<RawValue>,
    tail_bound: Box<RawValue>,
    certified: bool,
}

/// Lossless explicit-form document for `f`.
pub fn serialize(f: &TaylorFunction) -> String {
    let out = ExplicitOut {
        coeffs: f.coeffs().iter().map(|c| [raw(c.re), raw(c.im)]).collect(),
        m: raw(f.m()),
        a: raw(f.a()),
        radius: raw(f.radius()),
        tail_bound: raw(f.tail_bound()),
        certified: f.is_certified(),
    };
    serde_json::to_string(&out).expect("explicit spec serialises")
}
