//! Experiment configuration: TOML file merged with command-line flags
//! (flags win).

use crate::CliError;
use clap::Args;
use sdc_core::analysis::{Growth, NGrid};
use sdc_core::{BnRule, FunctionSpec, TaylorFunction};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset (`cosh_sqrt`, `cosh_sqrt:<terms>`, `monomial:<p>`,
    /// `polynomial:<c0>,<c1>,..`, `exp_uncertified`) or a JSON spec file.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    /// `sqrt`, `pow23`, `log`, `const-violating` or a number.
    #[arg(long)]
    pub bn: Option<String>,
    #[arg(long)]
    pub n_start: Option<u32>,
    #[arg(long)]
    pub n_stop: Option<u32>,
    /// `geometric` or `linear`.
    #[arg(long)]
    pub growth: Option<String>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    /// Derivative order.
    #[arg(long)]
    pub p: Option<usize>,
    /// Slope tolerance of the order fit.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV path (directory for `verify-all`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub allow_uncertified: bool,
    /// Operator index for `moments`.
    #[arg(long)]
    pub n: Option<u32>,
    /// Highest moment for `moments`.
    #[arg(long)]
    pub pmax: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
enum FunctionField {
    #[default]
    Unset,
    Name(String),
    Spec(FunctionSpec),
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    function: FunctionField,
    #[serde(rename = "A")]
    a: Option<f64>,
    #[serde(rename = "M")]
    m: Option<f64>,
    bn: Option<String>,
    n_start: Option<u32>,
    n_stop: Option<u32>,
    growth: Option<Growth>,
    r: Option<f64>,
    r1: Option<f64>,
    p: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    allow_uncertified: Option<bool>,
    n: Option<u32>,
    pmax: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// How the function was named, echoed in summaries.
    pub function_label: String,
    pub function: TaylorFunction,
    pub bn_rule: BnRule,
    pub n_range: NGrid,
    pub r: f64,
    pub r1: f64,
    pub derivative_order: usize,
    pub slope_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub allow_uncertified: bool,
    pub n: u32,
    pub pmax: usize,
}

pub const DEFAULT_FUNCTION: &str = "cosh_sqrt";

impl ExperimentConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str::<FileConfig>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let a = flags.a.or(file.a);
        let m = flags.m.or(file.m);
        let (function_label, spec) = match (&flags.function, &file.function) {
            (Some(name), _) | (None, FunctionField::Name(name)) => (name.clone(), parse_function(name)?),
            (None, FunctionField::Spec(spec)) => ("inline".to_string(), spec.clone()),
            (None, FunctionField::Unset) => (DEFAULT_FUNCTION.to_string(), parse_function(DEFAULT_FUNCTION)?),
        };
        let function = spec.with_overrides(a, m).load()?;

        let allow_uncertified = flags.allow_uncertified || file.allow_uncertified.unwrap_or(false);
        if !function.is_certified() && !allow_uncertified {
            return Err(sdc_core::Error::Uncertified.into());
        }

        let bn_rule = flags.bn.clone().or(file.bn).unwrap_or_else(|| "sqrt".into()).parse::<BnRule>()?;
        let growth = match &flags.growth {
            Some(g) => parse_growth(g)?,
            None => file.growth.unwrap_or(Growth::Geometric),
        };
        let n_range = NGrid {
            start: flags.n_start.or(file.n_start).unwrap_or(8),
            stop: flags.n_stop.or(file.n_stop).unwrap_or(512),
            growth,
        };
        n_range.values()?;

        Ok(ExperimentConfig {
            function_label,
            function,
            bn_rule,
            n_range,
            r: flags.r.or(file.r).unwrap_or(1.0),
            r1: flags.r1.or(file.r1).unwrap_or(2.0),
            derivative_order: flags.p.or(file.p).unwrap_or(1),
            slope_tol: flags.tol.or(file.tol),
            out: flags.out.clone().or(file.out),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            allow_uncertified,
            n: flags.n.or(file.n).unwrap_or(10),
            pmax: flags.pmax.or(file.pmax).unwrap_or(6),
        })
    }

    /// Checks `1 <= r < r1 < R` and `A r1 < 1` for derivative runs.
    pub fn validate_derivative(&self) -> Result<(), CliError> {
        let (r, r1) = (self.r, self.r1);
        if !(r >= 1.0 && r < r1) {
            return Err(sdc_core::Error::Geometry { r, r1 }.into());
        }
        if !(r1 < self.function.radius()) {
            return Err(CliError::Config(format!("r1 = {r1} must be below R = {}", self.function.radius())));
        }
        if !(self.function.a() * r1 < 1.0) {
            return Err(sdc_core::Error::Divergence { product: self.function.a() * r1 }.into());
        }
        Ok(())
    }
}

fn parse_growth(s: &str) -> Result<Growth, CliError> {
    match s {
        "geometric" => Ok(Growth::Geometric),
        "linear" => Ok(Growth::Linear),
        other => Err(CliError::Config(format!("unknown growth `{other}`"))),
    }
}

fn parse_numbers<T: std::str::FromStr>(args: &str) -> Result<Vec<T>, CliError> {
    args.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| CliError::Config(format!("bad number `{s}`"))))
        .collect()
}

/// Resolves a preset name (with optional `:args`) or a JSON spec path.
pub fn parse_function(name: &str) -> Result<FunctionSpec, CliError> {
    let path = Path::new(name);
    if path.is_file() {
        return Ok(FunctionSpec::from_json(&std::fs::read_to_string(path)?)?);
    }
    let (preset, args) = match name.split_once(':') {
        Some((p, a)) => (p, Some(a)),
        None => (name, None),
    };
    let json = match (preset, args) {
        ("cosh_sqrt", None) => r#"{"preset": "cosh_sqrt"}"#.to_string(),
        ("cosh_sqrt", Some(t)) => format!(r#"{{"preset": "cosh_sqrt", "truncate": {}}}"#, parse_numbers::<usize>(t)?[0]),
        ("monomial", Some(p)) => format!(r#"{{"preset": "monomial", "degree": {}}}"#, parse_numbers::<usize>(p)?[0]),
        ("polynomial", Some(cs)) => {
            let coeffs: Vec<[f64; 2]> = parse_numbers::<f64>(cs)?.into_iter().map(|c| [c, 0.0]).collect();
            serde_json::json!({"preset": "polynomial", "coeffs": coeffs}).to_string()
        }
        ("exp_uncertified", None) => r#"{"preset": "exp_uncertified"}"#.to_string(),
        _ => return Err(CliError::Config(format!("unknown function `{name}`"))),
    };
    Ok(FunctionSpec::from_json(&json)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let f = parse_function("monomial:3").unwrap().load().unwrap();
        assert_eq!(f.max_index(), 3);
        let g = parse_function("polynomial:1,0,2").unwrap().load().unwrap();
        assert_eq!(g.coeffs()[2].re, 2.0);
        assert!(parse_function("sinh").is_err());
        assert!(parse_function("monomial:x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "bn = \"pow23\"\nr = 2.0\nn_stop = 64\n[function]\npreset = \"monomial\"\ndegree = 2\n").unwrap();
        let flags = Flags { config: Some(path.clone()), r: Some(1.5), ..Flags::default() };
        let cfg = ExperimentConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.bn_rule, BnRule::Pow23);
        assert_eq!(cfg.r, 1.5);
        assert_eq!(cfg.n_range.stop, 64);
        assert_eq!(cfg.function.max_index(), 2);
        assert_eq!(cfg.function_label, "inline");
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "radius = 3\n").unwrap();
        let flags = Flags { config: Some(path), ..Flags::default() };
        assert!(matches!(ExperimentConfig::resolve(&flags), Err(CliError::Config(_))));
    }

    #[test]
    fn uncertified_needs_override() {
        let flags = Flags { function: Some("exp_uncertified".into()), ..Flags::default() };
        assert!(ExperimentConfig::resolve(&flags).is_err());
        let flags = Flags { allow_uncertified: true, ..flags };
        assert!(!ExperimentConfig::resolve(&flags).unwrap().function.is_certified());
    }
}
