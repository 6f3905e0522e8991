//! The operator `F_n` on Taylor functions, its Voronovskaja correction and
//! the theoretical constants of the upper and Voronovskaja estimates.

use crate::error::{Error, Result};
use crate::function_model::{ComplexPolynomial, TaylorFunction};
use crate::moments::{moment_recurrence, scale_by_exp_neg, MomentTable};
use crate::numerics::gauss::gauss_legendre_unit;
use crate::numerics::{normalized_moment_integral_dd, poisson_cutoff, CompensatedSum, Dd, DdComplex};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

pub const DEFAULT_SERIES_TOL: f64 = 1e-15;

/// Index from which the bound suites assert their estimates.
pub const DEFAULT_N0: u32 = 4;

/// Largest `n` accepted by the quadrature oracle (`(1-u)^n` stays normal).
pub const DIRECT_N_LIMIT: u32 = 1000;

/// Rule producing the scale sequence `b_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BnRule {
    /// `√n`.
    Sqrt,
    /// `n^{2/3}`.
    Pow23,
    /// `log(n+2)`.
    Log,
    /// `b_n = n`; fails the admissibility check by construction.
    ConstViolating,
    /// Fixed value.
    Value(f64),
}

impl BnRule {
    pub fn eval(&self, n: u32) -> f64 {
        let nf = n as f64;
        match self {
            BnRule::Sqrt => nf.sqrt(),
            BnRule::Pow23 => nf.powf(2.0 / 3.0),
            BnRule::Log => (nf + 2.0).ln(),
            BnRule::ConstViolating => nf,
            BnRule::Value(v) => *v,
        }
    }

    /// Growth exponent `e` with `b_n ≍ n^e` (0 for logarithmic or bounded).
    pub fn growth_exponent(&self) -> f64 {
        match self {
            BnRule::Sqrt => 0.5,
            BnRule::Pow23 => 2.0 / 3.0,
            BnRule::ConstViolating => 1.0,
            BnRule::Log | BnRule::Value(_) => 0.0,
        }
    }

    /// Asymptotic log-log slope of `(b_n+1)/(n+2)`.
    pub fn order_slope(&self) -> f64 {
        self.growth_exponent() - 1.0
    }
}

impl FromStr for BnRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(BnRule::Sqrt),
            "pow23" => Ok(BnRule::Pow23),
            "log" => Ok(BnRule::Log),
            "const-violating" => Ok(BnRule::ConstViolating),
            other => other
                .parse::<f64>()
                .map(BnRule::Value)
                .map_err(|_| Error::Parse(format!("unknown b_n rule `{other}`"))),
        }
    }
}

impl fmt::Display for BnRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BnRule::Sqrt => f.write_str("sqrt"),
            BnRule::Pow23 => f.write_str("pow23"),
            BnRule::Log => f.write_str("log"),
            BnRule::ConstViolating => f.write_str("const-violating"),
            BnRule::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorConfig {
    pub n: u32,
    pub bn_rule: BnRule,
    pub series_tol: f64,
    /// Gauss-Legendre node count for the quadrature oracle; `None` picks the
    /// smallest count exact for the stored polynomial.
    pub quadrature_nodes: Option<usize>,
}

impl OperatorConfig {
    pub fn new(n: u32, bn_rule: BnRule) -> Self {
        OperatorConfig { n, bn_rule, series_tol: DEFAULT_SERIES_TOL, quadrature_nodes: None }
    }

    pub fn b_n(&self) -> f64 {
        self.bn_rule.eval(self.n)
    }

    /// `α = (n+2)/b_n`.
    pub fn alpha(&self) -> f64 {
        (self.n as f64 + 2.0) / self.b_n()
    }

    /// `(b_n+1)/(n+2)`, the order of approximation.
    pub fn order_scale(&self) -> f64 {
        (self.b_n() + 1.0) / (self.n as f64 + 2.0)
    }

    /// Checks `n >= 1` and `0 < b_n < n`, returning `b_n`.
    pub fn validate(&self) -> Result<f64> {
        let b_n = self.b_n();
        if self.n == 0 || !(b_n > 0.0) || !(b_n < self.n as f64) {
            return Err(Error::Inadmissible { n: self.n, b_n });
        }
        Ok(b_n)
    }
}

type CacheKey = (u32, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<MomentTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<MomentTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared moment table for `(n, b_n, p_max)`. Concurrent builders of the same
/// key may both build; the first insert wins and both get that table.
pub fn moment_table(n: u32, b_n: f64, p_max: usize) -> Result<Arc<MomentTable>> {
    let key = (n, b_n.to_bits(), p_max);
    if let Some(t) = cache().read().expect("moment cache poisoned").get(&key) {
        return Ok(Arc::clone(t));
    }
    let built = Arc::new(moment_recurrence(n, b_n, p_max)?);
    let mut map = cache().write().expect("moment cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert(built)))
}

pub fn clear_moment_cache() {
    cache().write().expect("moment cache poisoned").clear();
}

fn check_domain(f: &TaylorFunction, b_n: f64, z: Complex64) -> Result<()> {
    let modulus = z.norm();
    if modulus > f.radius() {
        return Err(Error::OutOfDisk { modulus, radius: f.radius() });
    }
    if z.re > b_n {
        return Err(Error::RightOfStrip { re: z.re, b_n });
    }
    Ok(())
}

/// `F_n(f; z) = Σ_p c_p Π_{n,p}(z)` over the stored coefficients.
pub fn apply(f: &TaylorFunction, cfg: &OperatorConfig, z: Complex64) -> Result<Complex64> {
    apply_with_tail(f, cfg, z).map(|(v, _)| v)
}

/// [`apply`] plus an estimate of the operator image of the dropped tail:
/// `tail_bound + M (b_n+1)/(n+2) Σ_{p>N} (A|z|)^p`.
pub fn apply_with_tail(f: &TaylorFunction, cfg: &OperatorConfig, z: Complex64) -> Result<(Complex64, f64)> {
    let b_n = cfg.validate()?;
    check_domain(f, b_n, z)?;
    let table = moment_table(cfg.n, b_n, f.max_index())?;
    let mut acc = CompensatedSum::new();
    for (p, c) in f.coeffs().iter().enumerate() {
        if *c != Complex64::new(0.0, 0.0) {
            acc.add(c * table.eval(p, z));
        }
    }
    let q = f.a() * z.norm();
    let tail = if f.tail_bound() == 0.0 {
        0.0
    } else if q < 1.0 {
        f.tail_bound() + f.m() * cfg.order_scale() * q.powi(f.coeffs().len() as i32) / (1.0 - q)
    } else {
        f64::INFINITY
    };
    Ok((acc.value(), tail))
}

/// `F_n f` as a polynomial: `Σ_p c_p Π_{n,p}`.
pub fn image_polynomial(f: &TaylorFunction, cfg: &OperatorConfig) -> Result<ComplexPolynomial> {
    let b_n = cfg.validate()?;
    let table = moment_table(cfg.n, b_n, f.max_index())?;
    Ok(ComplexPolynomial::linear_combination(
        f.coeffs().iter().copied().zip(table.polys()),
    ))
}

/// `F_n f - f` as a polynomial, built coefficientwise so the difference does
/// not cancel at evaluation time.
pub fn error_polynomial(f: &TaylorFunction, cfg: &OperatorConfig) -> Result<ComplexPolynomial> {
    let image = image_polynomial(f, cfg)?;
    Ok(&image - &f.polynomial_part())
}

/// Independent evaluation of the defining series: inner integrals
/// `∫_0^{b_n} φ_{n,k}(t/b_n) f(t) dt` by Gauss-Legendre quadrature for
/// `k <= n`, and by the Gamma-continued closed form for `k > n` (where the
/// Bernstein weight vanishes termwise). All terms are carried in
/// double-double.
pub fn apply_direct(f: &TaylorFunction, cfg: &OperatorConfig, z: Complex64) -> Result<Complex64> {
    let b_n = cfg.validate()?;
    check_domain(f, b_n, z)?;
    let n = cfg.n;
    if n > DIRECT_N_LIMIT {
        return Err(Error::InvalidParameter(format!("quadrature oracle supports n <= {DIRECT_N_LIMIT}")));
    }
    let degree = f.max_index();
    let abs_coeffs: Vec<f64> = f.coeffs().iter().map(|c| c.norm()).collect();
    // ln W_k, W_k = Σ_p |c_p| b^p (k+1)_p/(n+2)_p bounds (n+1)/b_n |∫ φ_{n,k} f|
    let log_weight = |k: usize| {
        let mut w = 0.0;
        let mut ratio = 1.0;
        for (p, a) in abs_coeffs.iter().enumerate() {
            if p > 0 {
                ratio *= b_n * (k + p) as f64 / (n as usize + 1 + p) as f64;
            }
            w += a * ratio;
        }
        w.ln()
    };
    let lambda_f = z * (n as f64 / b_n);
    let cutoff = poisson_cutoff(lambda_f, degree, log_weight, cfg.series_tol)?;
    let lambda = DdComplex::from(z).scale_f64(n as f64).div_f64(b_n);

    let auto = (n as usize + degree) / 2 + 2;
    let nodes = cfg.quadrature_nodes.unwrap_or(auto).max(1);
    let first = direct_series(f, n, b_n, cutoff, lambda, nodes);
    let second = direct_series(f, n, b_n, cutoff, lambda, nodes + 8.max(nodes / 2));
    let delta = (first - second).norm();
    if !(delta <= 10.0 * cfg.series_tol) {
        return Err(Error::QuadratureNonconvergence { delta });
    }
    Ok(second)
}

fn direct_series(f: &TaylorFunction, n: u32, b_n: f64, cutoff: usize, lambda: DdComplex, nodes: usize) -> Complex64 {
    let n_us = n as usize;
    let quad_top = cutoff.min(n_us);
    let mut weights = vec![DdComplex::ZERO; cutoff + 1];

    let rule = gauss_legendre_unit(nodes);
    let mut basis = vec![Dd::ZERO; n_us + 1];
    for (u, w) in &rule {
        bernstein_basis(n_us, *u, &mut basis);
        let fx = eval_dd(f.coeffs(), u.mul_f64(b_n));
        let fw = fx.scale(*w);
        for k in 0..=quad_top {
            weights[k] = weights[k] + fw.scale(basis[k]);
        }
    }
    for w in weights.iter_mut().take(quad_top + 1) {
        *w = w.scale_f64((n + 1) as f64);
    }
    for (k, w) in weights.iter_mut().enumerate().skip(n_us + 1) {
        for (p, c) in f.coeffs().iter().enumerate() {
            *w = *w + DdComplex::from(*c).scale(normalized_moment_integral_dd(n, k, p, b_n));
        }
    }

    let mut term = DdComplex::ONE;
    let mut sum = DdComplex::ZERO;
    for (k, w) in weights.iter().enumerate() {
        if k > 0 {
            term = (term * lambda).div_f64(k as f64);
        }
        sum = sum + term * *w;
    }
    scale_by_exp_neg(sum, lambda)
}

/// `φ_{n,k}(u) = C(n,k) u^k (1-u)^{n-k}` for all `k`, recursing away from
/// the endpoint nearest `u` so the starting power stays above `2^{-n}`.
fn bernstein_basis(n: usize, u: Dd, out: &mut [Dd]) {
    let v = Dd::ONE - u;
    if u.hi <= 0.5 {
        let ratio = u / v;
        out[0] = v.powi(n as u32);
        for k in 0..n {
            out[k + 1] = (out[k] * ratio).mul_f64((n - k) as f64).div_f64((k + 1) as f64);
        }
    } else {
        let ratio = v / u;
        out[n] = u.powi(n as u32);
        for k in (1..=n).rev() {
            out[k - 1] = (out[k] * ratio).mul_f64(k as f64).div_f64((n - k + 1) as f64);
        }
    }
}

fn eval_dd(coeffs: &[Complex64], x: Dd) -> DdComplex {
    let mut acc = DdComplex::ZERO;
    for c in coeffs.iter().rev() {
        acc = acc.scale(x).add_complex(*c);
    }
    acc
}

/// `(b_n/(n+2)) ((1 - 2z/b_n) f'(z) + z (1 - z/(2 b_n)) f''(z))`.
pub fn voronovskaja_term(f: &TaylorFunction, cfg: &OperatorConfig, z: Complex64) -> Result<Complex64> {
    let b_n = cfg.validate()?;
    check_domain(f, b_n, z)?;
    let d1 = f.derivative(1)?.eval_series(z);
    let d2 = f.derivative(2)?.eval_series(z);
    let one = Complex64::new(1.0, 0.0);
    Ok(b_n / (cfg.n as f64 + 2.0) * ((one - 2.0 * z / b_n) * d1 + z * (one - z / (2.0 * b_n)) * d2))
}

/// The Voronovskaja term as a polynomial:
/// `(b_n f' + b_n z f'' - 2 z f' - z^2 f''/2)/(n+2)`.
pub fn voronovskaja_polynomial(f: &TaylorFunction, cfg: &OperatorConfig) -> Result<ComplexPolynomial> {
    let b_n = cfg.validate()?;
    let d1 = f.derivative(1)?.polynomial_part();
    let d2 = f.derivative(2)?.polynomial_part();
    let s = 1.0 / (cfg.n as f64 + 2.0);
    let c = |x: f64| Complex64::new(x * s, 0.0);
    let z_d1 = d1.shift(1);
    let z_d2 = d2.shift(1);
    let z2_d2 = d2.shift(2);
    Ok(ComplexPolynomial::linear_combination([
        (c(b_n), &d1),
        (c(b_n), &z_d2),
        (c(-2.0), &z_d1),
        (c(-0.5), &z2_d2),
    ]))
}

/// `F_n(f; z) - f(z) - voronovskaja_term(f; z)`.
pub fn residual(f: &TaylorFunction, cfg: &OperatorConfig, z: Complex64) -> Result<Complex64> {
    let image = apply(f, cfg, z)?;
    let value = f.eval(z)?;
    let v = voronovskaja_term(f, cfg, z)?;
    Ok(compensated3(image, -value, -v))
}

fn compensated3(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let mut s = CompensatedSum::new();
    s.extend([a, b, c]);
    s.value()
}

/// The residual as a polynomial, assembled coefficientwise.
pub fn residual_polynomial(f: &TaylorFunction, cfg: &OperatorConfig) -> Result<ComplexPolynomial> {
    let image = image_polynomial(f, cfg)?;
    let v = voronovskaja_polynomial(f, cfg)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(ComplexPolynomial::linear_combination([
        (one, &image),
        (-one, &f.polynomial_part()),
        (-one, &v),
    ]))
}

/// `C_{r,A} = M Σ_{p>=1} (A r)^p = M A r/(1 - A r)`.
pub fn upper_constant(m: f64, a: f64, r: f64) -> Result<f64> {
    let q = a * r;
    if !(q < 1.0) {
        return Err(Error::Divergence { product: q });
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be >= 1")));
    }
    Ok(m * q / (1.0 - q))
}

/// `L_{r,A} = 2M/((1-Ar) log(1/(Ar))) + 4M Σ_{p>=1} p (Ar)^p`, with the
/// partial sum up to `[α]` replaced by its infinite majorant `Ar/(1-Ar)^2`
/// so one constant serves every `n`.
pub fn voronovskaja_constant(m: f64, a: f64, r: f64) -> Result<f64> {
    let q = a * r;
    if !(q < 1.0) {
        return Err(Error::Divergence { product: q });
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * m / ((1.0 - q) * (1.0 / q).ln()) + 4.0 * m * q / (1.0 - q).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bn_rules() {
        assert_eq!("sqrt".parse::<BnRule>().unwrap(), BnRule::Sqrt);
        assert_eq!("2.5".parse::<BnRule>().unwrap(), BnRule::Value(2.5));
        assert!("cubic".parse::<BnRule>().is_err());
        assert_relative_eq!(BnRule::Pow23.eval(8), 4.0, max_relative = 1e-15);
        assert!(OperatorConfig::new(10, BnRule::ConstViolating).validate().is_err());
        assert!(OperatorConfig::new(10, BnRule::Sqrt).validate().is_ok());
    }

    #[test]
    fn constant_is_preserved_exactly() {
        let one = TaylorFunction::monomial(0, 0.2).unwrap();
        let cfg = OperatorConfig::new(17, BnRule::Sqrt);
        for z in [c(0.0, 0.0), c(1.3, -0.4), c(-2.0, 1.0)] {
            assert_eq!(apply(&one, &cfg, z).unwrap(), c(1.0, 0.0));
            assert_eq!(residual(&one, &cfg, z).unwrap(), c(0.0, 0.0));
            assert_eq!(voronovskaja_term(&one, &cfg, z).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn e1_closed_form_and_exact_residual() {
        let e1 = TaylorFunction::monomial(1, 0.2).unwrap();
        let cfg = OperatorConfig::new(30, BnRule::Sqrt);
        let (n, b) = (30.0, cfg.b_n());
        for z in [c(0.7, 0.2), c(-1.5, 1.1), c(2.0, 0.0)] {
            let v = apply(&e1, &cfg, z).unwrap();
            assert!((v - (n * z + b) / (n + 2.0)).norm() < 1e-15);
            let vt = voronovskaja_term(&e1, &cfg, z).unwrap();
            assert!((vt - (b - 2.0 * z) / (n + 2.0)).norm() < 1e-15);
            assert!(residual(&e1, &cfg, z).unwrap().norm() <= 1e-13);
        }
    }

    #[test]
    fn e2_voronovskaja_and_residual() {
        let e2 = TaylorFunction::monomial(2, 0.2).unwrap();
        let cfg = OperatorConfig::new(20, BnRule::Pow23);
        let (n, b) = (20.0, cfg.b_n());
        for z in [c(0.5, 0.5), c(-1.0, 0.3)] {
            let vt = voronovskaja_term(&e2, &cfg, z).unwrap();
            assert!((vt - (4.0 * b * z - 5.0 * z * z) / (n + 2.0)).norm() < 1e-14);
            let r = residual(&e2, &cfg, z).unwrap();
            let expected = (2.0 * b * b - 12.0 * b * z + 9.0 * z * z) / ((n + 2.0) * (n + 3.0));
            assert!((r - expected).norm() < 1e-14, "{r} vs {expected}");
            let rp = residual_polynomial(&e2, &cfg).unwrap().eval(z);
            assert!((rp - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let cfg = OperatorConfig::new(9, BnRule::Sqrt);
        assert!(matches!(apply(&f, &cfg, c(3.5, 0.0)), Err(Error::RightOfStrip { .. })));
        assert!(matches!(apply(&f, &cfg, c(0.0, 11.0)), Err(Error::OutOfDisk { .. })));
    }

    #[test]
    fn direct_e0_and_e1() {
        let cfg = OperatorConfig::new(4, BnRule::Value(2.0));
        let e0 = TaylorFunction::monomial(0, 0.2).unwrap();
        assert!((apply_direct(&e0, &cfg, c(1.0, 1.0)).unwrap() - 1.0).norm() < 1e-15);
        let e1 = TaylorFunction::monomial(1, 0.2).unwrap();
        let v = apply_direct(&e1, &cfg, c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn direct_flags_too_few_nodes() {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let mut cfg = OperatorConfig::new(40, BnRule::Sqrt);
        cfg.quadrature_nodes = Some(3);
        assert!(matches!(
            apply_direct(&f, &cfg, c(0.5, 0.0)),
            Err(Error::QuadratureNonconvergence { .. })
        ));
    }

    #[test]
    fn constants() {
        assert_relative_eq!(upper_constant(1.0, 0.4, 1.0).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(upper_constant(2.0, 0.2, 2.0).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        assert!(upper_constant(1.0, 1e-9, 1.0).unwrap() < 1e-8);
        assert!(matches!(upper_constant(1.0, 0.5, 2.0), Err(Error::Divergence { .. })));
        // 2/(0.6 ln 2.5) + 4(0.4)/0.36, 40-digit reference
        assert_relative_eq!(voronovskaja_constant(1.0, 0.4, 1.0).unwrap(), 8.082_300_004_235_416, max_relative = 1e-14);
        assert_eq!(voronovskaja_constant(0.0, 0.4, 1.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..99 {
            let v = voronovskaja_constant(1.0, i as f64 / 100.0, 1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn cache_returns_shared_table() {
        let a = moment_table(33, 2.5, 7).unwrap();
        let b = moment_table(33, 2.5, 7).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
