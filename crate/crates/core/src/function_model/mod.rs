//! Analytic functions in `D_R` represented by Taylor coefficients with the
//! coefficient-decay certificate `|c_p| <= M A^p / (2p)!`.

mod polynomial;
mod spec;

pub use polynomial::ComplexPolynomial;
pub use spec::{serialize, ExplicitSpec, FunctionSpec, Preset};

use crate::error::{Error, Result};
use crate::moments::P_MAX_CAP;
use crate::numerics::CompensatedSum;
use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

/// Presets store coefficients until the certificate majorant on `|z| <= R`
/// drops below this.
pub const TRUNCATION_THRESHOLD: f64 = 1e-30;

/// Log-space rounding slack for certificate comparisons (equality case).
const DECAY_SLACK: f64 = 1e-10;

/// Result of [`validate_decay`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecayCheck {
    pub valid: bool,
    pub first_violation: Option<usize>,
}

/// Checks `|c_p| <= M A^p / (2p)!` for every stored `p`, in log space.
pub fn validate_decay(coeffs: &[Complex64], m: f64, a: f64) -> DecayCheck {
    let ln_m = m.ln();
    let ln_a = a.ln();
    let first_violation = coeffs.iter().enumerate().position(|(p, c)| {
        let mag = c.norm();
        if mag == 0.0 {
            return false;
        }
        let rhs = ln_m + p as f64 * ln_a - ln_factorial(2 * p as u64);
        mag.ln() > rhs + DECAY_SLACK * rhs.abs().max(1.0)
    });
    DecayCheck { valid: first_violation.is_none(), first_violation }
}

/// `M · Σ_{p>last} (A R)^p / (2p)!`, summed until the terms stop mattering.
fn certificate_tail(m: f64, a: f64, radius: f64, last: usize) -> f64 {
    let ln_ar = (a * radius).ln();
    let mut sum = 0.0;
    for p in last + 1..last + 2000 {
        let term = m * (p as f64 * ln_ar - ln_factorial(2 * p as u64)).exp();
        sum += term;
        if term < sum * 1e-17 || term == 0.0 {
            break;
        }
    }
    sum
}

/// Analytic function `f(z) = Σ c_p z^p` on the disk `|z| < R`.
///
/// Certified functions satisfy the decay bound with the stored `(M, A)`,
/// `A ∈ (1/R, 1)`; the constructor enforces it. Uncertified functions (the
/// `exp` negative control) keep `(M, A)` only as nominal parameters for bound
/// evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorFunction {
    coeffs: Vec<Complex64>,
    m: f64,
    a: f64,
    radius: f64,
    tail_bound: f64,
    certified: bool,
}

impl TaylorFunction {
    /// Certified function from explicit coefficients; `tail_bound` is the sup
    /// over `|z| <= R` of the dropped tail (0 for a polynomial).
    pub fn new(coeffs: Vec<Complex64>, m: f64, a: f64, radius: f64, tail_bound: f64) -> Result<Self> {
        check_parameters(m, a, radius)?;
        if !(tail_bound >= 0.0) {
            return Err(Error::InvalidParameter(format!("tail_bound {tail_bound} must be >= 0")));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        if let Some(index) = validate_decay(&coeffs, m, a).first_violation {
            return Err(Error::CertificateViolation { index });
        }
        Ok(TaylorFunction { coeffs, m, a, radius, tail_bound, certified: true })
    }

    /// Function without a valid certificate. `m` and `a` are kept as nominal
    /// values for bound formulas.
    pub fn new_uncertified(coeffs: Vec<Complex64>, m: f64, a: f64, radius: f64, tail_bound: f64) -> Result<Self> {
        if !(radius > 1.0) || !(m > 0.0) || !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!("need M > 0, A in (0,1), R > 1; got M={m}, A={a}, R={radius}")));
        }
        Ok(TaylorFunction { coeffs, m, a, radius, tail_bound, certified: false })
    }

    /// `z^degree` with `M` fitted for the given `A`.
    pub fn monomial(degree: usize, a: f64) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
        coeffs[degree] = Complex64::new(1.0, 0.0);
        Self::polynomial(coeffs, a, None)
    }

    /// Polynomial preset: `M = max_p |c_p|(2p)!/A^p`; `R` defaults to `2/A`.
    pub fn polynomial(coeffs: Vec<Complex64>, a: f64, radius: Option<f64>) -> Result<Self> {
        let m = fitted_m(&coeffs, a);
        let radius = radius.unwrap_or(2.0 / a);
        Self::new(coeffs, m, a, radius, 0.0)
    }

    /// `cosh(√(A z)) = Σ A^p z^p / (2p)!` scaled by `M`. Stored up to
    /// `truncate` or, by default, until `M (A R)^p/(2p)! < 1e-30`.
    pub fn cosh_sqrt(a: f64, m: f64, truncate: Option<usize>, radius: Option<f64>) -> Result<Self> {
        let radius = radius.unwrap_or(2.0 / a);
        check_parameters(m, a, radius)?;
        let mut coeffs = Vec::new();
        let mut c = m;
        let mut p = 0usize;
        loop {
            if p > 0 {
                c *= a / ((2 * p - 1) as f64 * (2 * p) as f64);
            }
            let majorant = (p as f64 * (a * radius).ln() - ln_factorial(2 * p as u64)).exp() * m;
            let stop = match truncate {
                Some(t) => p > t,
                None => majorant < TRUNCATION_THRESHOLD && p > 0,
            };
            if stop {
                break;
            }
            coeffs.push(Complex64::new(c, 0.0));
            p += 1;
        }
        let tail = certificate_tail(m, a, radius, coeffs.len() - 1);
        Self::new(coeffs, m, a, radius, tail)
    }

    /// `exp(z) = Σ z^p/p!`, which violates every decay certificate. Nominal
    /// `(M, A)` default to `(1, 0.5)`; `R` to 10. Storage stops at the moment
    /// cap, with the remainder in `tail_bound`.
    pub fn exp_uncertified(m: Option<f64>, a: Option<f64>, radius: Option<f64>) -> Result<Self> {
        let radius = radius.unwrap_or(10.0);
        let mut coeffs = Vec::new();
        let mut c = 1.0f64;
        let mut p = 0usize;
        while p == 0 || (c * radius.powi(p as i32) >= TRUNCATION_THRESHOLD && p <= P_MAX_CAP) {
            coeffs.push(Complex64::new(c, 0.0));
            p += 1;
            c /= p as f64;
        }
        let mut tail = 0.0;
        let mut term = c * radius.powi(p as i32);
        while term > tail * 1e-17 {
            tail += term;
            p += 1;
            term *= radius / p as f64;
        }
        Self::new_uncertified(coeffs, m.unwrap_or(1.0), a.unwrap_or(0.5), radius, tail)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// True when every stored coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// True when only `c_0` may be nonzero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn has_real_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Highest stored index (`p_max` for moment tables).
    pub fn max_index(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The stored coefficients as a polynomial.
    pub fn polynomial_part(&self) -> ComplexPolynomial {
        ComplexPolynomial::new(self.coeffs.clone())
    }

    /// `f(z)`; fails outside the closed disk `|z| <= R`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_bound(z).map(|(v, _)| v)
    }

    /// `f(z)` together with the bound on the dropped tail.
    pub fn eval_with_bound(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let modulus = z.norm();
        if modulus > self.radius {
            return Err(Error::OutOfDisk { modulus, radius: self.radius });
        }
        Ok((self.eval_series(z), self.tail_bound))
    }

    /// Compensated sum of `c_p z^p` over the stored coefficients, with no
    /// disk check. The operator integrands use this on `[0, b_n]`, where
    /// `b_n` may exceed `R` for entire presets.
    pub fn eval_series(&self, z: Complex64) -> Complex64 {
        let mut acc = CompensatedSum::new();
        let mut power = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc.add(c * power);
            power *= z;
        }
        acc.value()
    }

    /// Termwise derivative of the given order (`1..=4`).
    ///
    /// A certified `(M, A)` passes to `(M A/2, A)` per differentiation, since
    /// `(p+1) M A^{p+1}/(2p+2)! <= (M A/2) A^p/(2p)!`.
    pub fn derivative(&self, order: usize) -> Result<Self> {
        if !(1..=4).contains(&order) {
            return Err(Error::InvalidParameter(format!("derivative order {order} must be in 1..=4")));
        }
        let mut coeffs = self.coeffs.clone();
        let mut m = self.m;
        for _ in 0..order {
            coeffs = coeffs.iter().enumerate().skip(1).map(|(p, c)| c * p as f64).collect();
            if coeffs.is_empty() {
                coeffs.push(Complex64::new(0.0, 0.0));
            }
            m *= self.a / 2.0;
        }
        if self.certified {
            let tail = if self.tail_bound == 0.0 {
                0.0
            } else {
                certificate_tail(m, self.a, self.radius, coeffs.len() - 1)
            };
            Self::new(coeffs, m, self.a, self.radius, tail)
        } else {
            Ok(TaylorFunction { coeffs, m, a: self.a, radius: self.radius, tail_bound: f64::INFINITY, certified: false })
        }
    }

    /// `α f + β g` over the union of stored coefficients; certified with
    /// `M = |α| M_f + |β| M_g` when both share `A` and are certified.
    pub fn linear_combination(alpha: Complex64, f: &Self, beta: Complex64, g: &Self) -> Result<Self> {
        let len = f.coeffs.len().max(g.coeffs.len());
        let coeffs: Vec<Complex64> = (0..len)
            .map(|p| {
                alpha * f.coeffs.get(p).copied().unwrap_or_default()
                    + beta * g.coeffs.get(p).copied().unwrap_or_default()
            })
            .collect();
        let radius = f.radius.min(g.radius);
        let m = (alpha.norm() * f.m + beta.norm() * g.m).max(f64::MIN_POSITIVE);
        let tail = alpha.norm() * f.tail_bound + beta.norm() * g.tail_bound;
        if f.certified && g.certified && f.a == g.a {
            Self::new(coeffs, m, f.a, radius, tail)
        } else {
            Self::new_uncertified(coeffs, m, f.a.max(g.a), radius, tail)
        }
    }
}

fn check_parameters(m: f64, a: f64, radius: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("M = {m} must be positive")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("A = {a} must lie in (0, 1)")));
    }
    if !(radius > 1.0) {
        return Err(Error::InvalidParameter(format!("R = {radius} must exceed 1")));
    }
    if !(a * radius > 1.0) {
        return Err(Error::InvalidParameter(format!("A = {a} must exceed 1/R = {}", 1.0 / radius)));
    }
    Ok(())
}

fn fitted_m(coeffs: &[Complex64], a: f64) -> f64 {
    let m = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(p, c)| (c.norm().ln() + ln_factorial(2 * p as u64) - p as f64 * a.ln()).exp())
        .fold(0.0f64, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}
