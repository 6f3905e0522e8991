//! Basis functions, basis moment integrals, compensated summation and
//! quadrature on circles and intervals.

pub mod contour;
pub mod dd;
pub mod gauss;

pub use contour::{contour_integral, ContourSamples, ContourSpec};
pub use dd::{Dd, DdComplex};

use crate::error::{Error, Result};
use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

/// Largest number of series terms any truncation rule may request.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Szász-Mirakjan weight `p_{n,k}(z/b_n) = e^{-nz/b_n} (nz/b_n)^k / k!`.
///
/// Magnitude and phase are accumulated separately in log space, so `k` far
/// beyond 170 neither overflows nor underflows before the final `exp`.
pub fn poisson_weight(n: u32, b_n: f64, k: usize, z: Complex64) -> Result<Complex64> {
    let lambda = z * (n as f64 / b_n);
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    }
    let kf = k as f64;
    let log_mag = kf * lambda.norm().ln() - lambda.re - ln_factorial(k as u64);
    if log_mag > f64::MAX.ln() {
        return Err(Error::Overflow { log_magnitude: log_mag });
    }
    let phase = if k == 0 { -lambda.im } else { kf * lambda.arg() - lambda.im };
    Ok(Complex64::from_polar(log_mag.exp(), phase))
}

/// Closed-form `∫_0^{b_n} φ_{n,k}(t/b_n) t^p dt = b_n^{p+1} n!(k+p)! / (k!(n+p+1)!)`,
/// evaluated through log-factorial differences.
///
/// For `k > n` the Bernstein weight vanishes termwise; this returns the
/// Gamma-function continuation of the same expression, which is what the
/// operator's moment identities (`F_n e_0 = 1`) require.
pub fn bernstein_moment_integral(n: u32, k: usize, p: usize, b_n: f64) -> f64 {
    let (n, k, p) = (n as u64, k as u64, p as u64);
    let log_ratio =
        ln_factorial(n) + ln_factorial(k + p) - ln_factorial(k) - ln_factorial(n + p + 1);
    ((p + 1) as f64 * b_n.ln() + log_ratio).exp()
}

/// The normalised inner integral `(n+1)/b_n · ∫ φ_{n,k}(t/b_n) t^p dt`
/// `= b_n^p Π_{j=1}^{p} (k+j)/(n+1+j)`, carried in double-double.
pub fn normalized_moment_integral_dd(n: u32, k: usize, p: usize, b_n: f64) -> Dd {
    let mut acc = Dd::ONE;
    for j in 1..=p {
        acc = acc.mul_f64((k + j) as f64).mul_f64(b_n).div_f64((n as usize + 1 + j) as f64);
    }
    acc
}

/// Smallest truncation index `K` such that the tail `Σ_{k>K}` of a Poisson
/// series with weights `W_k` is below `tol`.
///
/// `lambda` is the Poisson parameter (`n z / b_n`), `log_weight(k)` returns
/// `ln W_k`, and `W_{k+1}/W_k <= (k+1+degree)/(k+1)` must hold. The tail is
/// dominated geometrically from `K+1` on: with term bound
/// `t_k = e^{-Re λ}|λ|^k/k! · W_k` and ratio `ρ = |λ|(K+2+degree)/(K+2)^2 < 1`,
/// `tail <= t_{K+1}/(1-ρ)`.
pub fn poisson_cutoff(
    lambda: Complex64,
    degree: usize,
    log_weight: impl Fn(usize) -> f64,
    tol: f64,
) -> Result<usize> {
    let lam = lambda.norm();
    if lam == 0.0 {
        return Ok(0);
    }
    let ln_lam = lam.ln();
    let mut k = lam.floor() as usize;
    loop {
        if k >= MAX_SERIES_TERMS {
            return Err(Error::Truncation { limit: MAX_SERIES_TERMS });
        }
        let next = k + 1;
        let rho = lam * (next + 1 + degree) as f64 / ((next + 1) as f64).powi(2);
        if rho < 1.0 {
            let log_term =
                next as f64 * ln_lam - lambda.re - ln_factorial(next as u64) + log_weight(next);
            if log_term - (1.0 - rho).ln() < tol.ln() {
                return Ok(k);
            }
        }
        k += 1;
    }
}

/// Accumulator with double-double error tracking for complex terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    acc: DdComplex,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: Complex64) {
        self.acc = self.acc.add_complex(term);
    }

    pub fn add_dd(&mut self, term: DdComplex) {
        self.acc = self.acc + term;
    }

    pub fn value(&self) -> Complex64 {
        self.acc.to_complex()
    }

    pub fn value_dd(&self) -> DdComplex {
        self.acc
    }
}

impl Extend<Complex64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = Complex64>>(&mut self, iter: I) {
        for t in iter {
            self.add(t);
        }
    }
}

/// Sum of `terms` with compensated accumulation; the relative error does not
/// grow with the sequence length.
pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(terms: I) -> Complex64 {
    let mut s = CompensatedSum::new();
    s.extend(terms);
    s.value()
}
