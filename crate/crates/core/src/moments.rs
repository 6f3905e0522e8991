//! Moment polynomials `Π_{n,p}(z) = F_n(e_p; z)`.
//!
//! Two independent routes: the three-term recurrence
//!
//! ```text
//! Π_{n,p+1}(z) = b_n z/(n+p+2) Π'_{n,p}(z) + (nz + (p+1) b_n)/(n+p+2) Π_{n,p}(z),   Π_{n,0} = 1,
//! ```
//!
//! and the defining Poisson series with closed-form inner integrals.

use crate::error::{Error, Result};
use crate::function_model::ComplexPolynomial;
use crate::numerics::{normalized_moment_integral_dd, poisson_cutoff, Dd, DdComplex};
use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

pub const P_MAX_CAP: usize = 64;

/// `Π_{n,0..=p_max}` for one `(n, b_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    n: u32,
    b_n: f64,
    polys: Vec<ComplexPolynomial>,
}

impl MomentTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn b_n(&self) -> f64 {
        self.b_n
    }

    pub fn p_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, p: usize) -> &ComplexPolynomial {
        &self.polys[p]
    }

    pub fn polys(&self) -> &[ComplexPolynomial] {
        &self.polys
    }

    pub fn eval(&self, p: usize, z: Complex64) -> Complex64 {
        self.polys[p].eval(z)
    }
}

fn check_n_b(n: u32, b_n: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(b_n > 0.0 && b_n.is_finite()) {
        return Err(Error::InvalidParameter(format!("b_n = {b_n} must be positive")));
    }
    Ok(())
}

/// Builds the table by the recurrence. Differentiation is exact coefficient
/// shifting; the coefficient arithmetic runs in double-double and each
/// coefficient is rounded once.
pub fn moment_recurrence(n: u32, b_n: f64, p_max: usize) -> Result<MomentTable> {
    check_n_b(n, b_n)?;
    if p_max > P_MAX_CAP {
        return Err(Error::PmaxCap { requested: p_max, cap: P_MAX_CAP });
    }
    let nf = n as f64;
    let mut current = vec![Dd::ONE];
    let mut polys = Vec::with_capacity(p_max + 1);
    polys.push(ComplexPolynomial::from_real(&[1.0]));
    for p in 0..p_max {
        let denom = (n as usize + p + 2) as f64;
        let next: Vec<Dd> = (0..=p + 1)
            .map(|j| {
                // ((j+p+1) b a_j + n a_{j-1}) / (n+p+2)
                let own = current.get(j).map_or(Dd::ZERO, |a| a.mul_f64((j + p + 1) as f64).mul_f64(b_n));
                let lower = if j > 0 { current[j - 1].mul_f64(nf) } else { Dd::ZERO };
                (own + lower).div_f64(denom)
            })
            .collect();
        polys.push(ComplexPolynomial::from_real(&next.iter().map(|c| c.to_f64()).collect::<Vec<_>>()));
        current = next;
    }
    Ok(MomentTable { n, b_n, polys })
}

/// `(n+1)/b_n Σ_k p_{n,k}(z/b_n) ∫_0^{b_n} φ_{n,k}(t/b_n) t^p dt`, summed
/// directly from the Poisson series.
///
/// Terms are carried in double-double: for `Re z < 0` the series cancels by
/// a factor `exp(|λ| - Re λ)`, `λ = nz/b_n`. Truncation uses
/// [`poisson_cutoff`] with the weight growth `(k+1+p)/(k+1)`.
pub fn moment_direct(n: u32, b_n: f64, p: usize, z: Complex64, tol: f64) -> Result<Complex64> {
    check_n_b(n, b_n)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be positive")));
    }
    let nf = n as f64;
    let lambda_f = z * (nf / b_n);
    let log_weight = |k: usize| {
        p as f64 * b_n.ln()
            + (1..=p).map(|j| (((k + j) as f64) / ((n as usize + 1 + j) as f64)).ln()).sum::<f64>()
    };
    let cutoff = poisson_cutoff(lambda_f, p, log_weight, tol)?;
    let lambda = DdComplex::from(z).scale_f64(nf).div_f64(b_n);

    let mut term = DdComplex::ONE;
    let mut sum = DdComplex::ZERO;
    for k in 0..=cutoff {
        if k > 0 {
            term = (term * lambda).div_f64(k as f64);
        }
        sum = sum + term.scale(normalized_moment_integral_dd(n, k, p, b_n));
    }
    Ok(scale_by_exp_neg(sum, lambda))
}

/// `e^{-λ} · s` with the low part of `λ` folded in to first order.
pub(crate) fn scale_by_exp_neg(s: DdComplex, lambda: DdComplex) -> Complex64 {
    let hi = Complex64::new(lambda.re.hi, lambda.im.hi);
    let lo = Complex64::new(lambda.re.lo, lambda.im.lo);
    let e = (-hi).exp() * (Complex64::new(1.0, 0.0) - lo);
    s.mul_complex(e).to_complex()
}

/// `(2p)! r^p (b_n+1)/(n+2)`, the bound on `||Π_{n,p} - e_p||_r`.
pub fn moment_error_bound(n: u32, b_n: f64, p: usize, r: f64) -> Result<f64> {
    if p < 1 || !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("need p >= 1 and r >= 1 (p = {p}, r = {r})")));
    }
    let log = ln_factorial(2 * p as u64) + p as f64 * r.ln();
    Ok(log.exp() * (b_n + 1.0) / (n as f64 + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_moments_closed_forms() {
        let (n, b) = (12u32, 12f64.sqrt());
        let t = moment_recurrence(n, b, 2).unwrap();
        assert_eq!(t.poly(0), &ComplexPolynomial::from_real(&[1.0]));
        let nf = n as f64;
        let p1 = ComplexPolynomial::from_real(&[b / (nf + 2.0), nf / (nf + 2.0)]);
        for (x, y) in t.poly(1).coeffs().iter().zip(p1.coeffs()) {
            assert_relative_eq!(x.re, y.re, max_relative = 1e-15);
        }
        let d = (nf + 2.0) * (nf + 3.0);
        let p2 = [2.0 * b * b / d, 4.0 * nf * b / d, nf * nf / d];
        for (x, y) in t.poly(2).coeffs().iter().zip(p2) {
            assert_relative_eq!(x.re, y, max_relative = 1e-15);
        }
    }

    #[test]
    fn cap_on_p_max() {
        assert_eq!(moment_recurrence(10, 3.0, 65), Err(Error::PmaxCap { requested: 65, cap: 64 }));
        assert!(moment_recurrence(10, 3.0, 64).is_ok());
    }

    #[test]
    fn direct_p0_is_one() {
        for z in [Complex64::new(0.0, 0.0), Complex64::new(1.5, -0.5), Complex64::new(-2.0, 0.0)] {
            let v = moment_direct(10, 10f64.sqrt(), 0, z, 1e-15).unwrap();
            assert!((v - 1.0).norm() < 1e-14, "{v}");
        }
    }

    #[test]
    fn direct_at_origin() {
        // only k = 0 survives: b^p p!(n+1)!/(n+p+1)!
        let (n, b) = (9u32, 3.0f64);
        for p in 0..6usize {
            let v = moment_direct(n, b, p, Complex64::new(0.0, 0.0), 1e-15).unwrap();
            let expected = b.powi(p as i32)
                * (ln_factorial(p as u64) + ln_factorial(n as u64 + 1) - ln_factorial((n as usize + p + 1) as u64)).exp();
            assert_relative_eq!(v.re, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn direct_agrees_with_recurrence_example() {
        let (n, b) = (10u32, 10f64.sqrt());
        let z = Complex64::new(1.0, 0.5);
        let t = moment_recurrence(n, b, 2).unwrap();
        let d = moment_direct(n, b, 2, z, 1e-16).unwrap();
        assert!((t.eval(2, z) - d).norm() <= 1e-10 * d.norm());
    }

    #[test]
    fn error_bound_values() {
        let (n, b, r) = (8u32, 2.0, 1.0);
        assert_relative_eq!(moment_error_bound(n, b, 2, r).unwrap(), 7.2, max_relative = 1e-14);
        assert_relative_eq!(moment_error_bound(n, b, 1, 1.7).unwrap(), 2.0 * 1.7 * 3.0 / 10.0, max_relative = 1e-14);
        assert!(moment_error_bound(n, b, 0, 1.0).is_err());
        assert!(moment_error_bound(n, b, 3, 1.5).unwrap() > moment_error_bound(n, b, 3, 1.2).unwrap());
        assert!(moment_error_bound(n, 2.5, 3, 1.5).unwrap() > moment_error_bound(n, b, 3, 1.5).unwrap());
        assert!(moment_error_bound(64, b, 64, 2.0).unwrap().is_finite());
    }
}
