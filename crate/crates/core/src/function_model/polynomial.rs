use crate::numerics::{CompensatedSum, DdComplex};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Dense polynomial with complex coefficients in ascending degree.
///
/// Canonical form: no trailing zero coefficients; the zero polynomial has an
/// empty coefficient list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        ComplexPolynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z^p`.
    pub fn monomial(p: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); p + 1];
        coeffs[p] = Complex64::new(1.0, 0.0);
        ComplexPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    /// Horner evaluation carried in double-double, rounded once at the end.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = DdComplex::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_complex(z).add_complex(*c);
        }
        acc.to_complex()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    /// Multiplication by `z^shift`.
    pub fn shift(&self, shift: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shift];
        coeffs.extend_from_slice(&self.coeffs);
        ComplexPolynomial { coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `Σ_i w_i P_i`, each coefficient accumulated with compensation.
    pub fn linear_combination<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Complex64, &'a ComplexPolynomial)>,
    {
        let mut acc: Vec<CompensatedSum> = Vec::new();
        for (w, p) in terms {
            if acc.len() < p.coeffs.len() {
                acc.resize(p.coeffs.len(), CompensatedSum::new());
            }
            for (slot, c) in acc.iter_mut().zip(&p.coeffs) {
                slot.add(w * c);
            }
        }
        Self::new(acc.iter().map(CompensatedSum::value).collect())
    }
}

impl Add for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let one = Complex64::new(1.0, 0.0);
        ComplexPolynomial::linear_combination([(one, self), (one, rhs)])
    }
}

impl Sub for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        let one = Complex64::new(1.0, 0.0);
        ComplexPolynomial::linear_combination([(one, self), (-one, rhs)])
    }
}

impl Mul for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: &ComplexPolynomial) -> ComplexPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPolynomial::zero();
        }
        let mut acc = vec![CompensatedSum::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                acc[i + j].add(a * b);
            }
        }
        ComplexPolynomial::new(acc.iter().map(CompensatedSum::value).collect())
    }
}
