//! Trapezoidal quadrature on circles.
//!
//! For an integrand analytic in an annulus around the circle the trapezoid
//! rule converges geometrically; it is exact when the Laurent expansion on
//! the circle has bandwidth below the node count.

use super::CompensatedSum;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const DEFAULT_NODES: usize = 256;
pub const MAX_NODES: usize = 4096;
const AGREEMENT: f64 = 1e-11;

/// Circle `center + radius·e^{iθ}` discretised by `node_count` equispaced nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    radius: f64,
    center: Complex64,
    node_count: usize,
}

impl ContourSpec {
    pub fn new(radius: f64, center: Complex64, node_count: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("contour radius {radius} must be positive")));
        }
        if node_count < 8 || !node_count.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "node_count {node_count} must be even and at least 8"
            )));
        }
        Ok(ContourSpec { radius, center, node_count })
    }

    /// Circle about the origin with the default node count.
    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(radius, Complex64::new(0.0, 0.0), DEFAULT_NODES)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn with_nodes(&self, node_count: usize) -> Result<Self> {
        Self::new(self.radius, self.center, node_count)
    }

    pub fn node(&self, j: usize) -> Complex64 {
        self.center + self.offset(j)
    }

    /// `ν_j - center`.
    fn offset(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / self.node_count as f64)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.node_count).map(|j| self.node(j)).collect()
    }
}

/// Trapezoidal approximation of `(1/2πi) ∮ g(ν) dν` from samples of `g` at the
/// contour nodes.
pub fn contour_integral(samples: &[Complex64], contour: &ContourSpec) -> Result<Complex64> {
    if samples.len() != contour.node_count {
        return Err(Error::LengthMismatch { expected: contour.node_count, got: samples.len() });
    }
    let mut acc = CompensatedSum::new();
    for (j, g) in samples.iter().enumerate() {
        acc.add(g * contour.offset(j));
    }
    Ok(acc.value() / contour.node_count as f64)
}

/// Samples of a function on a contour at node counts `base·2^j`, cached so
/// that many Cauchy integrals over the same circle share evaluations.
pub struct ContourSamples<F> {
    g: F,
    contour: ContourSpec,
    levels: Vec<Vec<Complex64>>,
}

impl<F: Fn(Complex64) -> Complex64> ContourSamples<F> {
    pub fn new(g: F, contour: ContourSpec) -> Self {
        ContourSamples { g, contour, levels: Vec::new() }
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    fn level(&mut self, j: usize) -> Result<(ContourSpec, &[Complex64])> {
        let spec = self.contour.with_nodes(self.contour.node_count << j)?;
        while self.levels.len() <= j {
            let level = self.levels.len();
            let s = self.contour.with_nodes(self.contour.node_count << level)?;
            let samples = (0..s.node_count).map(|i| (self.g)(s.node(i))).collect();
            self.levels.push(samples);
        }
        Ok((spec, &self.levels[j]))
    }

    fn trapezoid(&mut self, j: usize, p: usize, z: Complex64) -> Result<(Complex64, f64)> {
        let (spec, samples) = self.level(j)?;
        let mut acc = CompensatedSum::new();
        let mut g_max = 0.0f64;
        for (i, g) in samples.iter().enumerate() {
            let off = spec.offset(i);
            let w = spec.center + off - z;
            acc.add(g * off / w.powi(p as i32 + 1));
            g_max = g_max.max(g.norm());
        }
        Ok((acc.value() / spec.node_count as f64, g_max))
    }

    /// `(p!/2πi) ∮ g(ν)/(ν - z)^{p+1} dν`, i.e. `g^{(p)}(z)` for `g` analytic on
    /// and inside the contour. The node count doubles from the contour's base
    /// count until two successive values agree to `1e-11` relative or
    /// [`MAX_NODES`] is reached.
    pub fn cauchy_integral(&mut self, p: usize, z: Complex64) -> Result<Complex64> {
        let distance = (z - self.contour.center).norm();
        let radius = self.contour.radius;
        if !(distance < radius) {
            return Err(Error::PointOnContour { distance, radius });
        }
        let factorial: f64 = (1..=p).map(|i| i as f64).product();
        let gap = radius - distance;
        let (mut prev, _) = self.trapezoid(0, p, z)?;
        let mut j = 0;
        while self.contour.node_count << (j + 1) <= MAX_NODES {
            j += 1;
            let (cur, g_max) = self.trapezoid(j, p, z)?;
            let floor = 1e-15 * radius * g_max / gap.powi(p as i32 + 1);
            if (cur - prev).norm() * factorial <= AGREEMENT * (cur.norm() * factorial) + floor * factorial {
                return Ok(cur * factorial);
            }
            prev = cur;
        }
        Err(Error::ContourNonconvergence { max_nodes: MAX_NODES })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ContourSpec::new(1.0, zero(), 7).is_err());
        assert!(ContourSpec::new(1.0, zero(), 10).is_ok());
        assert!(ContourSpec::new(1.0, zero(), 11).is_err());
        assert!(ContourSpec::new(0.0, zero(), 16).is_err());
    }

    #[test]
    fn constant_integrates_to_zero() {
        let c = ContourSpec::new(1.3, zero(), 64).unwrap();
        let samples = vec![Complex64::new(2.0, -1.0); 64];
        assert!(contour_integral(&samples, &c).unwrap().norm() < 1e-15);
    }

    #[test]
    fn reciprocal_has_unit_residue() {
        for n in [8usize, 16, 256] {
            let c = ContourSpec::new(1.0, zero(), n).unwrap();
            let samples: Vec<_> = c.nodes().iter().map(|v| 1.0 / v).collect();
            let val = contour_integral(&samples, &c).unwrap();
            assert_relative_eq!(val.re, 1.0, max_relative = 1e-14);
            assert!(val.im.abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_cube_integrates_to_zero() {
        let c = ContourSpec::new(2.0, zero(), 256).unwrap();
        let samples: Vec<_> = c.nodes().iter().map(|v| v.powi(3)).collect();
        assert!(contour_integral(&samples, &c).unwrap().norm() < 1e-13);
    }

    #[test]
    fn length_mismatch() {
        let c = ContourSpec::new(2.0, zero(), 16).unwrap();
        assert_eq!(
            contour_integral(&[zero(); 3], &c),
            Err(Error::LengthMismatch { expected: 16, got: 3 })
        );
    }

    #[test]
    fn cauchy_integral_of_square() {
        let c = ContourSpec::centered(2.0).unwrap();
        let mut s = ContourSamples::new(|v: Complex64| v * v, c);
        let d = s.cauchy_integral(1, Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(d.re, 1.0, max_relative = 1e-13);
        assert!(d.im.abs() < 1e-13);
        assert!(s.cauchy_integral(2, Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn cauchy_integral_of_constant_vanishes() {
        let c = ContourSpec::centered(1.5).unwrap();
        let mut s = ContourSamples::new(|_| Complex64::new(3.0, 1.0), c);
        for p in 1..4 {
            assert!(s.cauchy_integral(p, Complex64::new(0.2, -0.7)).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn cauchy_integral_of_exp_is_exp() {
        let c = ContourSpec::centered(2.0).unwrap();
        let mut s = ContourSamples::new(|v: Complex64| v.exp(), c);
        let z = Complex64::new(-0.3, 1.2);
        for p in 1..=4 {
            let d = s.cauchy_integral(p, z).unwrap();
            assert!((d - z.exp()).norm() < 1e-11 * z.exp().norm());
        }
    }
}
