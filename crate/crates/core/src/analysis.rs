//! Disk sup-norms, Cauchy-integral derivatives, the lower-order functional,
//! Bernstein-inequality checks, convergence-order fitting and n-sweeps.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::function_model::{ComplexPolynomial, TaylorFunction};
use crate::numerics::{ContourSamples, ContourSpec};
use crate::operator::{
    error_polynomial, image_polynomial, residual_polynomial, upper_constant, voronovskaja_constant, BnRule,
    OperatorConfig, DEFAULT_N0,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const SUP_SAMPLES: usize = 256;
pub const MIN_SUP_SAMPLES: usize = 64;
/// Relative allowance for sup-norm underestimation in bound checks.
pub const SAMPLING_SLACK: f64 = 1e-9;
/// Boundary points at which derivative errors are measured.
pub const DERIVATIVE_SAMPLES: usize = 128;
/// Nodes refined by golden-section search in [`disk_sup_norm`].
const REFINED_PEAKS: usize = 3;
const GOLDEN_ITERATIONS: usize = 60;

/// `max_{|z| = r} |g(z)|`, equal to the disk sup-norm for `g` analytic on
/// `|z| <= r`. Samples `samples` (at least 64) equispaced boundary points,
/// then refines the best local maxima by golden-section search within one
/// node spacing.
pub fn disk_sup_norm(g: impl Fn(Complex64) -> Complex64, r: f64, samples: usize) -> f64 {
    let samples = samples.max(MIN_SUP_SAMPLES);
    let at = |theta: f64| g(Complex64::from_polar(r, theta)).norm();
    let values: Vec<f64> = (0..samples).map(|j| at(TAU * j as f64 / samples as f64)).collect();
    let mut best = values.iter().copied().fold(0.0, f64::max);
    if r == 0.0 {
        return best;
    }

    let mut peaks: Vec<usize> = (0..samples)
        .filter(|&j| {
            let v = values[j];
            v >= values[(j + samples - 1) % samples] && v >= values[(j + 1) % samples]
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let h = TAU / samples as f64;
    for &j in peaks.iter().take(REFINED_PEAKS) {
        let centre = h * j as f64;
        best = best.max(golden_max(&at, centre - h, centre + h));
    }
    best
}

/// [`disk_sup_norm`] for fallible evaluators; the first error aborts.
pub fn try_disk_sup_norm(g: impl Fn(Complex64) -> Result<Complex64>, r: f64, samples: usize) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let value = disk_sup_norm(
        |z| match g(z) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        r,
        samples,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            best = best.max(f2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            best = best.max(f1);
        }
    }
    best
}

/// `g^{(p)}(z)` by the trapezoidal Cauchy integral over `contour`.
pub fn cauchy_derivative(
    g: impl Fn(Complex64) -> Complex64,
    p: usize,
    z: Complex64,
    contour: &ContourSpec,
) -> Result<Complex64> {
    if p == 0 {
        return Err(Error::InvalidParameter("derivative order must be >= 1".into()));
    }
    ContourSamples::new(g, *contour).cauchy_integral(p, z)
}

/// `(b_n+1) C p! r1 / ((n+2)(r1-r)^{p+1})`.
pub fn derivative_error_bound(p: usize, r: f64, r1: f64, c: f64, n: u32, b_n: f64) -> Result<f64> {
    if !(r < r1) {
        return Err(Error::Geometry { r, r1 });
    }
    let factorial: f64 = (1..=p).map(|i| i as f64).product();
    Ok((b_n + 1.0) * c * factorial * r1 / ((n as f64 + 2.0) * (r1 - r).powi(p as i32 + 1)))
}

/// `z(1 - z/(2b_n)) f''(z) + (1 - 2z/b_n) f'(z)` as a polynomial.
pub fn lower_order_polynomial(f: &TaylorFunction, b_n: f64) -> Result<ComplexPolynomial> {
    let d1 = f.derivative(1)?.polynomial_part();
    let d2 = f.derivative(2)?.polynomial_part();
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(ComplexPolynomial::linear_combination([
        (c(1.0), &d2.shift(1)),
        (c(-0.5 / b_n), &d2.shift(2)),
        (c(1.0), &d1),
        (c(-2.0 / b_n), &d1.shift(1)),
    ]))
}

/// `‖z(1 - z/(2b_n)) f'' + (1 - 2z/b_n) f'‖_r`.
pub fn lower_order_functional(f: &TaylorFunction, cfg: &OperatorConfig, r: f64) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::DegenerateData("lower-order functional of the zero function".into()));
    }
    let b_n = cfg.validate()?;
    let poly = lower_order_polynomial(f, b_n)?;
    Ok(disk_sup_norm(|z| poly.eval(z), r, SUP_SAMPLES))
}

/// `‖P'‖_r <= (deg P / r) ‖P‖_r` up to [`SAMPLING_SLACK`].
pub fn bernstein_inequality_check(poly: &ComplexPolynomial, r: f64) -> Result<bool> {
    let degree = match poly.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::InvalidParameter("Bernstein check needs degree >= 1".into())),
    };
    let d = poly.derivative();
    let lhs = disk_sup_norm(|z| d.eval(z), r, SUP_SAMPLES);
    let rhs = degree as f64 / r * disk_sup_norm(|z| poly.eval(z), r, SUP_SAMPLES);
    Ok(lhs <= rhs * (1.0 + SAMPLING_SLACK))
}

/// One row of an n-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: u32,
    pub b_n: f64,
    /// Measured sup-norm.
    pub error: f64,
    /// Theoretical bound.
    pub bound: f64,
    /// `error` divided by the nominal order: `(b_n+1)/(n+2)`, squared for
    /// Voronovskaja sweeps.
    pub ratio: f64,
    pub derivative_order: usize,
    /// `error <= bound` up to [`SAMPLING_SLACK`].
    pub passes: bool,
    /// Whether the row is asserted: certified function and `n >= n_0`.
    pub asserted: bool,
}

impl ConvergenceRecord {
    pub fn fails_assertion(&self) -> bool {
        self.asserted && !self.passes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl OrderFit {
    /// `ratio_max / ratio_min`.
    pub fn window(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }
}

/// Least-squares fit of `log(error)` against `log(n)` with the ratio range.
pub fn fit_order(records: &[ConvergenceRecord]) -> Result<OrderFit> {
    if records.len() < 5 {
        return Err(Error::DegenerateData(format!("order fit needs >= 5 records, got {}", records.len())));
    }
    if let Some(r) = records.iter().find(|r| !(r.error > 0.0) || !r.error.is_finite()) {
        return Err(Error::DegenerateData(format!("non-positive error {} at n = {}", r.error, r.n)));
    }
    let mut ns: Vec<u32> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() != records.len() {
        return Err(Error::DegenerateData("order fit needs distinct n".into()));
    }
    let xs: Vec<f64> = records.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.error.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let ratio_min = records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = records.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(OrderFit { slope, intercept, ratio_min, ratio_max })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of the fit over each prefix of `records`; `NaN` until two rows
/// with positive error are available.
pub fn running_slopes(records: &[ConvergenceRecord]) -> Vec<f64> {
    (0..records.len())
        .map(|i| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = records[..=i]
                .iter()
                .filter(|r| r.error > 0.0)
                .map(|r| ((r.n as f64).ln(), r.error.ln()))
                .unzip();
            if xs.len() < 2 {
                f64::NAN
            } else {
                least_squares(&xs, &ys).0
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Geometric,
    Linear,
}

/// `n` values from `start` to `stop` inclusive, doubling or stepping by one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGrid {
    pub start: u32,
    pub stop: u32,
    pub growth: Growth,
}

impl NGrid {
    pub fn values(&self) -> Result<Vec<u32>> {
        if self.start == 0 || self.start > self.stop {
            return Err(Error::InvalidParameter(format!("bad n range {}..{}", self.start, self.stop)));
        }
        Ok(match self.growth {
            Growth::Linear => (self.start..=self.stop).collect(),
            Growth::Geometric => {
                std::iter::successors(Some(self.start), |&n| n.checked_mul(2)).take_while(|&n| n <= self.stop).collect()
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepKind {
    /// `‖F_n f - f‖_r` against `C_{r,A} (b_n+1)/(n+2)`.
    Upper,
    /// Sup of the Voronovskaja residual against `L_{r,A} ((b_n+1)/(n+2))^2`.
    Voronovskaja,
    /// Cauchy-derivative errors of order `p` with contour radius `r1`.
    Derivative { p: usize, r1: f64 },
}

impl SweepKind {
    pub fn derivative_order(&self) -> usize {
        match self {
            SweepKind::Derivative { p, .. } => *p,
            _ => 0,
        }
    }

    /// Nominal log-log slope of the bound under `rule`.
    pub fn nominal_slope(&self, rule: BnRule) -> f64 {
        match self {
            SweepKind::Voronovskaja => 2.0 * rule.order_slope(),
            _ => rule.order_slope(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub rule: BnRule,
    pub ns: Vec<u32>,
    pub r: f64,
    pub kind: SweepKind,
    pub n0: u32,
    pub exec: Execution,
}

impl SweepConfig {
    pub fn new(rule: BnRule, ns: Vec<u32>, r: f64, kind: SweepKind) -> Self {
        SweepConfig { rule, ns, r, kind, n0: DEFAULT_N0, exec: Execution::default() }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

/// Runs the sweep, one row per `n`, in the order of `cfg.ns`.
pub fn sweep(f: &TaylorFunction, cfg: &SweepConfig) -> Result<Vec<ConvergenceRecord>> {
    let r = cfg.r;
    let outer = match cfg.kind {
        SweepKind::Derivative { p, r1 } => {
            if !(1..=4).contains(&p) {
                return Err(Error::InvalidParameter(format!("derivative order {p} must be in 1..=4")));
            }
            if !(r < r1) {
                return Err(Error::Geometry { r, r1 });
            }
            r1
        }
        _ => r,
    };
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be >= 1")));
    }
    if outer > f.radius() {
        return Err(Error::OutOfDisk { modulus: outer, radius: f.radius() });
    }
    cfg.exec.try_map(&cfg.ns, |&n| sweep_row(f, cfg, n, outer))
}

fn sweep_row(f: &TaylorFunction, cfg: &SweepConfig, n: u32, outer: f64) -> Result<ConvergenceRecord> {
    let op = OperatorConfig::new(n, cfg.rule);
    let b_n = op.validate()?;
    if outer > b_n {
        return Err(Error::RightOfStrip { re: outer, b_n });
    }
    let r = cfg.r;
    let scale = op.order_scale();
    let (m, a) = (f.m(), f.a());
    let (error, bound, ratio) = match cfg.kind {
        SweepKind::Upper => {
            let e = error_polynomial(f, &op)?;
            let error = disk_sup_norm(|z| e.eval(z), r, SUP_SAMPLES);
            (error, upper_constant(m, a, r)? * scale, error / scale)
        }
        SweepKind::Voronovskaja => {
            let e = residual_polynomial(f, &op)?;
            let error = disk_sup_norm(|z| e.eval(z), r, SUP_SAMPLES);
            (error, voronovskaja_constant(m, a, r)? * scale * scale, error / (scale * scale))
        }
        SweepKind::Derivative { p, r1 } => {
            let image = image_polynomial(f, &op)?;
            let target = f.derivative(p)?;
            let contour = ContourSpec::centered(r1)?;
            let mut samples = ContourSamples::new(|z| image.eval(z), contour);
            let mut error = 0.0f64;
            for j in 0..DERIVATIVE_SAMPLES {
                let z = Complex64::from_polar(r, TAU * j as f64 / DERIVATIVE_SAMPLES as f64);
                let d = samples.cauchy_integral(p, z)?;
                error = error.max((d - target.eval_series(z)).norm());
            }
            let bound = derivative_error_bound(p, r, r1, upper_constant(m, a, r1)?, n, b_n)?;
            (error, bound, error / scale)
        }
    };
    Ok(ConvergenceRecord {
        n,
        b_n,
        error,
        bound,
        ratio,
        derivative_order: cfg.kind.derivative_order(),
        passes: error <= bound * (1.0 + SAMPLING_SLACK),
        asserted: f.is_certified() && n >= cfg.n0,
    })
}

/// First `n` in `n0..=limit` with
/// `(b_n+1)/(n+2) · L_{r,A} <= ½ · lower_order_functional(f, n, r)`, from
/// which on `‖F_n f - f‖_r >= (b_n+1)/(2(n+2)) · lower_order_functional`.
pub fn lower_floor_index(f: &TaylorFunction, rule: BnRule, r: f64, n0: u32, limit: u32) -> Result<Option<u32>> {
    if f.is_constant() {
        return Err(Error::DegenerateData("lower floor of a constant function".into()));
    }
    let l = voronovskaja_constant(f.m(), f.a(), r)?;
    for n in n0.max(1)..=limit {
        let op = OperatorConfig::new(n, rule);
        if op.validate().is_err() {
            continue;
        }
        if op.order_scale() * l <= 0.5 * lower_order_functional(f, &op, r)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `‖F_n f - f‖_r` for a single `n`.
pub fn upper_error(f: &TaylorFunction, cfg: &OperatorConfig, r: f64) -> Result<f64> {
    let e = error_polynomial(f, cfg)?;
    Ok(disk_sup_norm(|z| e.eval(z), r, SUP_SAMPLES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sup_norm_of_monomials_and_constants() {
        for p in 0..6 {
            let v = disk_sup_norm(|z| z.powi(p), 1.7, 256);
            assert_relative_eq!(v, 1.7f64.powi(p), max_relative = 1e-14);
        }
        assert_relative_eq!(disk_sup_norm(|_| Complex64::new(3.0, -4.0), 2.0, 64), 5.0);
    }

    #[test]
    fn refinement_finds_off_node_maximum() {
        // maximum at θ = 0.01, between nodes
        let w = Complex64::from_polar(1.0, 0.01);
        let v = disk_sup_norm(|z| 1.0 / (z - 1.2 * w), 1.0, 64);
        assert_relative_eq!(v, 5.0, max_relative = 1e-10);
    }

    #[test]
    fn first_moment_error_sup_norm() {
        let e1 = TaylorFunction::monomial(1, 0.2).unwrap();
        let cfg = OperatorConfig::new(48, BnRule::Sqrt);
        let b = cfg.b_n();
        for r in [1.0, 2.0] {
            let v = upper_error(&e1, &cfg, r).unwrap();
            assert_relative_eq!(v, (b + 2.0 * r) / 50.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn cauchy_examples() {
        let contour = ContourSpec::centered(2.0).unwrap();
        let d = cauchy_derivative(|z| z * z, 1, c(0.5), &contour).unwrap();
        assert!((d - 1.0).norm() < 1e-13);
        let d = cauchy_derivative(|_| c(4.0), 3, c(0.2), &contour).unwrap();
        assert!(d.norm() < 1e-12);
        assert!(cauchy_derivative(|z| z, 1, c(2.0), &contour).is_err());
    }

    #[test]
    fn derivative_bound_example() {
        let n = 48;
        let v = derivative_error_bound(1, 1.5, 2.0, 2.0 / 3.0, n, (n as f64).sqrt()).unwrap();
        assert_relative_eq!(v, 0.845_675_011_229_387_6, max_relative = 1e-14);
        assert!(matches!(derivative_error_bound(1, 2.0, 2.0, 1.0, n, 1.0), Err(Error::Geometry { .. })));
        let near = derivative_error_bound(1, 1.5, 1.5 + 1e-6, 1.0, n, 1.0).unwrap();
        assert!(near > 1e10);
        let b1 = derivative_error_bound(1, 1.5, 2.0, 1.0, n, 7.0).unwrap();
        let b2 = derivative_error_bound(2, 1.5, 2.0, 1.0, n, 7.0).unwrap();
        assert!(b2 > b1);
    }

    #[test]
    fn lower_functional_examples() {
        let cfg = OperatorConfig::new(50, BnRule::Sqrt);
        let b = cfg.b_n();
        let e1 = TaylorFunction::monomial(1, 0.2).unwrap();
        assert_relative_eq!(lower_order_functional(&e1, &cfg, 1.0).unwrap(), 1.0 + 2.0 / b, max_relative = 1e-12);
        let one = TaylorFunction::monomial(0, 0.2).unwrap();
        assert_eq!(lower_order_functional(&one, &cfg, 1.0).unwrap(), 0.0);
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        assert!(lower_order_functional(&f, &cfg, 1.0).unwrap() > 0.0);
        let zero = TaylorFunction::polynomial(vec![c(0.0)], 0.2, None).unwrap();
        assert!(lower_order_functional(&zero, &cfg, 1.0).is_err());
    }

    #[test]
    fn bernstein_extremal_and_degenerate() {
        for p in 1..8 {
            assert!(bernstein_inequality_check(&ComplexPolynomial::monomial(p), 1.3).unwrap());
        }
        assert!(bernstein_inequality_check(&ComplexPolynomial::constant(c(1.0)), 1.0).is_err());
    }

    fn synthetic(errors: impl Fn(f64) -> f64) -> Vec<ConvergenceRecord> {
        [8u32, 16, 32, 64, 128, 256]
            .iter()
            .map(|&n| ConvergenceRecord {
                n,
                b_n: 1.0,
                error: errors(n as f64),
                bound: 1.0,
                ratio: errors(n as f64),
                derivative_order: 0,
                passes: true,
                asserted: true,
            })
            .collect()
    }

    #[test]
    fn fit_exact_power_law() {
        let fit = fit_order(&synthetic(|n| 3.0 / n.sqrt())).unwrap();
        assert!((fit.slope + 0.5).abs() <= 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), max_relative = 1e-12);
        let flat = fit_order(&synthetic(|_| 0.25)).unwrap();
        assert!(flat.slope.abs() <= 1e-12);
        assert_eq!(flat.window(), 1.0);
        let slopes = running_slopes(&synthetic(|n| n.powi(-2)));
        assert!(slopes[0].is_nan());
        assert!(slopes[1..].iter().all(|s| (s + 2.0).abs() < 1e-12));
    }

    #[test]
    fn fit_rejects_degenerate_data() {
        let mut rows = synthetic(|n| 1.0 / n);
        rows[2].error = 0.0;
        assert!(matches!(fit_order(&rows), Err(Error::DegenerateData(_))));
        assert!(fit_order(&synthetic(|n| 1.0 / n)[..4]).is_err());
        let mut dup = synthetic(|n| 1.0 / n);
        dup[1].n = dup[0].n;
        assert!(fit_order(&dup).is_err());
    }

    #[test]
    fn grids() {
        let g = NGrid { start: 8, stop: 512, growth: Growth::Geometric };
        assert_eq!(g.values().unwrap(), vec![8, 16, 32, 64, 128, 256, 512]);
        let l = NGrid { start: 4, stop: 7, growth: Growth::Linear };
        assert_eq!(l.values().unwrap(), vec![4, 5, 6, 7]);
        assert!(NGrid { start: 9, stop: 3, growth: Growth::Linear }.values().is_err());
    }

    #[test]
    fn sweep_rows_are_ordered_and_pass() {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let ns = vec![4, 9, 16, 33];
        for kind in [SweepKind::Upper, SweepKind::Voronovskaja, SweepKind::Derivative { p: 1, r1: 2.0 }] {
            let rows = sweep(&f, &SweepConfig::new(BnRule::Sqrt, ns.clone(), 1.5, kind)).unwrap();
            assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), ns);
            assert!(rows.iter().all(|r| r.passes && r.asserted), "{kind:?}: {rows:?}");
        }
    }

    #[test]
    fn sweep_geometry_errors() {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let bad = SweepConfig::new(BnRule::Sqrt, vec![16], 2.0, SweepKind::Derivative { p: 1, r1: 1.5 });
        assert!(matches!(sweep(&f, &bad), Err(Error::Geometry { .. })));
        let strip = SweepConfig::new(BnRule::Sqrt, vec![4], 2.5, SweepKind::Upper);
        assert!(matches!(sweep(&f, &strip), Err(Error::RightOfStrip { .. })));
    }
}
