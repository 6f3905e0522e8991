//! Gauss-Legendre rules in double-double precision.

use super::Dd;
use std::f64::consts::PI;

/// Legendre `P_q(x)` and `P_{q-1}(x)` by the three-term recurrence.
fn legendre_pair_dd(q: usize, x: Dd) -> (Dd, Dd) {
    let mut prev = Dd::ONE;
    let mut cur = x;
    for j in 1..q {
        let next = ((x * cur).mul_f64((2 * j + 1) as f64) - prev.mul_f64(j as f64)).div_f64((j + 1) as f64);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn legendre_pair(q: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for j in 1..q {
        let next = ((2 * j + 1) as f64 * x * cur - j as f64 * prev) / (j + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Nodes and weights of the `q`-point Gauss-Legendre rule mapped to `[0, 1]`.
/// Exact for polynomials of degree `< 2q`.
pub fn gauss_legendre_unit(q: usize) -> Vec<(Dd, Dd)> {
    assert!(q >= 1, "Gauss-Legendre rule needs at least one node");
    if q == 1 {
        return vec![(Dd::new(0.5), Dd::ONE)];
    }
    let qf = q as f64;
    let mut out = Vec::with_capacity(q);
    for i in 0..q {
        // Tricomi initial guess, refined in f64 then polished in double-double.
        let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(q, x);
            let dp = qf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let mut xd = Dd::new(x);
        let mut deriv = Dd::ZERO;
        for _ in 0..3 {
            let (p, pm1) = legendre_pair_dd(q, xd);
            deriv = (xd * p - pm1).mul_f64(qf) / (xd * xd - Dd::ONE);
            xd = xd - p / deriv;
        }
        let one_minus_x2 = Dd::ONE - xd * xd;
        let w = Dd::new(2.0) / (one_minus_x2 * deriv * deriv);
        out.push(((xd.add_f64(1.0)).mul_f64(0.5), w.mul_f64(0.5)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for q in [1usize, 2, 5, 33, 80] {
            let rule = gauss_legendre_unit(q);
            let s = rule.iter().fold(Dd::ZERO, |a, (_, w)| a + *w);
            assert!((s - Dd::ONE).to_f64().abs() < 1e-28, "q={q}");
        }
    }

    #[test]
    fn integrates_monomials_exactly() {
        let q = 20;
        let rule = gauss_legendre_unit(q);
        for deg in 0..2 * q as u32 {
            let s = rule.iter().fold(Dd::ZERO, |a, (x, w)| a + *w * x.powi(deg));
            let exact = Dd::ONE.div_f64(deg as f64 + 1.0);
            assert!((s - exact).to_f64().abs() < 1e-28, "deg={deg}");
        }
    }

    #[test]
    fn nodes_inside_unit_interval() {
        for (x, w) in gauss_legendre_unit(64) {
            assert!(x.hi > 0.0 && x.hi < 1.0 && w.hi > 0.0);
        }
    }
}
