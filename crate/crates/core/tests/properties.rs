use proptest::prelude::*;
use sdc_core::analysis::{bernstein_inequality_check, disk_sup_norm};
use sdc_core::function_model::validate_decay;
use sdc_core::moments::{moment_error_bound, moment_recurrence};
use sdc_core::operator::{apply, residual};
use sdc_core::{BnRule, Complex64, ComplexPolynomial, OperatorConfig, TaylorFunction};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn moment_error_within_bound(n in 2u32..400, p in 1usize..12, r in 1.0f64..3.0) {
        let b = (n as f64).sqrt();
        prop_assume!(r <= b);
        let table = moment_recurrence(n, b, p).unwrap();
        let err = disk_sup_norm(|z| table.eval(p, z) - z.powi(p as i32), r, 256);
        prop_assert!(err <= moment_error_bound(n, b, p, r).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn constant_preserved(n in 2u32..2000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let one = TaylorFunction::monomial(0, 0.2).unwrap();
        let cfg = OperatorConfig::new(n, BnRule::Sqrt);
        let z = Complex64::new(re.min(cfg.b_n()), im);
        prop_assert_eq!(apply(&one, &cfg, z).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn linear_functions_have_exact_residual(n in 2u32..2000, a in complex(), b in complex(), z in complex()) {
        let f = TaylorFunction::polynomial(vec![a, b], 0.2, None).unwrap();
        let cfg = OperatorConfig::new(n, BnRule::Pow23);
        prop_assert!(residual(&f, &cfg, z * 2.0).unwrap().norm() <= 1e-13);
    }

    #[test]
    fn image_of_real_function_is_real_on_axis(n in 2u32..600, x in -1.0f64..1.0) {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let cfg = OperatorConfig::new(n, BnRule::Sqrt);
        let v = apply(&f, &cfg, Complex64::new(2.0 * x, 0.0)).unwrap();
        prop_assert_eq!(v.im, 0.0);
    }

    #[test]
    fn operator_is_linear(n in 2u32..300, s in complex(), z in complex()) {
        let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
        let g = TaylorFunction::monomial(4, 0.2).unwrap();
        let h = TaylorFunction::linear_combination(s, &f, Complex64::new(1.0, 0.0), &g).unwrap();
        let cfg = OperatorConfig::new(n, BnRule::Sqrt);
        let lhs = apply(&h, &cfg, z).unwrap();
        let rhs = s * apply(&f, &cfg, z).unwrap() + apply(&g, &cfg, z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }

    #[test]
    fn derivatives_keep_certificate(order in 1usize..=4, a in 0.05f64..0.9) {
        let f = TaylorFunction::cosh_sqrt(a, 1.0, None, None).unwrap();
        let d = f.derivative(order).unwrap();
        prop_assert!(validate_decay(d.coeffs(), d.m(), d.a()).valid);
    }

    #[test]
    fn bernstein_inequality(degree in 1usize..=10, seed in proptest::collection::vec(complex(), 10), r in 0.5f64..2.0) {
        let mut coeffs = vec![Complex64::new(0.0, 0.0)];
        coeffs.extend(seed.into_iter().take(degree));
        if coeffs[degree].norm() < 1e-3 {
            coeffs[degree] = Complex64::new(1.0, 0.0);
        }
        prop_assert!(bernstein_inequality_check(&ComplexPolynomial::new(coeffs), r).unwrap());
    }
}
