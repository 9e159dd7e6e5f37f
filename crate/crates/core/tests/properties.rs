use divbarrier::analytic::{self, ValueCurve};
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};
use proptest::prelude::*;

fn firm_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.01f64..3.0, 0.3f64..2.0, 0.02f64..0.3, 0.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_satisfy_vieta(mu in -3.0f64..3.0, sigma in 0.1f64..3.0, r in 0.01f64..0.5) {
        let g = analytic::char_roots(mu, sigma, r);
        let s2 = sigma * sigma;
        let sum = -2.0 * mu / s2;
        let prod = -2.0 * r / s2;
        prop_assert!(g.gamma_plus > 0.0 && g.gamma_minus < 0.0);
        prop_assert!(((g.gamma_plus + g.gamma_minus) - sum).abs() <= 1e-12 * (g.gamma_plus - g.gamma_minus));
        prop_assert!(((g.gamma_plus * g.gamma_minus) - prod).abs() <= 1e-12 * prod.abs());
    }

    #[test]
    fn borrowing_threshold_is_lower((mu, sigma, r, bump) in firm_strategy()) {
        let firm = FirmParams::new(0.0, mu, sigma, r).unwrap();
        let loan = LoanSpec::new(&firm, mu + bump).unwrap();
        let a = analytic::threshold_a(mu, sigma, r).unwrap();
        let a_hat = analytic::threshold_a_hat(&firm, &loan, &NumericPolicy::default()).unwrap();
        prop_assert!(a_hat <= a + 1e-9, "a_hat {} a {}", a_hat, a);
        prop_assert!(a_hat > 0.0);
    }

    #[test]
    fn borrowing_never_hurts((mu, sigma, r, bump) in firm_strategy(), t in 0.0f64..3.0) {
        let firm = FirmParams::new(0.0, mu, sigma, r).unwrap();
        let loan = LoanSpec::new(&firm, mu + bump).unwrap();
        let p = NumericPolicy::default();
        let v = ValueCurve::no_loan(&firm, &p).unwrap();
        let vh = ValueCurve::borrowing(&firm, &loan, &p).unwrap();
        let x = t * v.threshold();
        prop_assert!(vh.eval(x) >= v.eval(x) - 1e-9 * (1.0 + v.eval(x)));
    }

    #[test]
    fn value_is_increasing_and_concave_below_threshold((mu, sigma, r, _b) in firm_strategy()) {
        let firm = FirmParams::new(0.0, mu, sigma, r).unwrap();
        let v = ValueCurve::no_loan(&firm, &NumericPolicy::default()).unwrap();
        let a = v.threshold();
        let vals: Vec<f64> = (0..=50).map(|i| v.eval(a * i as f64 / 50.0)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(vals.windows(3).all(|w| w[2] - w[1] <= w[1] - w[0] + 1e-12));
    }

    #[test]
    fn ruin_transform_decreases_in_worth((mu, sigma, r, _b) in firm_strategy(), barrier in 0.1f64..5.0) {
        let g = |x: f64| analytic::discounted_ruin_transform_g(x, barrier, mu, sigma, r).unwrap();
        prop_assert!((g(0.0) - 1.0).abs() < 1e-12);
        let vals: Vec<f64> = (0..=40).map(|i| g((barrier * i as f64 / 40.0).min(barrier))).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
    }

    #[test]
    fn loan_cost_is_bounded_by_perpetual_loan((mu, sigma, r, bump) in firm_strategy(), x in 0.0f64..4.0) {
        let firm = FirmParams::new(x, mu, sigma, r).unwrap();
        let loan = LoanSpec::new(&firm, mu + bump).unwrap();
        let a_hat = analytic::threshold_a_hat(&firm, &loan, &NumericPolicy::default()).unwrap();
        let c = analytic::loan_cost_c(x, a_hat, &firm, &loan, loan.mu_star).unwrap();
        prop_assert!(c >= 0.0 && c <= bump / r + 1e-12);
    }
}
