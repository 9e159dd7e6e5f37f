//! Measures the discretization bias of the Monte Carlo engine against the
//! closed forms at a ladder of step sizes. The bias of the
//! project-and-credit scheme shrinks like `sqrt(dt)`; the printed ratio
//! `bias / sqrt(dt)` settles to the constant used as the allowance `K`.

use divbarrier::analytic::{self, ValueCurve};
use divbarrier::simulate::{estimate_ruin_transform, estimate_value, PathConfig, Policy};
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let policy = NumericPolicy::default();
    let paths: usize = std::env::var("PATHS").ok().and_then(|s| s.parse().ok()).unwrap_or(40_000);
    println!("quantity,mu,dt,mc,se,analytic,bias_over_sqrt_dt");
    for mu in [0.2, 0.5, 1.0, 2.0, 5.0] {
        let a = analytic::threshold_a(mu, 1.0, 0.1)?;
        let firm = FirmParams::new(a / 2.0, mu, 1.0, 0.1)?;
        let loan = LoanSpec::new(&firm, mu + 0.5)?;
        let v = ValueCurve::no_loan(&firm, &policy)?;
        let v_hat = ValueCurve::borrowing(&firm, &loan, &policy)?;
        let a_hat = v_hat.threshold();
        let cost = analytic::loan_cost_c(firm.x, a_hat, &firm, &loan, loan.mu_star)?;
        let g = analytic::discounted_ruin_transform_g(firm.x, a, mu, 1.0, 0.1)?;
        for dt in [6.4e-3, 1.6e-3, 4e-4] {
            let cfg = PathConfig::new(dt, 2000.0, paths, 11)?.with_kill_rate(0.1);
            let plain = estimate_value(&firm, &Policy::dividends_only(a)?, None, &cfg)?;
            let borrow = estimate_value(&firm, &Policy::at_cap(a_hat, &firm, &loan)?, Some(&loan), &cfg)?;
            let ruin = estimate_ruin_transform(mu, 1.0, 0.1, a, firm.x, &cfg)?;
            let rows = [
                ("V", plain.mean, plain.std_error, v.eval(firm.x)),
                ("V_hat", borrow.mean, borrow.std_error, v_hat.eval(firm.x)),
                ("C", borrow.discounted_loans, borrow.loans_std_error, cost),
                ("g", ruin.mean, ruin.std_error, g),
            ];
            for (name, mc, se, exact) in rows {
                println!("{name},{mu},{dt},{mc:.5},{se:.5},{exact:.5},{:.3}", (mc - exact) / dt.sqrt());
            }
        }
    }
    Ok(())
}
