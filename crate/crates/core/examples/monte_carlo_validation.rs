//! Simulated barrier policies against the closed forms.
//!
//! cargo run --release --example monte_carlo_validation -- [paths] [dt]

use divbarrier::analytic;
use divbarrier::simulate::{self, PathConfig, Policy};
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let mut args = std::env::args().skip(1);
    let paths: usize = args.next().map_or(5000, |s| s.parse().expect("paths"));
    let dt: f64 = args.next().map_or(1e-3, |s| s.parse().expect("dt"));
    let policy = NumericPolicy::default();

    for mu in [0.2, 0.5, 1.0] {
        let a = analytic::threshold_a(mu, 1.0, 0.1)?;
        let firm = FirmParams::new(a / 2.0, mu, 1.0, 0.1)?;
        let loan = LoanSpec::new(&firm, mu + 0.5)?;
        let a_hat = analytic::threshold_a_hat(&firm, &loan, &policy)?;
        // killing at rate r keeps long-lived paths short without bias
        let cfg = PathConfig::new(dt, 2000.0, paths, 1)?.with_kill_rate(firm.r);

        let plain = simulate::estimate_value(&firm, &Policy::dividends_only(a)?, None, &cfg)?;
        let social = simulate::estimate_value(&firm, &Policy::at_cap(a_hat, &firm, &loan)?, Some(&loan), &cfg)?;
        let v = analytic::value_v(firm.x, &firm)?;
        let v_hat = analytic::value_v_hat(firm.x, &firm, &loan, &policy)?;
        let c = analytic::loan_cost_c(firm.x, a_hat, &firm, &loan, loan.mu_star)?;
        println!("mu = {mu}, x = {:.4}", firm.x);
        println!("  V      {v:>9.4}  mc {:>9.4} +- {:.4}", plain.mean, plain.std_error);
        println!("  V_hat  {v_hat:>9.4}  mc {:>9.4} +- {:.4}", social.mean, social.std_error);
        println!("  C      {c:>9.4}  mc {:>9.4} +- {:.4}", social.discounted_loans, social.loans_std_error);
    }
    Ok(())
}
