//! Characteristic roots and dividend thresholds across drifts.
//!
//! cargo run --example roots_and_thresholds

use divbarrier::analytic;
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let (sigma, r) = (1.0, 0.1);
    let policy = NumericPolicy::default();
    println!("{:>6} {:>10} {:>10} {:>8} {:>8} {:>8}", "mu", "gamma+", "gamma-", "a", "a_hat", "a_star");
    for mu in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0] {
        let g = analytic::char_roots(mu, sigma, r);
        let a = analytic::threshold_a(mu, sigma, r)?;
        let firm = FirmParams::new(0.0, mu, sigma, r)?;
        // borrowing lifts the drift by half a unit
        let loan = LoanSpec::new(&firm, mu + 0.5)?;
        let a_hat = analytic::threshold_a_hat(&firm, &loan, &policy)?;
        let a_star = analytic::threshold_a(loan.mu_star, sigma, r)?;
        println!(
            "{mu:>6} {:>10.6} {:>10.6} {a:>8.4} {a_hat:>8.4} {a_star:>8.4}",
            g.gamma_plus, g.gamma_minus
        );
    }
    Ok(())
}
