//! Discounted ruin transform and loan cost as the barrier moves.
//!
//! cargo run --example loan_cost

use divbarrier::analytic;
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let policy = NumericPolicy::default();
    let firm = FirmParams::new(0.5, 0.5, 1.0, 0.1)?;
    let loan = LoanSpec::new(&firm, 1.2)?;
    let a_hat = analytic::threshold_a_hat(&firm, &loan, &policy)?;
    let a_star = analytic::threshold_a(loan.mu_star, firm.sigma, firm.r)?;
    println!("x = {}, cap = {}, a_hat = {a_hat:.4}, a_star = {a_star:.4}", firm.x, loan.cap(&firm));

    println!("{:>8} {:>10} {:>10} {:>12} {:>10}", "barrier", "g(x)", "C(x)", "dividends", "net");
    for b in [0.5, 1.0, 1.5, a_hat, 2.5, a_star, 3.5] {
        let g = analytic::discounted_ruin_transform_g(firm.x.min(b), b, loan.mu_star, firm.sigma, firm.r)?;
        let c = analytic::loan_cost_c(firm.x, b, &firm, &loan, loan.mu_star)?;
        let div = analytic::barrier_dividend_value(firm.x, b, loan.mu_star, firm.sigma, firm.r, &policy)?;
        println!("{b:>8.4} {g:>10.6} {c:>10.4} {div:>12.4} {:>10.4}", div - c);
    }
    println!("V_hat(x) = {:.6}", analytic::value_v_hat(firm.x, &firm, &loan, &policy)?);
    Ok(())
}
