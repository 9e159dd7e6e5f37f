//! No-loan value, borrowing value and the greedy firm's value on a grid.
//!
//! cargo run --example value_curves -- [mu] [mu_star]

use divbarrier::analytic::{self, ValueCurve};
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("numeric argument"));
    let mu = args.next().unwrap_or(0.5);
    let mu_star = args.next().unwrap_or(1.2);
    let policy = NumericPolicy::default();
    let firm = FirmParams::new(0.0, mu, 1.0, 0.1)?;
    let loan = LoanSpec::new(&firm, mu_star)?;

    let v = ValueCurve::no_loan(&firm, &policy)?;
    let v_hat = ValueCurve::borrowing(&firm, &loan, &policy)?;
    let greedy = ValueCurve::greedy(&firm, &loan, &policy)?;
    println!("a = {:.6}, a_hat = {:.6}, a_star = {:.6}", v.threshold(), v_hat.threshold(), greedy.threshold());

    println!("{:>7} {:>9} {:>9} {:>9} {:>9}", "x", "V", "V_hat", "V_greedy", "C_greedy");
    let upper = 1.5 * v.threshold();
    for i in 0..=15 {
        let x = upper * i as f64 / 15.0;
        // the greedy firm reflects at a_star and pays for its loans
        let cost = analytic::loan_cost_c(x, greedy.threshold(), &firm, &loan, loan.mu_star)?;
        println!(
            "{x:>7.3} {:>9.4} {:>9.4} {:>9.4} {cost:>9.4}",
            v.eval(x),
            v_hat.eval(x),
            greedy.eval(x)
        );
    }
    Ok(())
}
