//! Structural checks on a value curve: smooth fit, ODE residual,
//! supermartingale drift and a brute-force barrier scan.
//!
//! cargo run --example verify_checks

use divbarrier::analytic::ValueCurve;
use divbarrier::verify::{self, BarrierGrid, Objective, SmoothFitTolerance};
use divbarrier::{FirmParams, LoanSpec, NumericPolicy};

fn main() -> divbarrier::Result<()> {
    let policy = NumericPolicy::default();
    let firm = FirmParams::new(1.0, 0.5, 1.0, 0.1)?;
    let loan = LoanSpec::new(&firm, 1.0)?;

    for curve in [ValueCurve::no_loan(&firm, &policy)?, ValueCurve::borrowing(&firm, &loan, &policy)?] {
        println!("{:?} (threshold {:.6})", curve.kind(), curve.threshold());
        let fit = verify::check_smooth_fit(&curve, &policy, SmoothFitTolerance::default());
        println!(
            "  smooth fit   {:?}: |V'-1| {:.2e}, |V''| {:.2e}",
            fit.status, fit.slope_residual, fit.curvature_residual
        );
        let ode = verify::check_ode_residual(&curve, &policy, 200);
        println!("  ode residual {:?}: {:.2e} (tol {:.2e})", ode.status, ode.max_residual, ode.tol);
        let cap = curve.dynamics().borrow_cap;
        let xs: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
        let drift = verify::check_supermartingale_drift(&curve, &xs, &verify::default_rate_grid(cap), &policy, 1e-6)?;
        println!("  drift        {:?}: {} violations", drift.status, drift.violations.len());
    }

    let a_hat = ValueCurve::borrowing(&firm, &loan, &policy)?.threshold();
    let grid = BarrierGrid::with_spacing(2.0 * a_hat, 0.005);
    let best = verify::brute_force_threshold(&firm, Some(&loan), Objective::ProfitMinusCost, &grid, &policy)?;
    println!("brute force barrier {:.4} vs a_hat {a_hat:.4} (cell {:.4})", best.best_barrier, best.spacing);
    Ok(())
}
