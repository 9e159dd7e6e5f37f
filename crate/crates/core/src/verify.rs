//! Numerical re-derivation of the structural facts behind the closed forms:
//! smooth fit at the threshold, the ODE on the continuation region, the
//! supermartingale drift inequality for every admissible payout rate, and
//! optimality of the threshold against a brute-force barrier scan.
//!
//! All derivatives are finite differences of the value function itself, so
//! the checks do not share code with the closed-form derivatives.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, Dynamics, ValueCurve};
use crate::error::{Error, Result};
use crate::model::{FirmParams, LoanSpec, NumericPolicy};

/// Anything that looks like a barrier value function: an ODE piece below the
/// threshold and a payout piece above it.
pub trait CandidateValue {
    fn threshold(&self) -> f64;
    /// The continuation piece, defined for any real `x`.
    fn continuation(&self, x: f64) -> f64;
    /// The payout piece, defined for any real `x`.
    fn payout(&self, x: f64) -> f64;
    fn dynamics(&self) -> Dynamics;
    /// Scale of the value, used to make tolerances relative.
    fn level(&self) -> f64;

    fn is_degenerate(&self) -> bool {
        false
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= self.threshold() {
            self.continuation(x)
        } else {
            self.payout(x)
        }
    }
}

impl CandidateValue for ValueCurve {
    fn threshold(&self) -> f64 {
        ValueCurve::threshold(self)
    }
    fn continuation(&self, x: f64) -> f64 {
        ValueCurve::continuation(self, x)
    }
    fn payout(&self, x: f64) -> f64 {
        ValueCurve::payout(self, x)
    }
    fn dynamics(&self) -> Dynamics {
        ValueCurve::dynamics(self)
    }
    fn level(&self) -> f64 {
        ValueCurve::level(self)
    }
    fn is_degenerate(&self) -> bool {
        ValueCurve::is_degenerate(self)
    }
}

/// Shortest exponential length of the continuation ODE, `1 / max|gamma|`.
pub fn length_scale(d: &Dynamics) -> f64 {
    let g = analytic::char_roots(d.effective_drift(), d.sigma, d.r);
    1.0 / g.gamma_plus.abs().max(g.gamma_minus.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// `mu <= 0`: there is no free boundary to check.
    Degenerate,
}

impl CheckStatus {
    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothFitReport {
    pub status: CheckStatus,
    pub threshold: f64,
    /// `|V'(threshold-) - 1|`
    pub slope_residual: f64,
    /// `|V''(threshold-)|`
    pub curvature_residual: f64,
    pub slope_tol: f64,
    pub curvature_tol: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothFitTolerance {
    pub slope: f64,
    pub curvature: f64,
}

impl Default for SmoothFitTolerance {
    fn default() -> Self {
        Self {
            slope: 1e-5,
            curvature: 1e-4,
        }
    }
}

/// One-sided finite differences from below the threshold.
pub fn check_smooth_fit<C: CandidateValue>(
    curve: &C,
    policy: &NumericPolicy,
    tol: SmoothFitTolerance,
) -> SmoothFitReport {
    let a = curve.threshold();
    if curve.is_degenerate() {
        return SmoothFitReport {
            status: CheckStatus::Degenerate,
            threshold: a,
            slope_residual: 0.0,
            curvature_residual: 0.0,
            slope_tol: tol.slope,
            curvature_tol: tol.curvature,
            step: 0.0,
        };
    }
    let v = |x: f64| curve.continuation(x);
    let h = policy.fd_step * length_scale(&curve.dynamics());
    // second-order backward stencils
    let slope = (3.0 * v(a) - 4.0 * v(a - h) + v(a - 2.0 * h)) / (2.0 * h);
    // curvature needs a wider step: roundoff scales as eps * level / h^2
    let h2 = 100.0 * h;
    let curvature =
        (2.0 * v(a) - 5.0 * v(a - h2) + 4.0 * v(a - 2.0 * h2) - v(a - 3.0 * h2)) / (h2 * h2);
    let slope_residual = (slope - 1.0).abs();
    let curvature_residual = curvature.abs();
    SmoothFitReport {
        status: CheckStatus::from_bool(slope_residual < tol.slope && curvature_residual < tol.curvature),
        threshold: a,
        slope_residual,
        curvature_residual,
        slope_tol: tol.slope,
        curvature_tol: tol.curvature,
        step: h,
    }
}

/// Fourth-order central first and second derivatives.
fn central_derivatives(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// `(V', V'')` at `x`, differentiating whichever piece `x` lies on.
fn derivatives<C: CandidateValue>(curve: &C, x: f64, h: f64) -> (f64, f64) {
    if x <= curve.threshold() {
        central_derivatives(|y| curve.continuation(y), x, h)
    } else {
        central_derivatives(|y| curve.payout(y), x, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub status: CheckStatus,
    pub max_residual: f64,
    pub at: f64,
    pub tol: f64,
    pub points: usize,
}

/// Max of `|-rV + (mu + b) V' + (sigma^2/2) V'' - b|` over `points` interior
/// grid points of `(0, threshold)`, against `ode_tol * level`.
pub fn check_ode_residual<C: CandidateValue>(curve: &C, policy: &NumericPolicy, points: usize) -> OdeReport {
    let tol = policy.ode_tol * curve.level().abs().max(f64::MIN_POSITIVE);
    if curve.is_degenerate() || points == 0 {
        return OdeReport {
            status: CheckStatus::Degenerate,
            max_residual: 0.0,
            at: 0.0,
            tol,
            points: 0,
        };
    }
    let d = curve.dynamics();
    let h = 100.0 * policy.fd_step * length_scale(&d);
    let a = curve.threshold();
    let (mut worst, mut at) = (0.0f64, 0.0);
    for i in 1..=points {
        let x = a * i as f64 / (points + 1) as f64;
        let (d1, d2) = central_derivatives(|y| curve.continuation(y), x, h);
        let res = -d.r * curve.continuation(x) + d.effective_drift() * d1 + 0.5 * d.sigma * d.sigma * d2
            - d.borrow_cap;
        if res.abs() > worst {
            worst = res.abs();
            at = x;
        }
    }
    OdeReport {
        status: CheckStatus::from_bool(worst < tol),
        max_residual: worst,
        at,
        tol,
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftViolation {
    pub x: f64,
    pub rate: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub status: CheckStatus,
    pub max_drift: f64,
    pub tol: f64,
    pub points_checked: usize,
    pub violations: Vec<DriftViolation>,
}

/// Payout rates to probe: the borrowing limit `-cap` (when positive), zero,
/// and a spread of positive rates up to a large one.
pub fn default_rate_grid(cap: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    if cap > 0.0 {
        grid.extend([-cap, -0.5 * cap]);
    }
    grid.extend([0.0, 0.1, 1.0, 10.0, 1e3]);
    grid
}

/// Evaluates the drift of `V(X_t) e^{-rt} + int e^{-rs} dZ_s`,
/// `-rV + mu V' + (sigma^2/2) V'' + z (1 - V')`, for each worth in `x_grid`
/// and each payout rate `z` in `rate_grid`, and lists the points where it
/// exceeds `tol`. Rates below `-cap` are not admissible and are rejected.
pub fn check_supermartingale_drift<C: CandidateValue>(
    curve: &C,
    x_grid: &[f64],
    rate_grid: &[f64],
    policy: &NumericPolicy,
    tol: f64,
) -> Result<DriftReport> {
    let d = curve.dynamics();
    if let Some(&bad) = rate_grid.iter().find(|&&z| z < -d.borrow_cap || !z.is_finite()) {
        return Err(Error::invalid(
            "rate_grid",
            format!("rate {bad} is below the borrowing limit {}", -d.borrow_cap),
        ));
    }
    let h = 100.0 * policy.fd_step * length_scale(&d);
    let mut violations = Vec::new();
    let mut max_drift = f64::NEG_INFINITY;
    for &x in x_grid {
        let (d1, d2) = derivatives(curve, x, h);
        let base = -d.r * curve.eval(x) + d.drift * d1 + 0.5 * d.sigma * d.sigma * d2;
        for &z in rate_grid {
            let drift = base + z * (1.0 - d1);
            max_drift = max_drift.max(drift);
            if drift > tol {
                violations.push(DriftViolation { x, rate: z, drift });
            }
        }
    }
    Ok(DriftReport {
        status: CheckStatus::from_bool(violations.is_empty()),
        max_drift,
        tol,
        points_checked: x_grid.len() * rate_grid.len(),
        violations,
    })
}

/// Worths on `[0, upper]` where `V(x) < x - tol`.
pub fn check_value_exceeds_worth<C: CandidateValue>(curve: &C, upper: f64, points: usize, tol: f64) -> Vec<f64> {
    (0..=points)
        .map(|i| upper * i as f64 / points.max(1) as f64)
        .filter(|&x| curve.eval(x) < x - tol)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Discounted dividends only.
    Profit,
    /// Discounted dividends minus discounted loans.
    ProfitMinusCost,
}

/// Candidate barriers `upper * i / cells`, `i = 1..=cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierGrid {
    pub upper: f64,
    pub cells: usize,
}

impl BarrierGrid {
    /// 400 cells on `(0, 2 * threshold]`.
    pub fn around(threshold: f64) -> Self {
        Self {
            upper: 2.0 * threshold,
            cells: 400,
        }
    }

    /// Cells of at most `max_spacing` on `(0, upper]`.
    pub fn with_spacing(upper: f64, max_spacing: f64) -> Self {
        Self {
            upper,
            cells: (upper / max_spacing).ceil().max(1.0) as usize,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.upper / self.cells as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.cells).map(move |i| self.upper * i as f64 / self.cells as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub best_barrier: f64,
    pub best_value: f64,
    pub spacing: f64,
}

/// Scans barrier policies on `grid` and returns the one with the best
/// analytic objective at worth `firm.x`. With a loan the firm borrows at the
/// cap, so the dividends are those of drift `mu_star`.
pub fn brute_force_threshold(
    firm: &FirmParams,
    loan: Option<&LoanSpec>,
    objective: Objective,
    grid: &BarrierGrid,
    policy: &NumericPolicy,
) -> Result<BruteForceResult> {
    if grid.cells == 0 || !(grid.upper > 0.0) {
        return Err(Error::invalid("grid", "needs at least one cell and a positive upper end"));
    }
    let drift = loan.map_or(firm.mu, |l| l.mu_star);
    if drift <= 0.0 {
        return Err(Error::DegenerateDrift(drift));
    }
    let mut best = BruteForceResult {
        best_barrier: f64::NAN,
        best_value: f64::NEG_INFINITY,
        spacing: grid.spacing(),
    };
    for b in grid.points() {
        let profit = analytic::barrier_dividend_value(firm.x, b, drift, firm.sigma, firm.r, policy)?;
        let value = match (objective, loan) {
            (Objective::ProfitMinusCost, Some(l)) => {
                profit - analytic::loan_cost_c(firm.x, b, firm, l, l.mu_star)?
            }
            _ => profit,
        };
        if value > best.best_value {
            best.best_value = value;
            best.best_barrier = b;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> NumericPolicy {
        NumericPolicy::default()
    }

    /// `base` plus a smooth bump on the continuation piece.
    struct Bumped {
        base: ValueCurve,
        amp: f64,
        center: f64,
        width: f64,
    }

    impl CandidateValue for Bumped {
        fn threshold(&self) -> f64 {
            self.base.threshold()
        }
        fn continuation(&self, x: f64) -> f64 {
            let u = (x - self.center) / self.width;
            self.base.continuation(x) + self.amp * (-u * u).exp()
        }
        fn payout(&self, x: f64) -> f64 {
            self.base.payout(x)
        }
        fn dynamics(&self) -> Dynamics {
            self.base.dynamics()
        }
        fn level(&self) -> f64 {
            self.base.level()
        }
    }

    fn reference() -> (FirmParams, LoanSpec) {
        let f = FirmParams::new(0.5, 0.5, 1.0, 0.1).unwrap();
        let loan = LoanSpec::new(&f, 1.0).unwrap();
        (f, loan)
    }

    #[test]
    fn smooth_fit_holds_for_closed_forms() {
        let (f, loan) = reference();
        let reference = FirmParams::new(0.0, 1.0, 1.0, 0.1).unwrap();
        for curve in [
            ValueCurve::no_loan(&reference, &pol()).unwrap(),
            ValueCurve::borrowing(&f, &loan, &pol()).unwrap(),
            ValueCurve::greedy(&f, &loan, &pol()).unwrap(),
        ] {
            let rep = check_smooth_fit(&curve, &pol(), SmoothFitTolerance::default());
            assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
            assert!(rep.slope_residual < 1e-5 && rep.curvature_residual < 1e-5);
        }
    }

    #[test]
    fn smooth_fit_skips_degenerate_curve() {
        let f = FirmParams::new(0.5, -0.2, 1.0, 0.1).unwrap();
        let curve = ValueCurve::no_loan(&f, &pol()).unwrap();
        let rep = check_smooth_fit(&curve, &pol(), SmoothFitTolerance::default());
        assert_eq!(rep.status, CheckStatus::Degenerate);
    }

    #[test]
    fn smooth_fit_flags_wrong_threshold_curve() {
        let (f, _) = reference();
        let base = ValueCurve::no_loan(&f, &pol()).unwrap();
        let bumped = Bumped {
            base,
            amp: 0.01,
            center: base.threshold() - 0.2,
            width: 0.3,
        };
        let rep = check_smooth_fit(&bumped, &pol(), SmoothFitTolerance::default());
        assert_eq!(rep.status, CheckStatus::Fail);
    }

    #[test]
    fn ode_residuals_are_small() {
        let (f, loan) = reference();
        for curve in [
            ValueCurve::no_loan(&f, &pol()).unwrap(),
            ValueCurve::borrowing(&f, &loan, &pol()).unwrap(),
        ] {
            let rep = check_ode_residual(&curve, &pol(), 200);
            assert_eq!(rep.status, CheckStatus::Pass, "{rep:?}");
        }
    }

    #[test]
    fn drift_is_zero_on_continuation_without_payout() {
        let f = FirmParams::new(0.0, 1.0, 1.0, 0.1).unwrap();
        let curve = ValueCurve::no_loan(&f, &pol()).unwrap();
        let xs: Vec<f64> = (1..20).map(|i| curve.threshold() * i as f64 / 20.0).collect();
        let rep = check_supermartingale_drift(&curve, &xs, &[0.0], &pol(), 1e-6).unwrap();
        assert!(rep.max_drift.abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn drift_nonpositive_above_threshold() {
        let (f, loan) = reference();
        let curve = ValueCurve::borrowing(&f, &loan, &pol()).unwrap();
        let a = curve.threshold();
        let xs: Vec<f64> = (1..20).map(|i| a + 0.25 * i as f64).collect();
        let rep =
            check_supermartingale_drift(&curve, &xs, &default_rate_grid(0.5), &pol(), 1e-9).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.max_drift < 0.0);
    }

    #[test]
    fn drift_detector_catches_a_bump() {
        let (f, _) = reference();
        let base = ValueCurve::no_loan(&f, &pol()).unwrap();
        let bumped = Bumped {
            base,
            amp: 0.05,
            center: 0.5 * base.threshold(),
            width: 0.2,
        };
        let xs: Vec<f64> = (0..200).map(|i| 2.0 * base.threshold() * i as f64 / 200.0).collect();
        let rep = check_supermartingale_drift(&bumped, &xs, &default_rate_grid(0.0), &pol(), 1e-6).unwrap();
        assert_eq!(rep.status, CheckStatus::Fail);
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn rates_below_borrowing_limit_are_rejected() {
        let (f, _) = reference();
        let curve = ValueCurve::no_loan(&f, &pol()).unwrap();
        assert!(check_supermartingale_drift(&curve, &[0.5], &[-0.1], &pol(), 1e-6).is_err());
    }

    #[test]
    fn brute_force_finds_closed_form_threshold() {
        let f = FirmParams::new(0.5, 1.0, 1.0, 0.1).unwrap();
        let a = analytic::threshold_a(1.0, 1.0, 0.1).unwrap();
        let grid = BarrierGrid::around(a);
        let best = brute_force_threshold(&f, None, Objective::Profit, &grid, &pol()).unwrap();
        assert!((best.best_barrier - a).abs() <= grid.spacing(), "{best:?} vs {a}");
    }

    #[test]
    fn brute_force_objectives_agree_without_subsidy() {
        let f = FirmParams::new(0.5, 0.6, 1.0, 0.1).unwrap();
        let loan = LoanSpec::new(&f, 0.6).unwrap();
        let grid = BarrierGrid::around(analytic::threshold_a(0.6, 1.0, 0.1).unwrap());
        let p = brute_force_threshold(&f, Some(&loan), Objective::Profit, &grid, &pol()).unwrap();
        let pc = brute_force_threshold(&f, Some(&loan), Objective::ProfitMinusCost, &grid, &pol()).unwrap();
        assert_eq!(p.best_barrier, pc.best_barrier);
    }

    #[test]
    fn value_exceeds_worth_for_reference_firm() {
        let f = FirmParams::new(0.0, 1.0, 1.0, 0.1).unwrap();
        let curve = ValueCurve::no_loan(&f, &pol()).unwrap();
        assert!(check_value_exceeds_worth(&curve, 20.0, 400, 1e-12).is_empty());
    }
}
