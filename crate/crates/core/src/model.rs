//! Domain types and the numeric policy shared by the other modules.
//!
//! A firm is described by its current worth `x`, profit drift `mu`,
//! volatility `sigma` and discount rate `r`. A [`LoanSpec`] raises the
//! attainable drift to `mu_star` by letting the firm borrow at any rate up
//! to `mu_star - mu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmParams {
    pub x: f64,
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
}

impl FirmParams {
    /// Validating constructor. `mu` may be any finite real; `mu <= 0` is the
    /// degenerate branch where paying out everything at once is optimal.
    pub fn new(x: f64, mu: f64, sigma: f64, r: f64) -> Result<Self> {
        finite("x", x)?;
        finite("mu", mu)?;
        finite("sigma", sigma)?;
        finite("r", r)?;
        if sigma <= 0.0 {
            return Err(Error::NonPositiveSigma(sigma));
        }
        if r <= 0.0 {
            return Err(Error::NonPositiveRate(r));
        }
        if x < 0.0 {
            return Err(Error::NegativeWorth(x));
        }
        Ok(Self { x, mu, sigma, r })
    }

    /// Same firm at a different starting worth.
    pub fn at(&self, x: f64) -> Result<Self> {
        Self::new(x, self.mu, self.sigma, self.r)
    }

    pub fn is_profitable(&self) -> bool {
        self.mu > 0.0
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Free-function form of [`FirmParams::new`].
pub fn validate_firm(x: f64, mu: f64, sigma: f64, r: f64) -> Result<FirmParams> {
    FirmParams::new(x, mu, sigma, r)
}

/// A subsidized drift `mu_star >= mu`; the firm may borrow at up to `mu_star - mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoanSpec {
    pub mu_star: f64,
}

impl LoanSpec {
    pub fn new(firm: &FirmParams, mu_star: f64) -> Result<Self> {
        finite("mu_star", mu_star)?;
        if mu_star < firm.mu {
            return Err(Error::LoanBelowDrift {
                mu: firm.mu,
                mu_star,
            });
        }
        Ok(Self { mu_star })
    }

    /// Borrowing-rate cap `c = mu_star - mu`.
    pub fn cap(&self, firm: &FirmParams) -> f64 {
        (self.mu_star - firm.mu).max(0.0)
    }
}

/// Roots of `(sigma^2 / 2) g^2 + mu g - r = 0`, in 1/currency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharRoots {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl CharRoots {
    pub fn spread(&self) -> f64 {
        self.gamma_plus - self.gamma_minus
    }
}

/// Tolerances and guards used by the closed forms and the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    /// Absolute bracket width at which bisection stops.
    pub bisect_tol: f64,
    /// Relative finite-difference step; the absolute step is `fd_step * max(1, threshold)`.
    pub fd_step: f64,
    /// Tolerance on ODE residuals, relative to the scale of the value function.
    pub ode_tol: f64,
    /// Largest exponent argument accepted before reporting overflow.
    pub exp_guard: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            bisect_tol: 1e-10,
            fd_step: 1e-5,
            ode_tol: 1e-6,
            exp_guard: 700.0,
        }
    }
}

impl NumericPolicy {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("bisect_tol", self.bisect_tol),
            ("fd_step", self.fd_step),
            ("ode_tol", self.ode_tol),
            ("exp_guard", self.exp_guard),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `exp(arg)` with the overflow guard applied.
    pub fn exp(&self, arg: f64) -> Result<f64> {
        if arg.is_nan() || arg > self.exp_guard {
            return Err(Error::Overflow {
                arg,
                guard: self.exp_guard,
            });
        }
        Ok(arg.exp())
    }

    /// Absolute finite-difference step for a curve with the given threshold.
    pub fn fd_step_for(&self, threshold: f64) -> f64 {
        self.fd_step * threshold.max(1.0)
    }
}

pub(crate) fn finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { field, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_firm() {
        let f = validate_firm(1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(f.mu, 0.5);
        assert!(f.is_profitable());
    }

    #[test]
    fn names_the_offending_field() {
        assert!(matches!(
            validate_firm(1.0, 0.5, 0.0, 0.1),
            Err(Error::NonPositiveSigma(_))
        ));
        assert!(matches!(
            validate_firm(-1.0, 0.5, 1.0, 0.1),
            Err(Error::NegativeWorth(_))
        ));
        assert!(matches!(
            validate_firm(1.0, 0.5, 1.0, -0.1),
            Err(Error::NonPositiveRate(_))
        ));
        assert!(matches!(
            validate_firm(1.0, f64::NAN, 1.0, 0.1),
            Err(Error::NonFinite { field: "mu", .. })
        ));
    }

    #[test]
    fn nonpositive_drift_is_allowed() {
        assert!(!validate_firm(0.5, 0.0, 1.0, 0.1).unwrap().is_profitable());
        assert!(!validate_firm(0.5, -1.0, 1.0, 0.1).unwrap().is_profitable());
    }

    #[test]
    fn loan_must_not_lower_drift() {
        let f = validate_firm(1.0, 0.5, 1.0, 0.1).unwrap();
        assert!(LoanSpec::new(&f, 0.4).is_err());
        let same = LoanSpec::new(&f, 0.5).unwrap();
        assert_eq!(same.cap(&f), 0.0);
        assert!((LoanSpec::new(&f, 1.2).unwrap().cap(&f) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn exp_guard_reports_overflow() {
        let p = NumericPolicy::default();
        assert!(p.exp(699.0).is_ok());
        assert!(matches!(p.exp(701.0), Err(Error::Overflow { .. })));
        assert_eq!(p.exp(-1e6).unwrap(), 0.0);
    }

    #[test]
    fn policy_rejects_nonpositive_fields() {
        let mut p = NumericPolicy::default();
        assert!(p.validate().is_ok());
        p.fd_step = 0.0;
        assert!(p.validate().is_err());
    }
}
