//! Closed-form quantities for the barrier dividend problem.
//!
//! Without borrowing the optimal policy pays out everything above the
//! threshold `a(mu, sigma, r)` and nothing below it. With a credit line the
//! firm borrows at the full cap `mu_star - mu` and pays out above a lower
//! threshold `a_hat`, the unique root of [`f_root_fn`]. The discounted cost
//! of borrowing until bankruptcy follows from the ruin transform
//! `g(x) = E_x[exp(-r tau_0)]` of the reflected process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CharRoots, FirmParams, LoanSpec, NumericPolicy};

const MAX_BISECTIONS: usize = 60;

/// Roots of `(sigma^2/2) g^2 + mu g - r = 0`.
///
/// The root that would suffer cancellation is recovered from the product
/// `gamma_plus * gamma_minus = -2r/sigma^2`, so both stay accurate for
/// `|mu|` far from `sigma * sqrt(2r)`.
pub fn char_roots(mu: f64, sigma: f64, r: f64) -> CharRoots {
    let s2 = sigma * sigma;
    let disc = mu.hypot(sigma * (2.0 * r).sqrt());
    let product = -2.0 * r / s2;
    if mu >= 0.0 {
        let gamma_minus = -(mu + disc) / s2;
        CharRoots {
            gamma_plus: product / gamma_minus,
            gamma_minus,
        }
    } else {
        let gamma_plus = (disc - mu) / s2;
        CharRoots {
            gamma_plus,
            gamma_minus: product / gamma_plus,
        }
    }
}

/// Roots for the subsidized drift `mu_star`.
pub fn star_roots(firm: &FirmParams, loan: &LoanSpec) -> CharRoots {
    char_roots(loan.mu_star, firm.sigma, firm.r)
}

/// Optimal dividend threshold `a = log((gamma_-/gamma_+)^2) / (gamma_+ - gamma_-)`.
pub fn threshold_a(mu: f64, sigma: f64, r: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::DegenerateDrift(mu));
    }
    let g = char_roots(mu, sigma, r);
    // |gamma_-| / gamma_+ = 1 + (2 mu / sigma^2) / gamma_+
    let excess = 2.0 * mu / (sigma * sigma * g.gamma_plus);
    Ok(2.0 * excess.ln_1p() / g.spread())
}

/// Which optimization problem a [`ValueCurve`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Dividends only, drift `mu`.
    NoLoan,
    /// Borrowing at the cap, dividends above `a_hat`; value net of loans.
    Borrowing,
    /// The no-loan optimum computed with `mu_star` in place of `mu`.
    Greedy,
}

/// Generator data of the controlled process on the continuation region:
/// `-r V + (drift + borrow_cap) V' + (sigma^2/2) V'' = borrow_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    pub drift: f64,
    pub sigma: f64,
    pub r: f64,
    pub borrow_cap: f64,
}

impl Dynamics {
    pub fn effective_drift(&self) -> f64 {
        self.drift + self.borrow_cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    /// `V(x) = x`.
    Linear,
    /// `(e^{g+ x} - e^{g- x}) / denom`.
    Homogeneous { roots: CharRoots, denom: f64 },
    /// `A+ (e^{g+ x} - 1) + A- (e^{g- x} - 1)`.
    Particular {
        roots: CharRoots,
        a_plus: f64,
        a_minus: f64,
    },
}

/// A value function made of an ODE piece on `[0, threshold]` and a
/// slope-one line above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueCurve {
    kind: CurveKind,
    threshold: f64,
    level: f64,
    dynamics: Dynamics,
    piece: Piece,
}

impl ValueCurve {
    /// Optimal no-loan value `V(x; mu, sigma, r)`.
    pub fn no_loan(firm: &FirmParams, policy: &NumericPolicy) -> Result<Self> {
        Self::homogeneous(CurveKind::NoLoan, firm.mu, firm.sigma, firm.r, policy)
    }

    /// `V(x; mu_star, sigma, r)`: what a firm earns if it ignores the loan cost.
    pub fn greedy(firm: &FirmParams, loan: &LoanSpec, policy: &NumericPolicy) -> Result<Self> {
        Self::homogeneous(CurveKind::Greedy, loan.mu_star, firm.sigma, firm.r, policy)
    }

    fn homogeneous(
        kind: CurveKind,
        mu: f64,
        sigma: f64,
        r: f64,
        policy: &NumericPolicy,
    ) -> Result<Self> {
        let dynamics = Dynamics {
            drift: mu,
            sigma,
            r,
            borrow_cap: 0.0,
        };
        if mu <= 0.0 {
            return Ok(Self {
                kind,
                threshold: 0.0,
                level: 0.0,
                dynamics,
                piece: Piece::Linear,
            });
        }
        let roots = char_roots(mu, sigma, r);
        let a = threshold_a(mu, sigma, r)?;
        let denom = roots.gamma_plus * policy.exp(roots.gamma_plus * a)?
            - roots.gamma_minus * policy.exp(roots.gamma_minus * a)?;
        Ok(Self {
            kind,
            threshold: a,
            level: mu / r,
            dynamics,
            piece: Piece::Homogeneous { roots, denom },
        })
    }

    /// Optimal value under borrowing, `V_hat(x; mu, sigma, r, mu_star)`.
    pub fn borrowing(firm: &FirmParams, loan: &LoanSpec, policy: &NumericPolicy) -> Result<Self> {
        if !firm.is_profitable() {
            return Err(Error::DegenerateDrift(firm.mu));
        }
        let cap = loan.cap(firm);
        let a_hat = threshold_a_hat(firm, loan, policy)?;
        let roots = star_roots(firm, loan);
        let (a_plus, a_minus) = borrowing_coefficients(&roots, a_hat, policy)?;
        Ok(Self {
            kind: CurveKind::Borrowing,
            threshold: a_hat,
            level: firm.mu / firm.r,
            dynamics: Dynamics {
                drift: firm.mu,
                sigma: firm.sigma,
                r: firm.r,
                borrow_cap: cap,
            },
            piece: Piece::Particular {
                roots,
                a_plus,
                a_minus,
            },
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Value at the threshold, continued with slope one above it.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn dynamics(&self) -> Dynamics {
        self.dynamics
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.piece, Piece::Linear)
    }

    /// Value at worth `x >= 0`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.threshold {
            self.continuation(x)
        } else {
            self.payout(x)
        }
    }

    /// The ODE piece, analytically extended to any real `x`.
    pub fn continuation(&self, x: f64) -> f64 {
        match self.piece {
            Piece::Linear => x,
            Piece::Homogeneous { roots, denom } => {
                ((roots.gamma_plus * x).exp() - (roots.gamma_minus * x).exp()) / denom
            }
            Piece::Particular {
                roots,
                a_plus,
                a_minus,
            } => a_plus * (roots.gamma_plus * x).exp_m1() + a_minus * (roots.gamma_minus * x).exp_m1(),
        }
    }

    /// The slope-one piece used above the threshold.
    pub fn payout(&self, x: f64) -> f64 {
        self.level + (x - self.threshold)
    }

    /// `A+`, `A-` for the borrowing curve.
    pub fn coefficients(&self) -> Option<(f64, f64)> {
        match self.piece {
            Piece::Particular {
                a_plus, a_minus, ..
            } => Some((a_plus, a_minus)),
            _ => None,
        }
    }
}

fn borrowing_coefficients(roots: &CharRoots, a_hat: f64, policy: &NumericPolicy) -> Result<(f64, f64)> {
    let (gp, gm) = (roots.gamma_plus, roots.gamma_minus);
    let spread = roots.spread();
    let a_plus = -gm * policy.exp(-gp * a_hat)? / (gp * spread);
    let a_minus = gp * policy.exp(-gm * a_hat)? / (gm * spread);
    Ok((a_plus, a_minus))
}

/// `V(x; mu, sigma, r)`; equals `x` when `mu <= 0`.
pub fn value_v(x: f64, firm: &FirmParams) -> Result<f64> {
    Ok(ValueCurve::no_loan(firm, &NumericPolicy::default())?.eval(x))
}

/// `V(x; mu_star, sigma, r)`.
pub fn greedy_value(x: f64, firm: &FirmParams, loan: &LoanSpec) -> Result<f64> {
    Ok(ValueCurve::greedy(firm, loan, &NumericPolicy::default())?.eval(x))
}

/// `V_hat(x)`, the value net of loan cost with borrowing at the cap.
pub fn value_v_hat(x: f64, firm: &FirmParams, loan: &LoanSpec, policy: &NumericPolicy) -> Result<f64> {
    Ok(ValueCurve::borrowing(firm, loan, policy)?.eval(x))
}

/// `f(a_hat) = A+(a_hat) + A-(a_hat) - (mu_star - mu)/r`, whose root is the
/// borrowing threshold. `f(0) = mu/r` and `f` decreases to `-inf`.
pub fn f_root_fn(a_hat: f64, firm: &FirmParams, loan: &LoanSpec, policy: &NumericPolicy) -> Result<f64> {
    if !(a_hat >= 0.0) {
        return Err(Error::Domain {
            x: a_hat,
            barrier: f64::INFINITY,
        });
    }
    let roots = star_roots(firm, loan);
    let (a_plus, a_minus) = borrowing_coefficients(&roots, a_hat, policy)?;
    Ok(a_plus + a_minus - loan.cap(firm) / firm.r)
}

/// Unique root of [`f_root_fn`].
///
/// The bracket starts at `[0, 1]` and doubles its upper end until `f` turns
/// negative; bisection then runs to `bisect_tol` (at most 60 halvings) and a
/// final false-position step inside the last bracket sharpens the residual.
/// With no subsidy the closed-form `a` is returned directly.
pub fn threshold_a_hat(firm: &FirmParams, loan: &LoanSpec, policy: &NumericPolicy) -> Result<f64> {
    if !firm.is_profitable() {
        return Err(Error::DegenerateDrift(firm.mu));
    }
    if loan.cap(firm) == 0.0 {
        return threshold_a(firm.mu, firm.sigma, firm.r);
    }
    let roots = star_roots(firm, loan);
    let f = |b: f64| f_root_fn(b, firm, loan, policy);

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi).map_err(|_| Error::BracketFailure { upper: hi })?;
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if -roots.gamma_minus * hi > policy.exp_guard {
            return Err(Error::BracketFailure { upper: hi });
        }
        f_hi = f(hi).map_err(|_| Error::BracketFailure { upper: hi })?;
    }

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= policy.bisect_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let t = f_lo / (f_lo - f_hi);
    Ok(lo + t * (hi - lo))
}

/// `E_x[exp(-r tau_0)]` for the process with drift `mu_eff` reflected at
/// `barrier` and absorbed at 0.
pub fn discounted_ruin_transform_g(x: f64, barrier: f64, mu_eff: f64, sigma: f64, r: f64) -> Result<f64> {
    ruin_transform(x, barrier, mu_eff, sigma, r, &NumericPolicy::default())
}

/// [`discounted_ruin_transform_g`] with an explicit policy.
pub fn ruin_transform(
    x: f64,
    barrier: f64,
    mu_eff: f64,
    sigma: f64,
    r: f64,
    policy: &NumericPolicy,
) -> Result<f64> {
    if !(barrier > 0.0) || !(0.0..=barrier).contains(&x) {
        return Err(Error::Domain { x, barrier });
    }
    let g = char_roots(mu_eff, sigma, r);
    let (gp, gm) = (g.gamma_plus, g.gamma_minus);
    let num = policy.exp(gp * (x - barrier))? / gp - policy.exp(gm * (x - barrier))? / gm;
    let den = policy.exp(-gp * barrier)? / gp - policy.exp(-gm * barrier)? / gm;
    Ok(num / den)
}

/// Discounted cost of borrowing at the cap until bankruptcy under a
/// reflecting barrier: `(mu_star - mu)(1 - g(x))/r`. Worth above the barrier
/// is paid out at once, so `g` is taken at the barrier there.
pub fn loan_cost_c(x: f64, barrier: f64, firm: &FirmParams, loan: &LoanSpec, mu_eff: f64) -> Result<f64> {
    let cap = loan.cap(firm);
    if x < 0.0 {
        return Err(Error::Domain { x, barrier });
    }
    let g = discounted_ruin_transform_g(x.min(barrier), barrier, mu_eff, firm.sigma, firm.r)?;
    Ok(cap * (1.0 - g) / firm.r)
}

/// Discounted dividends of the policy "reflect at `barrier`" for a firm
/// with drift `drift > 0` (no loan cost subtracted). At the optimal barrier
/// this is `V`.
pub fn barrier_dividend_value(
    x: f64,
    barrier: f64,
    drift: f64,
    sigma: f64,
    r: f64,
    policy: &NumericPolicy,
) -> Result<f64> {
    if x < 0.0 || !(barrier >= 0.0) {
        return Err(Error::Domain { x, barrier });
    }
    let g = char_roots(drift, sigma, r);
    let (gp, gm) = (g.gamma_plus, g.gamma_minus);
    let denom = gp * policy.exp(gp * barrier)? - gm * policy.exp(gm * barrier)?;
    let y = x.min(barrier);
    let inside = (policy.exp(gp * y)? - policy.exp(gm * y)?) / denom;
    Ok(inside + (x - y))
}
