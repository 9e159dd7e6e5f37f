//! Optimal dividend barriers for a firm whose worth follows a Brownian
//! motion with drift, with and without a capped credit line.
//!
//! * [`analytic`]: closed-form thresholds, value functions, the borrowing
//!   threshold equation, the discounted ruin transform and loan cost.
//! * [`simulate`]: an Euler–Maruyama engine for the controlled process that
//!   estimates the same quantities by Monte Carlo.
//! * [`verify`]: numerical checks of smooth fit, ODE residuals, the
//!   supermartingale drift condition and brute-force threshold optimality.
//! * [`sweep`]: the random-firm experiment comparing greedy and social
//!   dividend policies, with CSV/JSON export.
//! * [`cli`]: the `divbarrier` command-line front end.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod simulate;
pub mod sweep;
pub mod verify;

pub use analytic::{CurveKind, Dynamics, ValueCurve};
pub use error::{Error, Result};
pub use model::{validate_firm, CharRoots, FirmParams, LoanSpec, NumericPolicy};
