//! Monte Carlo engine for the controlled worth process
//! `dX = (mu + b) dt + sigma dW - dZ_+`, absorbed at 0, where `b` is a
//! constant borrowing rate and `Z_+` pays out everything above a barrier.
//!
//! Paths are Euler–Maruyama with project-and-credit reflection: after each
//! step any overshoot above the barrier is paid as a dividend and the worth
//! is reset to the barrier. Ruin is checked at the end of each step only.
//!
//! Discounting at rate `r` can be split between path weights and an
//! independent exponential killing time: with `kill_rate = k`, weights are
//! `exp(-(r - k) t)` and the path stops at an `Exp(k)` time. `k = 0` is plain
//! discounting up to `t_max`; `k = r` stops a path after `1/r` time units on
//! average, which keeps long-lived firms affordable at small `dt`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FirmParams, LoanSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Portion of the discount rate realised by killing, in `[0, r]`.
    pub kill_rate: f64,
}

impl PathConfig {
    pub fn new(dt: f64, t_max: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_max,
            n_paths,
            seed,
            kill_rate: 0.0,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// `dt = 1e-4 min(1, sigma^2 / max(mu, 1)^2)`, `t_max = 200 / r`.
    pub fn for_firm(firm: &FirmParams, n_paths: usize, seed: u64) -> Result<Self> {
        let scale = firm.mu.max(1.0);
        let dt = 1e-4 * (firm.variance() / (scale * scale)).min(1.0);
        Self::new(dt, 200.0 / firm.r, n_paths, seed)
    }

    pub fn with_kill_rate(mut self, kill_rate: f64) -> Self {
        self.kill_rate = kill_rate;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if !(self.t_max.is_finite() && self.t_max > self.dt) {
            return Err(Error::invalid("t_max", "must be finite and > dt"));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("paths", "must be >= 1"));
        }
        if !(self.kill_rate.is_finite() && self.kill_rate >= 0.0) {
            return Err(Error::invalid("kill_rate", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn validate_for(&self, r: f64) -> Result<()> {
        self.check()?;
        if self.kill_rate > r {
            return Err(Error::invalid("kill_rate", format!("must not exceed r = {r}")));
        }
        Ok(())
    }
}

/// Barrier dividend policy with a constant borrowing rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub barrier: f64,
    pub borrow_rate: f64,
}

impl Policy {
    pub fn dividends_only(barrier: f64) -> Result<Self> {
        Self::checked(barrier, 0.0, 0.0)
    }

    /// Borrowing at `borrow_rate`, which must lie in `[0, mu_star - mu]`.
    pub fn with_borrowing(barrier: f64, borrow_rate: f64, firm: &FirmParams, loan: &LoanSpec) -> Result<Self> {
        Self::checked(barrier, borrow_rate, loan.cap(firm))
    }

    /// Borrow at the full cap.
    pub fn at_cap(barrier: f64, firm: &FirmParams, loan: &LoanSpec) -> Result<Self> {
        Self::with_borrowing(barrier, loan.cap(firm), firm, loan)
    }

    fn checked(barrier: f64, borrow_rate: f64, cap: f64) -> Result<Self> {
        if !(barrier.is_finite() && barrier >= 0.0) {
            return Err(Error::invalid("barrier", "must be finite and >= 0"));
        }
        if !(borrow_rate.is_finite() && (0.0..=cap).contains(&borrow_rate)) {
            return Err(Error::invalid(
                "borrow_rate",
                format!("must lie in [0, {cap}], got {borrow_rate}"),
            ));
        }
        Ok(Self {
            barrier,
            borrow_rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEnd {
    Ruined,
    /// Still solvent at `t_max`.
    Censored,
    /// Stopped by the exponential killing clock.
    Killed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub disc_dividends: f64,
    pub disc_loans: f64,
    pub ruin_time: Option<f64>,
    pub end: PathEnd,
    /// Weighted discount factor at ruin; `exp(-r t_max)`-style weight when
    /// censored and 0 when killed.
    pub disc_factor_at_ruin: f64,
}

impl PathOutcome {
    pub fn value(&self) -> f64 {
        self.disc_dividends - self.disc_loans
    }
}

/// Generator for path `index` of a run seeded with `seed`. Each path gets its
/// own ChaCha stream so results do not depend on evaluation order.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One path from `X(0) = firm.x` under `policy`.
pub fn simulate_path<R: Rng + ?Sized>(
    firm: &FirmParams,
    policy: &Policy,
    cfg: &PathConfig,
    rng: &mut R,
) -> PathOutcome {
    let rho = firm.r - cfg.kill_rate;
    let kill_time = if cfg.kill_rate > 0.0 {
        rng.sample(Exp::new(cfg.kill_rate).expect("positive kill rate"))
    } else {
        f64::INFINITY
    };

    let mut x = firm.x;
    let mut dividends = 0.0;
    let mut loans = 0.0;
    if x > policy.barrier {
        dividends += x - policy.barrier;
        x = policy.barrier;
    }
    if x <= 0.0 {
        return PathOutcome {
            disc_dividends: dividends,
            disc_loans: 0.0,
            ruin_time: Some(0.0),
            end: PathEnd::Ruined,
            disc_factor_at_ruin: 1.0,
        };
    }

    let dt = cfg.dt;
    let drift_step = (firm.mu + policy.borrow_rate) * dt;
    let vol_step = firm.sigma * dt.sqrt();
    let decay = (-rho * dt).exp();
    // exact integral of the weight over one step, relative to its left value
    let loan_step = policy.borrow_rate * if rho > 0.0 { -(-rho * dt).exp_m1() / rho } else { dt };
    let horizon = cfg.t_max.min(kill_time);
    let max_steps = (horizon / dt).ceil() as u64;

    let mut weight = 1.0;
    let mut step = 0u64;
    while step < max_steps {
        let z: f64 = rng.sample(StandardNormal);
        x += drift_step + vol_step * z;
        loans += weight * loan_step;
        weight *= decay;
        step += 1;
        if x > policy.barrier {
            dividends += weight * (x - policy.barrier);
            x = policy.barrier;
        } else if x <= 0.0 {
            return PathOutcome {
                disc_dividends: dividends,
                disc_loans: loans,
                ruin_time: Some(step as f64 * dt),
                end: PathEnd::Ruined,
                disc_factor_at_ruin: weight,
            };
        }
    }

    let (end, factor) = if kill_time < cfg.t_max {
        (PathEnd::Killed, 0.0)
    } else {
        (PathEnd::Censored, weight)
    };
    PathOutcome {
        disc_dividends: dividends,
        disc_loans: loans,
        ruin_time: None,
        end,
        disc_factor_at_ruin: factor,
    }
}

/// Sample mean and standard error with compensated summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub std_error: f64,
}

impl SampleStats {
    pub fn from_values<I: IntoIterator<Item = f64> + Clone>(values: I) -> Self {
        let mut n = 0usize;
        let mut sum = Neumaier::default();
        for v in values.clone() {
            sum.add(v);
            n += 1;
        }
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let mean = sum.total() / n as f64;
        let mut sq = Neumaier::default();
        for v in values {
            sq.add((v - mean) * (v - mean));
        }
        let std_error = if n > 1 {
            (sq.total() / ((n - 1) as f64 * n as f64)).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error }
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub discounted_dividends: f64,
    pub dividends_std_error: f64,
    pub discounted_loans: f64,
    pub loans_std_error: f64,
    /// Paths still solvent at `t_max`. Their contribution is truncated, so
    /// estimates of discounted functionals are biased low by at most their
    /// share times `exp(-r t_max)` times the remaining value.
    pub censored_fraction: f64,
    pub killed_fraction: f64,
}

/// All paths of a run, in index order. Evaluated in parallel; the result is
/// identical to sequential evaluation.
pub fn simulate_paths(firm: &FirmParams, policy: &Policy, cfg: &PathConfig) -> Result<Vec<PathOutcome>> {
    cfg.validate_for(firm.r)?;
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(firm, policy, cfg, &mut path_rng(cfg.seed, i)))
        .collect())
}

fn summarize(paths: &[PathOutcome], mean_of: impl Fn(&PathOutcome) -> f64) -> McEstimate {
    let n = paths.len();
    let total = SampleStats::from_values(paths.iter().map(&mean_of));
    let div = SampleStats::from_values(paths.iter().map(|p| p.disc_dividends));
    let loans = SampleStats::from_values(paths.iter().map(|p| p.disc_loans));
    let count = |end| paths.iter().filter(|p| p.end == end).count() as f64 / n as f64;
    McEstimate {
        mean: total.mean,
        std_error: total.std_error,
        n,
        discounted_dividends: div.mean,
        dividends_std_error: div.std_error,
        discounted_loans: loans.mean,
        loans_std_error: loans.std_error,
        censored_fraction: count(PathEnd::Censored),
        killed_fraction: count(PathEnd::Killed),
    }
}

/// Discounted dividends minus discounted loans under `policy`.
pub fn estimate_value(
    firm: &FirmParams,
    policy: &Policy,
    loan: Option<&LoanSpec>,
    cfg: &PathConfig,
) -> Result<McEstimate> {
    let cap = loan.map_or(0.0, |l| l.cap(firm));
    if policy.borrow_rate > cap {
        return Err(Error::invalid(
            "borrow_rate",
            format!("{} exceeds the cap {cap}", policy.borrow_rate),
        ));
    }
    let paths = simulate_paths(firm, policy, cfg)?;
    Ok(summarize(&paths, PathOutcome::value))
}

/// `E_x[exp(-r tau_0)]` for drift `mu_eff` reflected at `barrier`.
pub fn estimate_ruin_transform(
    mu_eff: f64,
    sigma: f64,
    r: f64,
    barrier: f64,
    x: f64,
    cfg: &PathConfig,
) -> Result<McEstimate> {
    if !(0.0..=barrier).contains(&x) {
        return Err(Error::Domain { x, barrier });
    }
    let firm = FirmParams::new(x, mu_eff, sigma, r)?;
    let policy = Policy::dividends_only(barrier)?;
    let paths = simulate_paths(&firm, &policy, cfg)?;
    Ok(summarize(&paths, |p| p.disc_factor_at_ruin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn firm(x: f64, mu: f64, sigma: f64) -> FirmParams {
        FirmParams::new(x, mu, sigma, 0.1).unwrap()
    }

    #[test]
    fn zero_worth_is_immediate_ruin() {
        let f = firm(0.0, 1.0, 1.0);
        let cfg = PathConfig::new(1e-3, 10.0, 1, 1).unwrap();
        let out = simulate_path(&f, &Policy::dividends_only(2.0).unwrap(), &cfg, &mut path_rng(1, 0));
        assert_eq!(out.disc_dividends, 0.0);
        assert_eq!(out.disc_loans, 0.0);
        assert_eq!(out.ruin_time, Some(0.0));
        assert_eq!(out.disc_factor_at_ruin, 1.0);
    }

    #[test]
    fn worth_above_barrier_is_paid_at_once() {
        let f = firm(3.0, 1.0, 1.0);
        let cfg = PathConfig::new(1e-3, 1.0, 1, 9).unwrap();
        let out = simulate_path(&f, &Policy::dividends_only(1.5).unwrap(), &cfg, &mut path_rng(9, 0));
        assert!(out.disc_dividends >= 1.5);
    }

    #[test]
    fn fluid_limit_pays_mu_over_r() {
        // almost no noise: the firm sits at the barrier and pays its drift
        let f = firm(1.0, 1.0, 1e-4);
        let cfg = PathConfig::new(1e-2, 400.0, 1, 3).unwrap();
        let out = simulate_path(&f, &Policy::dividends_only(1.0).unwrap(), &cfg, &mut path_rng(3, 0));
        assert_eq!(out.end, PathEnd::Censored);
        assert!((out.disc_dividends - 10.0).abs() < 0.01, "{}", out.disc_dividends);
    }

    #[test]
    fn loans_accrue_at_the_borrowing_rate() {
        let f = firm(1.0, 1.0, 1e-4);
        let loan = LoanSpec::new(&f, 1.5).unwrap();
        let policy = Policy::at_cap(1.0, &f, &loan).unwrap();
        let cfg = PathConfig::new(1e-2, 400.0, 1, 3).unwrap();
        let out = simulate_path(&f, &policy, &cfg, &mut path_rng(3, 0));
        // 0.5 * (1 - e^{-40}) / 0.1
        assert!((out.disc_loans - 5.0).abs() < 1e-9, "{}", out.disc_loans);
        assert!((out.disc_dividends - 15.0).abs() < 0.01);
    }

    #[test]
    fn single_path_is_reproducible() {
        let f = firm(0.5, 0.5, 1.0);
        let cfg = PathConfig::new(1e-3, 50.0, 1, 42).unwrap();
        let p = Policy::dividends_only(2.0).unwrap();
        let a = estimate_value(&f, &p, None, &cfg).unwrap();
        let b = estimate_value(&f, &p, None, &cfg).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn parallel_matches_sequential() {
        let f = firm(0.5, 0.3, 1.0);
        let cfg = PathConfig::new(1e-3, 50.0, 64, 7).unwrap();
        let p = Policy::dividends_only(1.5).unwrap();
        let par = simulate_paths(&f, &p, &cfg).unwrap();
        let seq: Vec<_> = (0..64)
            .map(|i| simulate_path(&f, &p, &cfg, &mut path_rng(7, i)))
            .collect();
        assert_eq!(par, seq);
    }

    #[test]
    fn heavy_discounting_kills_ruin_transform() {
        let cfg = PathConfig::new(1e-3, 20.0, 200, 5).unwrap();
        let est = estimate_ruin_transform(1.0, 1.0, 10.0, 3.0, 2.0, &cfg).unwrap();
        assert!(est.mean < 0.01, "{}", est.mean);
        let at_zero = estimate_ruin_transform(1.0, 1.0, 0.1, 3.0, 0.0, &cfg).unwrap();
        assert_eq!(at_zero.mean, 1.0);
        assert_eq!(at_zero.std_error, 0.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(PathConfig::new(1e-3, 10.0, 0, 1).is_err());
        assert!(PathConfig::new(0.0, 10.0, 1, 1).is_err());
        assert!(PathConfig::new(1.0, 0.5, 1, 1).is_err());
        let f = firm(1.0, 0.5, 1.0);
        let loan = LoanSpec::new(&f, 0.8).unwrap();
        assert!(Policy::with_borrowing(2.0, 0.31, &f, &loan).is_err());
        assert!(Policy::with_borrowing(2.0, 0.3, &f, &loan).is_ok());
        let cfg = PathConfig::new(1e-3, 10.0, 1, 1).unwrap().with_kill_rate(0.2);
        assert!(cfg.validate_for(0.1).is_err());
        let p = Policy::with_borrowing(2.0, 0.3, &f, &loan).unwrap();
        let ok = PathConfig::new(1e-3, 10.0, 1, 1).unwrap();
        assert!(estimate_value(&f, &p, None, &ok).is_err());
    }

    #[test]
    fn stats_match_textbook_formula() {
        let s = SampleStats::from_values([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
