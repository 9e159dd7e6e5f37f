//! `divbarrier` command line.
//!
//! Every command prints one JSON object `{command, inputs, outputs}` on
//! stdout, except `curve`, which prints CSV. Exit codes: 0 success,
//! 2 invalid input, 3 numerical failure, 4 I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analytic::{self, ValueCurve};
use crate::error::{Error, Result};
use crate::model::{FirmParams, LoanSpec, NumericPolicy};
use crate::simulate::{self, PathConfig, Policy};
use crate::sweep::{self, ExportFormat, SweepConfig};

/// Environment variable that overrides the default seed.
pub const SEED_ENV: &str = "DIVBARRIER_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "divbarrier", version, about = "Optimal dividend barriers with capped borrowing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic roots for mu (and mu_star when given).
    Roots(RateArgs),
    /// Dividend thresholds a, and a_hat, a_star when --mu-star is given.
    Threshold(RateArgs),
    /// No-loan value V(x).
    Value(FirmArgs),
    /// Value with borrowing at the cap, V_hat(x).
    ValueHat(LoanArgs),
    /// Discounted loan cost until bankruptcy under a reflecting barrier.
    LoanCost(LoanCostArgs),
    /// Monte Carlo estimate of a barrier policy's value.
    Simulate(SimulateArgs),
    /// Random-firm greedy vs social comparison.
    Sweep(SweepArgs),
    /// CSV of V, V_hat and the greedy value on a worth grid.
    Curve(CurveArgs),
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got {s}"))
    }
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, value_parser = finite, default_value = "1", allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value = "0.1", allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu_star: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FirmArgs {
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, value_parser = finite, default_value = "1", allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value = "0.1", allow_hyphen_values = true)]
    pub r: f64,
}

impl FirmArgs {
    fn firm(&self) -> Result<FirmParams> {
        FirmParams::new(self.x, self.mu, self.sigma, self.r)
    }

    fn inputs(&self) -> Value {
        json!({"x": self.x, "mu": self.mu, "sigma": self.sigma, "r": self.r})
    }
}

#[derive(Debug, Args)]
pub struct LoanArgs {
    #[command(flatten)]
    pub firm: FirmArgs,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu_star: f64,
}

#[derive(Debug, Args)]
pub struct LoanCostArgs {
    #[command(flatten)]
    pub loan: LoanArgs,
    /// Reflecting barrier; defaults to a_hat.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub barrier: Option<f64>,
    /// Drift of the reflected process; defaults to mu_star.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu_eff: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub firm: FirmArgs,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu_star: Option<f64>,
    /// Dividend barrier; defaults to a_hat with --mu-star, else a.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub barrier: Option<f64>,
    /// Borrowing rate; defaults to the cap with --mu-star, else 0.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub borrow_rate: Option<f64>,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub paths: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Part of the discount rate realised as killing; defaults to r.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub kill_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = finite, default_value = "1", allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value = "0.1", allow_hyphen_values = true)]
    pub r: f64,
    /// Output file; defaults to sweep.csv or sweep.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Force mu_star = mu on every draw.
    #[arg(long)]
    pub equal_drifts: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, value_parser = finite, default_value = "1", allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value = "0.1", allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub mu_star: f64,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    /// Right end of the grid; defaults to twice the larger threshold.
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
}

/// Output of a successful command.
enum Output {
    Json(Value),
    Text(String),
}

fn seed_or_env(seed: Option<u64>) -> Result<u64> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::invalid("seed", format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn envelope(command: &str, inputs: Value, outputs: Value) -> Output {
    Output::Json(json!({"command": command, "inputs": inputs, "outputs": outputs}))
}

fn roots_json(r: &crate::CharRoots) -> Value {
    json!({"gamma_plus": r.gamma_plus, "gamma_minus": r.gamma_minus})
}

fn execute(cmd: &Command) -> Result<Output> {
    let policy = NumericPolicy::default();
    match cmd {
        Command::Roots(a) => {
            let firm = FirmParams::new(0.0, a.mu, a.sigma, a.r)?;
            let mut out = json!({"roots": roots_json(&analytic::char_roots(a.mu, a.sigma, a.r))});
            if let Some(ms) = a.mu_star {
                let loan = LoanSpec::new(&firm, ms)?;
                out["star_roots"] = roots_json(&analytic::star_roots(&firm, &loan));
            }
            Ok(envelope(
                "roots",
                json!({"mu": a.mu, "sigma": a.sigma, "r": a.r, "mu_star": a.mu_star}),
                out,
            ))
        }
        Command::Threshold(a) => {
            let firm = FirmParams::new(0.0, a.mu, a.sigma, a.r)?;
            let mut out = json!({"a": analytic::threshold_a(a.mu, a.sigma, a.r)?});
            if let Some(ms) = a.mu_star {
                let loan = LoanSpec::new(&firm, ms)?;
                out["a_hat"] = json!(analytic::threshold_a_hat(&firm, &loan, &policy)?);
                out["a_star"] = json!(analytic::threshold_a(ms, a.sigma, a.r)?);
            }
            Ok(envelope(
                "threshold",
                json!({"mu": a.mu, "sigma": a.sigma, "r": a.r, "mu_star": a.mu_star}),
                out,
            ))
        }
        Command::Value(a) => {
            let firm = a.firm()?;
            let curve = ValueCurve::no_loan(&firm, &policy)?;
            let threshold = (!curve.is_degenerate()).then(|| curve.threshold());
            Ok(envelope(
                "value",
                a.inputs(),
                json!({"value": curve.eval(a.x), "threshold": threshold}),
            ))
        }
        Command::ValueHat(a) => {
            let firm = a.firm.firm()?;
            let loan = LoanSpec::new(&firm, a.mu_star)?;
            let curve = ValueCurve::borrowing(&firm, &loan, &policy)?;
            let (ap, am) = curve.coefficients().unwrap_or((0.0, 0.0));
            let mut inputs = a.firm.inputs();
            inputs["mu_star"] = json!(a.mu_star);
            Ok(envelope(
                "value-hat",
                inputs,
                json!({"value_hat": curve.eval(a.firm.x), "a_hat": curve.threshold(), "a_plus": ap, "a_minus": am}),
            ))
        }
        Command::LoanCost(a) => {
            let firm = a.loan.firm.firm()?;
            let loan = LoanSpec::new(&firm, a.loan.mu_star)?;
            let barrier = match a.barrier {
                Some(b) => b,
                None => analytic::threshold_a_hat(&firm, &loan, &policy)?,
            };
            let mu_eff = a.mu_eff.unwrap_or(loan.mu_star);
            let g = analytic::discounted_ruin_transform_g(firm.x.min(barrier), barrier, mu_eff, firm.sigma, firm.r)?;
            let cost = analytic::loan_cost_c(firm.x, barrier, &firm, &loan, mu_eff)?;
            let mut inputs = a.loan.firm.inputs();
            inputs["mu_star"] = json!(a.loan.mu_star);
            inputs["barrier"] = json!(barrier);
            inputs["mu_eff"] = json!(mu_eff);
            Ok(envelope("loan-cost", inputs, json!({"loan_cost": cost, "g": g})))
        }
        Command::Simulate(a) => simulate_cmd(a, &policy),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Curve(a) => curve_cmd(a, &policy),
    }
}

fn simulate_cmd(a: &SimulateArgs, policy: &NumericPolicy) -> Result<Output> {
    let firm = a.firm.firm()?;
    let loan = a.mu_star.map(|ms| LoanSpec::new(&firm, ms)).transpose()?;
    let barrier = match (a.barrier, &loan) {
        (Some(b), _) => b,
        (None, Some(l)) => analytic::threshold_a_hat(&firm, l, policy)?,
        (None, None) => analytic::threshold_a(firm.mu, firm.sigma, firm.r)?,
    };
    let rate = a.borrow_rate.unwrap_or_else(|| loan.map_or(0.0, |l| l.cap(&firm)));
    let pol = match &loan {
        Some(l) => Policy::with_borrowing(barrier, rate, &firm, l)?,
        None if rate != 0.0 => return Err(Error::invalid("borrow-rate", "needs --mu-star")),
        None => Policy::dividends_only(barrier)?,
    };
    let defaults = PathConfig::for_firm(&firm, a.paths.max(1), 0)?;
    let cfg = PathConfig::new(
        a.dt.unwrap_or(defaults.dt),
        a.t_max.unwrap_or(defaults.t_max),
        a.paths,
        seed_or_env(a.seed)?,
    )?
    .with_kill_rate(a.kill_rate.unwrap_or(firm.r));
    let est = simulate::estimate_value(&firm, &pol, loan.as_ref(), &cfg)?;

    // closed-form value of the same policy, when the drift allows one
    let drift = firm.mu + rate;
    let analytic_value = if drift > 0.0 && barrier > 0.0 {
        let div = analytic::barrier_dividend_value(firm.x, barrier, drift, firm.sigma, firm.r, policy)?;
        let g = analytic::ruin_transform(firm.x.min(barrier), barrier, drift, firm.sigma, firm.r, policy)?;
        Some(div - rate * (1.0 - g) / firm.r)
    } else {
        None
    };

    let mut inputs = a.firm.inputs();
    inputs["mu_star"] = json!(a.mu_star);
    inputs["barrier"] = json!(barrier);
    inputs["borrow_rate"] = json!(rate);
    inputs["dt"] = json!(cfg.dt);
    inputs["t_max"] = json!(cfg.t_max);
    inputs["paths"] = json!(cfg.n_paths);
    inputs["seed"] = json!(cfg.seed);
    inputs["kill_rate"] = json!(cfg.kill_rate);
    Ok(envelope(
        "simulate",
        inputs,
        json!({
            "mean": est.mean,
            "std_error": est.std_error,
            "discounted_dividends": est.discounted_dividends,
            "dividends_std_error": est.dividends_std_error,
            "discounted_loans": est.discounted_loans,
            "loans_std_error": est.loans_std_error,
            "censored_fraction": est.censored_fraction,
            "killed_fraction": est.killed_fraction,
            "analytic": analytic_value,
        }),
    ))
}

fn sweep_cmd(a: &SweepArgs) -> Result<Output> {
    let cfg = SweepConfig {
        n: a.n,
        sigma: a.sigma,
        r: a.r,
        seed: seed_or_env(a.seed)?,
        equal_drifts: a.equal_drifts,
    };
    let format = match a.format {
        FormatArg::Csv => ExportFormat::Csv,
        FormatArg::Json => ExportFormat::Json,
    };
    let out = a.out.clone().unwrap_or_else(|| match format {
        ExportFormat::Csv => PathBuf::from("sweep.csv"),
        ExportFormat::Json => PathBuf::from("sweep.json"),
    });
    let (records, summary) = sweep::run_sweep(&cfg)?;
    sweep::export_records(&records, format, &out)?;
    let names = ["q1", "q2", "q3", "q4"];
    let freq: serde_json::Map<String, Value> = names
        .iter()
        .zip(summary.frequencies)
        .map(|(n, f)| (n.to_string(), json!(f)))
        .collect();
    let counts: serde_json::Map<String, Value> = names
        .iter()
        .zip(summary.counts)
        .map(|(n, c)| (n.to_string(), json!(c)))
        .collect();
    Ok(envelope(
        "sweep",
        json!({"n": cfg.n, "seed": cfg.seed, "sigma": cfg.sigma, "r": cfg.r,
               "equal_drifts": cfg.equal_drifts, "out": out.display().to_string(),
               "format": if format == ExportFormat::Csv { "csv" } else { "json" }}),
        json!({"evaluated": summary.evaluated, "excluded": summary.excluded,
               "counts": counts, "frequencies": freq}),
    ))
}

fn curve_cmd(a: &CurveArgs, policy: &NumericPolicy) -> Result<Output> {
    let firm = FirmParams::new(0.0, a.mu, a.sigma, a.r)?;
    let loan = LoanSpec::new(&firm, a.mu_star)?;
    let plain = ValueCurve::no_loan(&firm, policy)?;
    let social = ValueCurve::borrowing(&firm, &loan, policy)?;
    let greedy = ValueCurve::greedy(&firm, &loan, policy)?;
    if a.grid_points < 2 {
        return Err(Error::invalid("grid-points", "must be >= 2"));
    }
    let x_max = a
        .x_max
        .unwrap_or(2.0 * plain.threshold().max(greedy.threshold()));
    if !(x_max > 0.0) {
        return Err(Error::invalid("x-max", "must be > 0"));
    }
    let mut text = String::from("x,V,V_hat,V_greedy\n");
    for i in 0..a.grid_points {
        let x = if i + 1 == a.grid_points {
            x_max
        } else {
            x_max * i as f64 / (a.grid_points - 1) as f64
        };
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            x,
            plain.eval(x),
            social.eval(x),
            greedy.eval(x)
        ));
    }
    Ok(Output::Text(text))
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else if err.is_io() {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(Output::Json(v)) => match writeln!(stdout, "{v}") {
            Ok(()) => EXIT_OK,
            Err(_) => EXIT_IO,
        },
        Ok(Output::Text(t)) => match stdout.write_all(t.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(_) => EXIT_IO,
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
