//! Random-firm experiment comparing the greedy and the social dividend
//! policy under a subsidized drift.
//!
//! Each draw takes `mu ~ U(0,1)`, `mu_star = mu + U(0,1)`, `x ~ U(0,1)` with
//! fixed `sigma` and `r`, and records four indicator checks:
//!
//! | flag | condition |
//! |------|-----------|
//! | q1 | `a_hat > a + 0.001` |
//! | q2 | `V_greedy - C_greedy > V_hat` |
//! | q3 | `V_hat < V - 0.001` |
//! | q4 | `V_greedy - C_greedy < V` (greedy borrowing does not pay for itself) |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analytic::{self, ValueCurve};
use crate::error::{Error, Result};
use crate::model::{FirmParams, LoanSpec, NumericPolicy};
use crate::simulate::path_rng;

/// Slack used by the q1 and q3 comparisons.
pub const SLACK: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub sigma: f64,
    pub r: f64,
    pub seed: u64,
    /// Force `mu_star = mu` on every draw.
    pub equal_drifts: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            sigma: 1.0,
            r: 0.1,
            seed: 0,
            equal_drifts: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        // any worth works for checking sigma and r
        FirmParams::new(0.0, 0.0, self.sigma, self.r)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub x: f64,
    pub mu: f64,
    pub mu_star: f64,
    pub a: f64,
    pub a_hat: f64,
    pub a_star: f64,
    pub v: f64,
    pub v_hat: f64,
    pub v_greedy: f64,
    pub c_greedy: f64,
    pub q1: bool,
    pub q2: bool,
    pub q3: bool,
    pub q4: bool,
    /// Set when a closed form failed; the numeric fields are then NaN and
    /// the record is left out of the frequencies.
    pub error: Option<String>,
}

struct Quantities {
    a: f64,
    a_hat: f64,
    a_star: f64,
    v: f64,
    v_hat: f64,
    v_greedy: f64,
    c_greedy: f64,
}

fn evaluate(x: f64, mu: f64, mu_star: f64, cfg: &SweepConfig, policy: &NumericPolicy) -> Result<Quantities> {
    let firm = FirmParams::new(x, mu, cfg.sigma, cfg.r)?;
    let loan = LoanSpec::new(&firm, mu_star)?;
    let plain = ValueCurve::no_loan(&firm, policy)?;
    let social = ValueCurve::borrowing(&firm, &loan, policy)?;
    let greedy = ValueCurve::greedy(&firm, &loan, policy)?;
    let a_star = greedy.threshold();
    Ok(Quantities {
        a: plain.threshold(),
        a_hat: social.threshold(),
        a_star,
        v: plain.eval(x),
        v_hat: social.eval(x),
        v_greedy: greedy.eval(x),
        c_greedy: analytic::loan_cost_c(x, a_star, &firm, &loan, mu_star)?,
    })
}

/// One draw; `index` selects the random substream.
pub fn draw_record(index: usize, cfg: &SweepConfig, policy: &NumericPolicy) -> SweepRecord {
    let mut rng = path_rng(cfg.seed, index as u64);
    let mu: f64 = rng.gen();
    let bump: f64 = rng.gen();
    let x: f64 = rng.gen();
    let mu_star = if cfg.equal_drifts { mu } else { mu + bump };
    let mut rec = SweepRecord {
        index,
        x,
        mu,
        mu_star,
        a: f64::NAN,
        a_hat: f64::NAN,
        a_star: f64::NAN,
        v: f64::NAN,
        v_hat: f64::NAN,
        v_greedy: f64::NAN,
        c_greedy: f64::NAN,
        q1: false,
        q2: false,
        q3: false,
        q4: false,
        error: None,
    };
    match evaluate(x, mu, mu_star, cfg, policy) {
        Ok(q) => {
            let greedy_net = q.v_greedy - q.c_greedy;
            rec.q1 = q.a_hat > q.a + SLACK;
            rec.q2 = greedy_net > q.v_hat;
            rec.q3 = q.v_hat < q.v - SLACK;
            rec.q4 = greedy_net < q.v;
            rec.a = q.a;
            rec.a_hat = q.a_hat;
            rec.a_star = q.a_star;
            rec.v = q.v;
            rec.v_hat = q.v_hat;
            rec.v_greedy = q.v_greedy;
            rec.c_greedy = q.c_greedy;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub evaluated: usize,
    pub excluded: usize,
    /// Counts of q1..q4 over evaluated records.
    pub counts: [usize; 4],
    pub frequencies: [f64; 4],
}

impl SweepSummary {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let mut counts = [0usize; 4];
        for r in &ok {
            for (c, flag) in counts.iter_mut().zip([r.q1, r.q2, r.q3, r.q4]) {
                *c += flag as usize;
            }
        }
        let evaluated = ok.len();
        let frequencies = counts.map(|c| if evaluated > 0 { c as f64 / evaluated as f64 } else { f64::NAN });
        Self {
            n: records.len(),
            evaluated,
            excluded: records.len() - evaluated,
            counts,
            frequencies,
        }
    }
}

/// Runs all draws (in parallel, output in draw order).
pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    run_sweep_with(cfg, &NumericPolicy::default())
}

pub fn run_sweep_with(cfg: &SweepConfig, policy: &NumericPolicy) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    cfg.validate()?;
    policy.validate()?;
    let records: Vec<SweepRecord> = (0..cfg.n)
        .into_par_iter()
        .map(|i| draw_record(i, cfg, policy))
        .collect();
    let summary = SweepSummary::from_records(&records);
    Ok((records, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

pub const FIELDS: [&str; 15] = [
    "x", "mu", "mu_star", "a", "a_hat", "a_star", "V", "V_hat", "V_greedy", "C_greedy", "q1", "q2",
    "q3", "q4", "error",
];

fn numbers(r: &SweepRecord) -> [f64; 10] {
    [
        r.x, r.mu, r.mu_star, r.a, r.a_hat, r.a_star, r.v, r.v_hat, r.v_greedy, r.c_greedy,
    ]
}

/// 17 significant digits; empty for NaN.
fn fmt_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(FIELDS)?;
    for r in records {
        let mut row: Vec<String> = numbers(r).iter().map(|&v| fmt_number(v)).collect();
        row.extend([r.q1, r.q2, r.q3, r.q4].iter().map(|b| b.to_string()));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Array of objects keyed by [`FIELDS`]; non-finite numbers become `null`.
pub fn write_json<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            for (name, v) in FIELDS.iter().zip(numbers(r)) {
                let num = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
                obj.insert((*name).to_string(), num);
            }
            for (name, b) in FIELDS[10..14].iter().zip([r.q1, r.q2, r.q3, r.q4]) {
                obj.insert((*name).to_string(), Value::Bool(b));
            }
            obj.insert(
                "error".to_string(),
                r.error.clone().map_or(Value::Null, Value::String),
            );
            Value::Object(obj)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `records` to `path` in the requested format.
pub fn export_records(records: &[SweepRecord], format: ExportFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        ExportFormat::Csv => write_csv(records, &mut out)?,
        ExportFormat::Json => write_json(records, &mut out)?,
    }
    out.flush()?;
    Ok(())
}
