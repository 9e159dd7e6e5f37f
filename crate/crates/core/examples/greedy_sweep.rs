//! Random firms: how often does a greedy borrower end up worse off than a
//! firm that never borrows?
//!
//! cargo run --release --example greedy_sweep -- [n] [seed] [out.csv]

use divbarrier::sweep::{self, ExportFormat, SweepConfig};

fn main() -> divbarrier::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = SweepConfig {
        n: args.next().map_or(1000, |s| s.parse().expect("n")),
        seed: args.next().map_or(0, |s| s.parse().expect("seed")),
        ..SweepConfig::default()
    };
    let (records, summary) = sweep::run_sweep(&cfg)?;
    let labels = [
        "q1 a_hat > a",
        "q2 greedy net > V_hat",
        "q3 V_hat < V",
        "q4 greedy net < V",
    ];
    println!("{} draws, {} excluded", summary.n, summary.excluded);
    for (label, (count, freq)) in labels.iter().zip(summary.counts.iter().zip(summary.frequencies)) {
        println!("  {label:<22} {count:>5}  {freq:.3}");
    }
    if let Some(path) = args.next() {
        sweep::export_records(&records, ExportFormat::Csv, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
