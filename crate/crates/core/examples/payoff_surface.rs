//! Sweep the fused strategy parameter for both players and write a CSV.
//!
//! Usage: `payoff_surface [points-per-segment] [out.csv]`

use std::io::Write;

use spinorbit_pd::analysis::sweep;
use spinorbit_pd::game::{Backend, PayoffTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(21);
    let points = sweep(n, Backend::Abstract, &PayoffTable::default())?;

    let out: Box<dyn Write> = match args.next() {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_a", "t_b", "payoff_a", "payoff_b"])?;
    for p in &points {
        w.serialize((p.t_a.value(), p.t_b.value(), p.payoff_a, p.payoff_b))?;
    }
    w.flush()?;
    Ok(())
}
