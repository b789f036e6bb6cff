//! Payoffs for every pair of named strategies.

use spinorbit_pd::game::{coefficient_table, Backend, PayoffTable, Strategy};

fn main() -> spinorbit_pd::Result<()> {
    let set = Strategy::named();
    let grid = coefficient_table(&set, Backend::Abstract, &PayoffTable::default())?;
    print!("{:>6}", "A \\ B");
    for b in &set {
        print!("{:>14}", b.to_string());
    }
    println!();
    for (a, row) in set.iter().zip(&grid) {
        print!("{:>6}", a.to_string());
        for o in row {
            print!("{:>14}", format!("({:.2}, {:.2})", o.payoff_a, o.payoff_b));
        }
        println!();
    }
    Ok(())
}
