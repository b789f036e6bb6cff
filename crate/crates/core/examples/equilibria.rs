//! Nash equilibria of the named strategy set, the classical subset, and
//! best replies over the continuous family.

use spinorbit_pd::analysis::{best_response, classical_minimum_check, nash_discrete, EquilibriumReport};
use spinorbit_pd::game::{Backend, PayoffTable, Strategy};

fn show(title: &str, r: &EquilibriumReport) {
    println!("{title}");
    for &(i, j) in &r.equilibria {
        let (pa, pb) = r.payoffs[i][j];
        println!("  equilibrium ({}, {}) -> ({pa:.3}, {pb:.3})", r.strategies[i], r.strategies[j]);
    }
}

fn main() -> spinorbit_pd::Result<()> {
    let table = PayoffTable::default();
    show("named strategies", &nash_discrete(&Strategy::named(), Backend::Abstract, &table)?);
    show("classical {I, iX}", &nash_discrete(&[Strategy::I, Strategy::IX], Backend::Abstract, &table)?);

    let mixed = classical_minimum_check(101, &table)?;
    println!("classical mixed strategies: payoffs {:?}, unique all-defect {}", mixed.payoffs, mixed.unique_all_defect);

    for opponent in Strategy::named() {
        let (t, payoff) = best_response(&opponent, 101, Backend::Abstract, &table)?;
        println!("best reply to {opponent}: t = {:+.2} ({}) earning {payoff:.3}", t.value(), t.strategy());
    }
    Ok(())
}
