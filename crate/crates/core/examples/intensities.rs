//! Turn measured port intensities into outcome probabilities and payoffs.

use spinorbit_pd::game::{intensities_to_probs, payoffs, Intensities, PayoffTable};

fn main() -> spinorbit_pd::Result<()> {
    let table = PayoffTable::default();
    for (i_mn, bg) in [([0.9, 0.1, 0.1, 4.1], 0.1), ([0.5, 2.0, 2.0, 0.5], 1.0), ([0.5, 1.0, 1.0, 0.5], 1.0)] {
        let reading = Intensities::new(i_mn, bg)?;
        match intensities_to_probs(&reading) {
            Ok(m) => {
                let (pa, pb) = payoffs(&m.probs, &table)?;
                println!("{i_mn:?} bg {bg}: probs {:?} clamped {} payoffs ({pa:.3}, {pb:.3})", m.probs, m.clamped);
            }
            Err(e) => println!("{i_mn:?} bg {bg}: {e}"),
        }
    }
    Ok(())
}
