//! Step through one round: entangle, apply both moves, disentangle, measure.

use spinorbit_pd::game::{Backend, PayoffTable, Protocol, Strategy};
use spinorbit_pd::optics;
use spinorbit_pd::qmath::{apply, concurrence, tensor, Bit, SpinOrbitState};

fn main() -> spinorbit_pd::Result<()> {
    let alice = Strategy::IZ;
    let bob = Strategy::IX;

    let start = SpinOrbitState::basis(Bit::C, Bit::C);
    println!("start        {start}");
    let entangled = apply(&optics::entangler(), &start);
    println!("entangled    {entangled}  (concurrence {:.3})", concurrence(&entangled)?);
    let moved = apply(&tensor(&alice.element(), &bob.element()), &entangled);
    println!("after moves  {moved}");

    let protocol = Protocol::new(Backend::Abstract)?;
    let outcome = protocol.play(&alice, &bob, &PayoffTable::default());
    println!("final        {}", protocol.final_state(&alice.element(), &bob.element()));
    println!("probs CC CD DC DD = {:?}", outcome.probs.map(|p| (p * 1e6).round() / 1e6));
    println!("{alice} vs {bob}: payoffs ({:.3}, {:.3})", outcome.payoff_a, outcome.payoff_b);
    Ok(())
}
