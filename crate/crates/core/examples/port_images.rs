//! Render the four detector ports for one pair of moves as PGM files.
//!
//! Usage: `port_images [alice] [bob] [out-dir]`

use spinorbit_pd::game::{run_protocol, Backend, PayoffTable, Strategy};
use spinorbit_pd::render::{port_images, write_port_images, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let alice: Strategy = args.next().as_deref().unwrap_or("Q1").parse()?;
    let bob: Strategy = args.next().as_deref().unwrap_or("Q1").parse()?;
    let dir = args.next().unwrap_or_else(|| "ports".into());

    let outcome = run_protocol(&alice, &bob, Backend::Optical, &PayoffTable::default())?;
    let images = port_images(&outcome, GridSpec::default());
    for (img, path) in images.iter().zip(write_port_images(&images, dir.as_ref())?) {
        println!("{}  weight {:.3}  {}", img.label(), img.scale, path.display());
    }
    Ok(())
}
