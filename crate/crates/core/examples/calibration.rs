//! Fit the phase calibration that aligns the optical disentangler with U†.

use spinorbit_pd::optics::{disentangler_report, phase_label};

fn main() -> spinorbit_pd::Result<()> {
    let report = disentangler_report()?;
    println!("realized pipeline:\n{}", report.realized);
    println!("target U†:\n{}", report.target);
    println!("fitted D = {}", report.calibration_label());
    println!("global phase g = {}", phase_label(report.global_phase));
    println!("residual = {:.3e}", report.residual);
    Ok(())
}
