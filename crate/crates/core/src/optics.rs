//! Optical elements as matrices, the state-preparation pipeline and the
//! optical realization of the disentangler.
//!
//! Products are written physics-style: the rightmost factor is the first
//! element the beam traverses. Rotation angles are taken in degrees at every
//! public boundary and phases in radians.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::qmath::{tensor, Bit, Complex, Element2, Element4, SpinOrbitState, Tolerances, ONE, ZERO};
use crate::{Error, Result};

/// Parameters of a mode converter `C(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    /// Rotation angle in degrees.
    pub theta_deg: f64,
    /// Retardation phase in radians.
    pub phi_rad: f64,
}

impl ConverterParams {
    pub fn new(theta_deg: f64, phi_rad: f64) -> Result<Self> {
        if !theta_deg.is_finite() || !phi_rad.is_finite() {
            return Err(Error::NonFinite { what: "converter parameters" });
        }
        Ok(ConverterParams { theta_deg, phi_rad })
    }
}

/// `C(θ, φ)`: a retarder of phase `φ` rotated by `θ` degrees. Always in SU(2).
pub fn mode_converter(p: ConverterParams) -> Element2 {
    let two_theta = 2.0 * p.theta_deg.to_radians();
    let (s, c) = (p.phi_rad / 2.0).sin_cos();
    let diag = s * two_theta.cos();
    let off = Complex::new(0.0, s * two_theta.sin());
    Element2::from_rows([[Complex::new(c, diag), off], [off, Complex::new(c, -diag)]])
}

/// Polarizing Mach-Zehnder interferometer with a Dove prism in one arm and
/// relative arm phase `phi`.
pub fn mz(phi: f64) -> Element4 {
    let e = Complex::from_polar(1.0, phi);
    Element4::from_rows([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, -ONE, ZERO, ZERO],
        [ZERO, ZERO, ZERO, -e],
        [ZERO, ZERO, e, ZERO],
    ])
}

/// Nonlocal entangling operation `(I + i X⊗X)/√2`.
pub fn entangler() -> Element4 {
    let r = Complex::new(FRAC_1_SQRT_2, 0.0);
    let q = Complex::new(0.0, FRAC_1_SQRT_2);
    Element4::from_rows([[r, ZERO, ZERO, q], [ZERO, r, q, ZERO], [ZERO, q, r, ZERO], [q, ZERO, ZERO, r]])
}

/// The maximally entangled mode `(ψ_h ê_H + i ψ_v ê_V)/√2` the players act on.
pub fn initial_mode() -> SpinOrbitState {
    SpinOrbitState::new([Complex::new(FRAC_1_SQRT_2, 0.0), ZERO, ZERO, Complex::new(0.0, FRAC_1_SQRT_2)])
        .expect("finite amplitudes")
}

/// Prepares the initial mode optically: `ψ_h ê_H` through a QWP at 45° and
/// then a balanced interferometer.
///
/// Fails only if the pipeline drifts from [`initial_mode`] by more than the
/// pipeline tolerance after global-phase alignment.
pub fn prepare_initial() -> Result<SpinOrbitState> {
    let qwp = named_element(ElementKind::Qwp, 45.0, None)?;
    let stage = mz(0.0) * tensor(&qwp, &Element2::identity());
    let out = stage.apply(&SpinOrbitState::basis(Bit::C, Bit::C));
    let residual = out.max_diff_up_to_phase(&initial_mode());
    if residual > Tolerances::default().pipeline {
        return Err(Error::PipelineMismatch { residual });
    }
    Ok(out)
}

/// `MZ(0)·[C(−45°, π/2) ⊗ I]·MZ(π/2)`, the beam entering `MZ(π/2)` first.
pub fn disentangler_pipeline() -> Element4 {
    let qwp = mode_converter(ConverterParams { theta_deg: -45.0, phi_rad: FRAC_PI_2 });
    mz(0.0) * tensor(&qwp, &Element2::identity()) * mz(FRAC_PI_2)
}

/// Result of fitting a realized optical pipeline to an abstract target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineReport {
    pub target: Element4,
    pub realized: Element4,
    /// Unimodular diagonal `D` applied on the input side, first entry fixed to 1.
    pub calibration: [Complex; 4],
    /// Global phase `g` with `realized·D ≈ g·target`.
    pub global_phase: Complex,
    /// `‖realized·D − g·target‖_max`.
    pub residual: f64,
}

impl PipelineReport {
    /// `realized·D / g`: the pipeline with fixed phase retarders in front,
    /// equal to the target within the residual.
    pub fn corrected(&self) -> Element4 {
        (self.realized * Element4::diagonal(self.calibration)).scale(self.global_phase.conj())
    }

    /// `diag(d0, d1, d2, d3)` with quarter-turn phases written as `1, i, -1, -i`.
    pub fn calibration_label(&self) -> String {
        let parts: Vec<String> = self.calibration.iter().map(|&d| phase_label(d)).collect();
        format!("diag({})", parts.join(", "))
    }
}

/// Names a unimodular number: `1`, `i`, `-1`, `-i`, or `exp(<rad>i)`.
pub fn phase_label(z: Complex) -> String {
    for (value, name) in [(ONE, "1"), (Complex::new(0.0, 1.0), "i"), (-ONE, "-1"), (Complex::new(0.0, -1.0), "-i")] {
        if (z - value).norm() < 1e-12 {
            return name.to_string();
        }
    }
    format!("exp({:.12}i)", z.arg())
}

/// Fits `realized·D ≈ g·target` for a unimodular diagonal `D` (first entry 1)
/// and a global phase `g`, using the pipeline tolerance.
pub fn calibrate(realized: &Element4, target: &Element4) -> Result<PipelineReport> {
    calibrate_with(realized, target, Tolerances::default().pipeline)
}

pub fn calibrate_with(realized: &Element4, target: &Element4, tol: f64) -> Result<PipelineReport> {
    // Per-column phase u_j aligning realized[:, j]·u_j with target[:, j].
    let mut u = [ONE; 4];
    for (j, uj) in u.iter_mut().enumerate() {
        let overlap: Complex = (0..4).map(|i| realized.entry(i, j).conj() * target.entry(i, j)).sum();
        if overlap.norm() > f64::MIN_POSITIVE {
            *uj = overlap / overlap.norm();
        }
    }
    let global_phase = u[0].conj();
    let calibration = u.map(|uj| global_phase * uj);
    let fitted = *realized * Element4::diagonal(calibration);
    let residual = fitted.max_diff(&target.scale(global_phase));
    if !(residual <= tol) {
        return Err(Error::CalibrationFailed { residual });
    }
    Ok(PipelineReport { target: *target, realized: *realized, calibration, global_phase, residual })
}

/// Calibration of [`disentangler_pipeline`] against `U†`, computed once.
pub fn disentangler_report() -> Result<&'static PipelineReport> {
    static REPORT: OnceLock<std::result::Result<PipelineReport, f64>> = OnceLock::new();
    REPORT
        .get_or_init(|| {
            calibrate(&disentangler_pipeline(), &entangler().adjoint()).map_err(|e| match e {
                Error::CalibrationFailed { residual } => residual,
                _ => f64::INFINITY,
            })
        })
        .as_ref()
        .map_err(|&residual| Error::CalibrationFailed { residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    /// Quarter wave plate, `φ = π/2`.
    Qwp,
    /// Half wave plate, `φ = π`.
    Hwp,
    /// Dove prism acting on the spatial mode, `φ = π`.
    DovePrism,
    /// Cylindrical-lens converter with variable retardation.
    CylindricalConverter,
}

pub fn named_element(kind: ElementKind, theta_deg: f64, phi: Option<f64>) -> Result<Element2> {
    let phi_rad = match kind {
        ElementKind::Qwp => FRAC_PI_2,
        ElementKind::Hwp | ElementKind::DovePrism => PI,
        ElementKind::CylindricalConverter => phi.ok_or(Error::MissingPhase)?,
    };
    Ok(mode_converter(ConverterParams::new(theta_deg, phi_rad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{apply, concurrence, I};

    fn conv(theta: f64, phi: f64) -> Element2 {
        mode_converter(ConverterParams::new(theta, phi).unwrap())
    }

    /// Independent matrix product over raw row arrays.
    fn matmul(a: [[Complex; 4]; 4], b: [[Complex; 4]; 4]) -> [[Complex; 4]; 4] {
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn converter_zero_retardation_is_identity() {
        for theta in [0.0, 13.0, 45.0, -70.0] {
            assert!(conv(theta, 0.0).max_diff(&Element2::identity()) < 1e-15);
        }
    }

    #[test]
    fn converter_named_paulis() {
        let ix = Element2::pauli_x().scale(I);
        let iz = Element2::pauli_z().scale(I);
        assert!(conv(45.0, PI).max_diff(&ix) < 1e-15);
        assert!(conv(0.0, PI).max_diff(&iz) < 1e-15);
    }

    #[test]
    fn converter_in_su2_on_grid() {
        for ti in 0..=18 {
            for pi_ in 0..=12 {
                let m = conv(-90.0 + 10.0 * ti as f64, -PI + PI * pi_ as f64 / 3.0);
                assert!((m.det() - ONE).norm() < 1e-12);
                assert!(m.is_unitary(1e-12));
            }
        }
    }

    #[test]
    fn same_axis_retardations_compose() {
        for theta in [0.0, 22.5, 45.0, 71.0] {
            let (a, b) = (0.4, 1.9);
            let lhs = conv(theta, a) * conv(theta, b);
            assert!(lhs.max_diff(&conv(theta, a + b)) < 1e-12);
        }
    }

    #[test]
    fn mz_examples() {
        let e0 = SpinOrbitState::basis_index(0);
        assert_eq!(mz(0.0).apply(&e0), e0);
        let out = mz(FRAC_PI_2).apply(&SpinOrbitState::basis_index(2));
        let want = SpinOrbitState::basis_index(3).scale(I);
        assert!(out.max_diff(&want) < 1e-15);
        for phi in [0.0, 0.3, FRAC_PI_2, PI] {
            assert!(mz(phi).is_unitary(1e-12));
        }
    }

    #[test]
    fn mz_phases_compose() {
        // The V block of MZ(φ1)·MZ(φ2) is diagonal with entries −e^{i(φ1+φ2)}.
        for (a, b) in [(0.2, 0.7), (1.0, 2.5), (-0.4, 3.0)] {
            let p = mz(a) * mz(b);
            for k in [2, 3] {
                let z = p.entry(k, k);
                let want = Complex::from_polar(1.0, a + b + PI);
                assert!((z - want).norm() < 1e-12);
            }
            assert!(p.entry(3, 2).norm() < 1e-15);
        }
    }

    #[test]
    fn entangler_columns() {
        let s = FRAC_1_SQRT_2;
        let u = entangler();
        assert!(u.is_unitary(1e-12));
        let cc = u.apply(&SpinOrbitState::basis_index(0));
        assert!(cc.max_diff(&initial_mode()) < 1e-15);
        let dd = u.apply(&SpinOrbitState::basis_index(3));
        let want = SpinOrbitState::new([Complex::new(0.0, s), ZERO, ZERO, Complex::new(s, 0.0)]).unwrap();
        assert!(dd.max_diff(&want) < 1e-15);
    }

    #[test]
    fn prepared_mode_is_maximally_entangled() {
        let psi = prepare_initial().unwrap();
        assert!(psi.max_diff_up_to_phase(&initial_mode()) < 1e-9);
        assert!((concurrence(&psi).unwrap() - 1.0).abs() < 1e-12);
        let via_u = apply(&entangler(), &SpinOrbitState::basis_index(0));
        assert!(psi.max_diff_up_to_phase(&via_u) < 1e-9);
    }

    #[test]
    fn disentangler_pipeline_first_column() {
        let p = disentangler_pipeline();
        assert!(p.is_unitary(1e-12));
        let s = FRAC_1_SQRT_2;
        let want = SpinOrbitState::new([Complex::new(s, 0.0), ZERO, ZERO, Complex::new(0.0, -s)]).unwrap();
        assert!(p.apply(&SpinOrbitState::basis_index(0)).max_diff(&want) < 1e-12);

        // Independent route: multiply the stage matrices as raw arrays.
        let qwp = conv(-45.0, FRAC_PI_2);
        let stage = tensor(&qwp, &Element2::identity());
        let raw = matmul(matmul(mz(0.0).rows(), stage.rows()), mz(FRAC_PI_2).rows());
        assert!(p.max_diff(&Element4::from_rows(raw)) < 1e-15);
    }

    #[test]
    fn disentangler_is_not_literally_u_dagger() {
        let p = disentangler_pipeline();
        let target = entangler().adjoint();
        let best_global = (0..360)
            .map(|k| p.max_diff(&target.scale(Complex::from_polar(1.0, (k as f64).to_radians()))))
            .fold(f64::INFINITY, f64::min);
        assert!(best_global > 0.1);
    }

    #[test]
    fn calibrate_self_and_global_phase() {
        let u = entangler().adjoint();
        let r = calibrate(&u, &u).unwrap();
        assert_eq!(r.calibration, [ONE; 4]);
        assert!(r.residual < 1e-15);

        let g = Complex::from_polar(1.0, PI / 7.0);
        let r = calibrate(&u.scale(g), &u).unwrap();
        assert!(r.residual <= 1e-12);
        assert!(r.corrected().max_diff(&u) <= 1e-12);
    }

    #[test]
    fn disentangler_calibration_fits_diagonal_phase() {
        let report = disentangler_report().unwrap();
        assert!(report.residual <= 1e-9);

        // Oracle: exhaustive fit over quarter-turn phases on the explicit matrices.
        let p = disentangler_pipeline();
        let target = entangler().adjoint();
        let quarter = [ONE, I, -ONE, -I];
        let mut best = (f64::INFINITY, [ONE; 4]);
        for &d1 in &quarter {
            for &d2 in &quarter {
                for &d3 in &quarter {
                    for &g in &quarter {
                        let d = [ONE, d1, d2, d3];
                        let r = (p * Element4::diagonal(d)).max_diff(&target.scale(g));
                        if r < best.0 {
                            best = (r, d);
                        }
                    }
                }
            }
        }
        assert!(best.0 < 1e-12);
        for (fit, oracle) in report.calibration.iter().zip(best.1.iter()) {
            assert!((fit - oracle).norm() < 1e-12);
        }
        assert!((report.calibration[2] - I).norm() < 1e-12);
        assert_eq!(report.calibration_label(), "diag(1, 1, i, i)");
        assert_eq!(phase_label(Complex::from_polar(1.0, 0.5)), "exp(0.500000000000i)");
        assert!((report.calibration[3] - I).norm() < 1e-12);
        for d in report.calibration {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrate_rejects_convention_mismatch() {
        // A swap of Bob's bit cannot be absorbed by diagonal phases.
        let swap = tensor(&Element2::identity(), &Element2::pauli_x());
        let u = entangler().adjoint();
        match calibrate(&(u * swap), &u) {
            Err(Error::CalibrationFailed { residual }) => assert!(residual > 0.1),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn named_elements() {
        let qwp = named_element(ElementKind::Qwp, -45.0, None).unwrap();
        assert_eq!(qwp, conv(-45.0, FRAC_PI_2));
        let hwp = named_element(ElementKind::Hwp, 0.0, None).unwrap();
        assert!(hwp.max_diff(&Element2::pauli_z().scale(I)) < 1e-15);
        let dp = named_element(ElementKind::DovePrism, 45.0, None).unwrap();
        assert!(dp.max_diff(&Element2::pauli_x().scale(I)) < 1e-15);
        // ψ_h → ψ_v up to phase on Bob's side.
        let moved = tensor(&Element2::identity(), &dp).apply(&SpinOrbitState::basis(Bit::C, Bit::C));
        assert!(moved.max_diff_up_to_phase(&SpinOrbitState::basis(Bit::C, Bit::D)) < 1e-15);
        assert!(matches!(
            named_element(ElementKind::CylindricalConverter, 10.0, None),
            Err(Error::MissingPhase)
        ));
        let cyl = named_element(ElementKind::CylindricalConverter, 10.0, Some(0.7)).unwrap();
        assert_eq!(cyl, conv(10.0, 0.7));
    }
}
