//! Complex linear algebra on the two-qubit spin-orbit mode space.
//!
//! Basis order is polarization-major:
//! `[ψ_h ê_H, ψ_v ê_H, ψ_h ê_V, ψ_v ê_V]`, index `2·a + b` with `a` the
//! polarization bit (Alice) and `b` the spatial bit (Bob).

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::{Error, Result};

pub type Complex = Complex64;

pub const I: Complex = Complex::new(0.0, 1.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);
pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);

/// Tolerances for algebraic identities and end-to-end pipeline comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub algebraic: f64,
    pub pipeline: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { algebraic: 1e-12, pipeline: 1e-9 }
    }
}

/// A 2×2 complex matrix acting on a single degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element2(Matrix2<Complex>);

/// A 4×4 complex matrix acting on the full spin-orbit mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element4(Matrix4<Complex>);

macro_rules! element_common {
    ($ty:ident, $mat:ident, $n:expr) => {
        impl $ty {
            pub fn from_rows(rows: [[Complex; $n]; $n]) -> Self {
                $ty($mat::from_fn(|i, j| rows[i][j]))
            }

            pub fn identity() -> Self {
                $ty($mat::identity())
            }

            pub fn from_matrix(m: $mat<Complex>) -> Self {
                $ty(m)
            }

            pub fn matrix(&self) -> &$mat<Complex> {
                &self.0
            }

            pub fn entry(&self, row: usize, col: usize) -> Complex {
                self.0[(row, col)]
            }

            pub fn rows(&self) -> [[Complex; $n]; $n] {
                let mut out = [[ZERO; $n]; $n];
                for (i, row) in out.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = self.0[(i, j)];
                    }
                }
                out
            }

            /// Conjugate transpose.
            pub fn adjoint(&self) -> Self {
                $ty(self.0.adjoint())
            }

            pub fn scale(&self, c: Complex) -> Self {
                $ty(self.0 * c)
            }

            /// `‖M†M − I‖_max`.
            pub fn unitarity_defect(&self) -> f64 {
                max_abs(&(self.0.adjoint() * self.0 - $mat::identity()))
            }

            pub fn is_unitary(&self, tol: f64) -> bool {
                self.unitarity_defect() <= tol
            }

            /// Largest entry-wise modulus of `self − other`.
            pub fn max_diff(&self, other: &Self) -> f64 {
                max_abs(&(self.0 - other.0))
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            }
        }

        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                $ty(self.0 * rhs.0)
            }
        }

        impl Mul for &$ty {
            type Output = $ty;
            fn mul(self, rhs: &$ty) -> $ty {
                $ty(self.0 * rhs.0)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for i in 0..$n {
                    write!(f, "[")?;
                    for j in 0..$n {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", fmt_complex(self.0[(i, j)]))?;
                    }
                    writeln!(f, "]")?;
                }
                Ok(())
            }
        }
    };
}

element_common!(Element2, Matrix2, 2);
element_common!(Element4, Matrix4, 4);

impl Element2 {
    pub fn pauli_x() -> Self {
        Element2::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Element2::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn det(&self) -> Complex {
        let m = &self.0;
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
    }
}

impl Element4 {
    pub fn apply(&self, s: &SpinOrbitState) -> SpinOrbitState {
        apply(self, s)
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(d: [Complex; 4]) -> Self {
        Element4(Matrix4::from_fn(|i, j| if i == j { d[i] } else { ZERO }))
    }
}

/// `a ⊗ b`: the first factor acts on polarization (Alice), the second on the
/// spatial mode (Bob).
pub fn tensor(a: &Element2, b: &Element2) -> Element4 {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + j, 2 * k + l)] = a.0[(i, k)] * b.0[(j, l)];
                }
            }
        }
    }
    Element4(m)
}

pub fn apply(m: &Element4, s: &SpinOrbitState) -> SpinOrbitState {
    SpinOrbitState(m.0 * s.0)
}

pub fn adjoint(m: &Element4) -> Element4 {
    m.adjoint()
}

/// One qubit value: cooperate (`H`/`h`) or defect (`V`/`v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Bit {
    C,
    D,
}

impl Bit {
    pub fn index(self) -> usize {
        match self {
            Bit::C => 0,
            Bit::D => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Bit::C => 'C',
            Bit::D => 'D',
        }
    }
}

/// The four (Alice, Bob) outcomes in basis order.
pub const OUTCOMES: [(Bit, Bit); 4] = [(Bit::C, Bit::C), (Bit::C, Bit::D), (Bit::D, Bit::C), (Bit::D, Bit::D)];

/// Pure spin-orbit mode `αψ_h ê_H + βψ_v ê_H + γψ_h ê_V + δψ_v ê_V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitState(Vector4<Complex>);

impl SpinOrbitState {
    pub fn new(amp: [Complex; 4]) -> Result<Self> {
        if amp.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { what: "state amplitude" });
        }
        Ok(SpinOrbitState(Vector4::from(amp)))
    }

    /// `|a b⟩` with `a` Alice's (polarization) bit and `b` Bob's (spatial) bit.
    pub fn basis(alice: Bit, bob: Bit) -> Self {
        Self::basis_index(2 * alice.index() + bob.index())
    }

    /// Unit vector `e_i`. Panics if `i >= 4`.
    pub fn basis_index(i: usize) -> Self {
        assert!(i < 4, "basis index out of range");
        let mut v = Vector4::zeros();
        v[i] = ONE;
        SpinOrbitState(v)
    }

    pub fn amplitudes(&self) -> [Complex; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn amplitude(&self, alice: Bit, bob: Bit) -> Complex {
        self.0[2 * alice.index() + bob.index()]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Returns `None` for the zero vector.
    pub fn normalize(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| SpinOrbitState(self.0.unscale(n)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|amp_i|²` in basis order.
    pub fn probabilities(&self) -> [f64; 4] {
        let a = self.amplitudes();
        [a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr(), a[3].norm_sqr()]
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    /// Max-norm distance after rotating `other` by the global phase that best
    /// aligns it with `self`.
    pub fn max_diff_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        max_abs(&(self.0 - other.0 * phase))
    }

    pub fn scale(&self, c: Complex) -> Self {
        SpinOrbitState(self.0 * c)
    }
}

impl fmt::Display for SpinOrbitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.amplitudes();
        write!(f, "({}, {}, {}, {})", fmt_complex(a[0]), fmt_complex(a[1]), fmt_complex(a[2]), fmt_complex(a[3]))
    }
}

/// Concurrence `2·|αδ − βγ|` of a normalized pure state.
///
/// The factor 2 makes maximally entangled modes such as
/// `(ψ_h ê_H + iψ_v ê_V)/√2` score exactly 1.
pub fn concurrence(s: &SpinOrbitState) -> Result<f64> {
    let norm = s.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm });
    }
    let [a, b, c, d] = s.amplitudes();
    Ok(2.0 * (a * d - b * c).norm())
}

fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex, R, C>>(
    m: &nalgebra::Matrix<Complex, R, C, S>,
) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub(crate) fn fmt_complex(c: Complex) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(c.re), clean(c.im));
    if im >= 0.0 {
        format!("{re:.6}+{im:.6}i")
    } else {
        format!("{re:.6}-{:.6}i", -im)
    }
}
