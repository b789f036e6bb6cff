//! CCD-style images of the four output ports.
//!
//! Fields are evaluated at the beam waist with `w = 1` in grid units. A port
//! keeps the spatial profile of Bob's bit (`C` → `ψ_h`, `D` → `ψ_v`); Alice's
//! polarization only selects which port the light leaves from.

use std::fs;
use std::path::{Path, PathBuf};

use crate::game::Outcome;
use crate::qmath::{Bit, Complex, OUTCOMES};
use crate::{Error, Result};

/// Pixel count and half-width (in waist units) of a square sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 256, extent: 3.0 }
    }
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid { got: n, min: 8 });
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::Config(format!("grid extent must be positive, got {extent}")));
        }
        Ok(GridSpec { n, extent })
    }

    /// Pixel step `2·extent/n`.
    pub fn step(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Sample coordinates along one axis. Pixel `n/2` sits exactly on 0.
    pub fn coords(&self) -> Vec<f64> {
        let mid = (self.n / 2) as f64;
        (0..self.n).map(|i| (i as f64 - mid) * self.step()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialMode {
    /// First-order HG mode along x.
    H,
    /// First-order HG mode along y.
    V,
}

impl SpatialMode {
    pub fn for_bit(bit: Bit) -> Self {
        match bit {
            Bit::C => SpatialMode::H,
            Bit::D => SpatialMode::V,
        }
    }
}

/// Unnormalized first-order HG amplitude at the waist.
pub fn hg_amplitude(mode: SpatialMode, x: f64, y: f64) -> f64 {
    let lobe = match mode {
        SpatialMode::H => x,
        SpatialMode::V => y,
    };
    lobe * (-(x * x + y * y)).exp()
}

/// Complex field samples, row-major with rows along y.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex>,
}

impl FieldGrid {
    pub fn at(&self, row: usize, col: usize) -> Complex {
        self.values[row * self.spec.n + col]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// HG field sampled on `spec`, scaled so the brightest pixel has intensity 1.
pub fn hg_field(mode: SpatialMode, spec: GridSpec) -> FieldGrid {
    let xs = spec.coords();
    let raw: Vec<f64> = xs.iter().flat_map(|&y| xs.iter().map(move |&x| hg_amplitude(mode, x, y))).collect();
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let values = raw.iter().map(|&v| Complex::new(if peak > 0.0 { v / peak } else { 0.0 }, 0.0)).collect();
    FieldGrid { spec, values }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortImage {
    /// `(Alice bit, Bob bit)`.
    pub port: (Bit, Bit),
    pub spec: GridSpec,
    pub pixels: Vec<f64>,
    /// The weight `p(m, n)` applied to the unit-peak mode image.
    pub scale: f64,
}

impl PortImage {
    pub fn label(&self) -> String {
        format!("{}{}", self.port.0.letter(), self.port.1.letter())
    }

    pub fn file_name(&self) -> String {
        format!("port_{}.pgm", self.label())
    }

    pub fn max_pixel(&self) -> f64 {
        self.pixels.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_blank(&self) -> bool {
        self.max_pixel() <= 0.0
    }
}

/// Port weights below this are rounding residue of the matrix chain.
const DARK_WEIGHT: f64 = 1e-12;

/// One weighted image per output port, in basis order `CC, CD, DC, DD`.
pub fn port_images(outcome: &Outcome, spec: GridSpec) -> [PortImage; 4] {
    let h = hg_field(SpatialMode::H, spec).intensity();
    let v = hg_field(SpatialMode::V, spec).intensity();
    std::array::from_fn(|k| {
        let (alice, bob) = OUTCOMES[k];
        let profile = match SpatialMode::for_bit(bob) {
            SpatialMode::H => &h,
            SpatialMode::V => &v,
        };
        let p = outcome.probs[k];
        let scale = if p < DARK_WEIGHT { 0.0 } else { p };
        PortImage { port: (alice, bob), spec, pixels: profile.iter().map(|i| i * scale).collect(), scale }
    })
}

/// Binary PGM bytes with `[0, full_scale]` mapped linearly onto `[0, 255]`.
pub fn encode_pgm(img: &PortImage, full_scale: f64) -> Vec<u8> {
    let n = img.spec.n;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(img.pixels.iter().map(|&v| {
        if full_scale > 0.0 {
            (255.0 * v / full_scale).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

/// Writes one image normalized to its own maximum.
pub fn write_image(img: &PortImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img, img.max_pixel())).map_err(|e| Error::io(path, e))
}

/// Writes all ports of one outcome into `dir` as `port_<m><n>.pgm`, sharing
/// one brightness scale so relative brightness follows `p(m, n)`.
pub fn write_port_images(images: &[PortImage], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let global = images.iter().map(PortImage::max_pixel).fold(0.0, f64::max);
    images
        .iter()
        .map(|img| {
            let path = dir.join(img.file_name());
            fs::write(&path, encode_pgm(img, global)).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_protocol, Backend, PayoffTable, Strategy};

    fn outcome(a: Strategy, b: Strategy) -> Outcome {
        run_protocol(&a, &b, Backend::Abstract, &PayoffTable::default()).unwrap()
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(7, 1.0).is_err());
        assert!(GridSpec::new(8, 0.0).is_err());
        let g = GridSpec::new(8, 2.0).unwrap();
        assert_eq!(g.coords()[4], 0.0);
        let odd = GridSpec::new(9, 2.0).unwrap().coords();
        assert_eq!(odd[4], 0.0);
        assert_eq!(odd[0], -odd[8]);
    }

    #[test]
    fn nodal_line() {
        let spec = GridSpec::default();
        let f = hg_field(SpatialMode::H, spec).intensity();
        let col = spec.n / 2;
        for row in 0..spec.n {
            assert_eq!(f[row * spec.n + col], 0.0);
        }
        let peak = f.iter().copied().fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
    }

    #[test]
    fn lobes_at_half_waist_sqrt2() {
        // d/dx [x² exp(−2x²)] = 0 at x = ±1/√2; check with central differences.
        let target = std::f64::consts::FRAC_1_SQRT_2;
        let i = |x: f64| hg_amplitude(SpatialMode::H, x, 0.0).powi(2);
        let h = 1e-5;
        for x0 in [target, -target] {
            let slope = (i(x0 + h) - i(x0 - h)) / (2.0 * h);
            assert!(slope.abs() < 1e-8);
            assert!(i(x0) > i(x0 + 0.05) && i(x0) > i(x0 - 0.05));
        }
        // On the grid, the brightest pixel on y = 0 is within one step of it.
        let spec = GridSpec::new(512, 3.0).unwrap();
        let f = hg_field(SpatialMode::H, spec).intensity();
        let xs = spec.coords();
        let row = &f[(spec.n / 2) * spec.n..(spec.n / 2 + 1) * spec.n];
        let argmax = (0..spec.n).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!((xs[argmax].abs() - target).abs() <= spec.step());
    }

    #[test]
    fn v_is_transpose_of_h() {
        let spec = GridSpec::new(16, 2.0).unwrap();
        let h = hg_field(SpatialMode::H, spec);
        let v = hg_field(SpatialMode::V, spec);
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(h.at(r, c), v.at(c, r));
            }
        }
    }

    #[test]
    fn identity_pair_lights_cc_only() {
        let spec = GridSpec::new(32, 3.0).unwrap();
        let imgs = port_images(&outcome(Strategy::I, Strategy::I), spec);
        let lit: Vec<_> = imgs.iter().filter(|i| !i.is_blank()).map(PortImage::label).collect();
        assert_eq!(lit, ["CC"]);
        let h = hg_field(SpatialMode::H, spec).intensity();
        for (a, b) in imgs[0].pixels.iter().zip(&h) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn defect_pair_lights_dd_with_v_profile() {
        let spec = GridSpec::new(32, 3.0).unwrap();
        let imgs = port_images(&outcome(Strategy::IX, Strategy::IX), spec);
        let lit: Vec<_> = imgs.iter().filter(|i| !i.is_blank()).map(PortImage::label).collect();
        assert_eq!(lit, ["DD"]);
        let v = hg_field(SpatialMode::V, spec).intensity();
        for (a, b) in imgs[3].pixels.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_proportional_to_probability() {
        let spec = GridSpec::new(24, 3.0).unwrap();
        let o = outcome(Strategy::Q1, Strategy::I);
        let imgs = port_images(&o, spec);
        let unit_h: f64 = hg_field(SpatialMode::H, spec).intensity().iter().sum();
        let unit_v: f64 = hg_field(SpatialMode::V, spec).intensity().iter().sum();
        let mut max_sum = 0.0;
        for (k, img) in imgs.iter().enumerate() {
            let unit = if img.port.1 == Bit::C { unit_h } else { unit_v };
            let total: f64 = img.pixels.iter().sum();
            assert!((total / unit - o.probs[k]).abs() < 1e-9);
            max_sum += img.max_pixel();
        }
        assert!((max_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_format() {
        let spec = GridSpec::new(8, 3.0).unwrap();
        let imgs = port_images(&outcome(Strategy::I, Strategy::I), spec);
        let bytes = encode_pgm(&imgs[0], 1.0);
        assert!(bytes.starts_with(b"P5\n8 8 255\n") || bytes.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(bytes.len(), b"P5\n8 8\n255\n".len() + 64);
        assert!(bytes.contains(&255));
        let blank = encode_pgm(&imgs[1], 1.0);
        assert!(blank[b"P5\n8 8\n255\n".len()..].iter().all(|&b| b == 0));
        assert_eq!(encode_pgm(&imgs[1], 0.0), blank);
    }

    #[test]
    fn writes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(16, 3.0).unwrap();
        let imgs = port_images(&outcome(Strategy::Q2, Strategy::Q1), spec);
        let first = write_port_images(&imgs, &dir.path().join("a")).unwrap();
        let second = write_port_images(&imgs, &dir.path().join("b")).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
        }
        let single = dir.path().join("single.pgm");
        write_image(&imgs[0], &single).unwrap();
        let err = write_image(&imgs[0], &dir.path().join("missing/x.pgm")).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }
}
