//! The prisoners dilemma engine.
//!
//! Outcomes are labelled `(m, n)` with `m` Alice's bit (polarization) and `n`
//! Bob's bit (spatial mode), stored in basis order `[CC, CD, DC, DD]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::optics::{self, mode_converter, ConverterParams};
use crate::qmath::{tensor, Bit, Complex, Element2, Element4, SpinOrbitState, OUTCOMES};
use crate::{Error, Result};

/// Penalty reductions `R_A(m, n)`, `R_B(m, n)` indexed by (Alice move, Bob move).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub r_a: [[f64; 2]; 2],
    pub r_b: [[f64; 2]; 2],
}

impl Default for PayoffTable {
    fn default() -> Self {
        PayoffTable { r_a: [[3.0, 0.0], [5.0, 1.0]], r_b: [[3.0, 5.0], [0.0, 1.0]] }
    }
}

impl PayoffTable {
    pub fn new(r_a: [[f64; 2]; 2], r_b: [[f64; 2]; 2]) -> Result<Self> {
        let ok = r_a.iter().chain(r_b.iter()).flatten().all(|v| v.is_finite() && *v >= 0.0);
        if !ok {
            return Err(Error::Config("payoff entries must be finite and nonnegative".into()));
        }
        Ok(PayoffTable { r_a, r_b })
    }

    pub fn get(&self, alice: Bit, bob: Bit) -> (f64, f64) {
        let (m, n) = (alice.index(), bob.index());
        (self.r_a[m][n], self.r_b[m][n])
    }

    /// Replace the pair for one outcome; entries must be nonnegative.
    pub fn with_entry(mut self, alice: Bit, bob: Bit, pair: (f64, f64)) -> Result<Self> {
        let (m, n) = (alice.index(), bob.index());
        self.r_a[m][n] = pair.0;
        self.r_b[m][n] = pair.1;
        PayoffTable::new(self.r_a, self.r_b)
    }

    /// Applies an override of the form `CC=3,3`.
    pub fn apply_override(self, spec: &str) -> Result<Self> {
        let bad = || Error::ParsePayoff { input: spec.to_string() };
        let (cell, values) = spec.split_once('=').ok_or_else(bad)?;
        let mut letters = cell.trim().chars().map(|c| match c.to_ascii_uppercase() {
            'C' => Some(Bit::C),
            'D' => Some(Bit::D),
            _ => None,
        });
        let (Some(Some(alice)), Some(Some(bob)), None) = (letters.next(), letters.next(), letters.next()) else {
            return Err(bad());
        };
        let (a, b) = values.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        self.with_entry(alice, bob, (a, b)).map_err(|_| bad())
    }

    pub fn min_entry(&self) -> f64 {
        self.r_a.iter().chain(self.r_b.iter()).flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.r_a.iter().chain(self.r_b.iter()).flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The five strategies realized with wave plates and Dove prisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedStrategy {
    #[serde(rename = "iX")]
    IX,
    Q1,
    I,
    Q2,
    #[serde(rename = "iZ")]
    IZ,
}

impl NamedStrategy {
    pub const ALL: [NamedStrategy; 5] =
        [NamedStrategy::IX, NamedStrategy::Q1, NamedStrategy::I, NamedStrategy::Q2, NamedStrategy::IZ];

    pub fn name(self) -> &'static str {
        match self {
            NamedStrategy::IX => "iX",
            NamedStrategy::Q1 => "Q1",
            NamedStrategy::I => "I",
            NamedStrategy::Q2 => "Q2",
            NamedStrategy::IZ => "iZ",
        }
    }

    pub fn params(self) -> ConverterParams {
        let (theta_deg, phi_rad) = match self {
            NamedStrategy::IX => (45.0, PI),
            NamedStrategy::Q1 => (45.0, FRAC_PI_2),
            NamedStrategy::I => (0.0, 0.0),
            NamedStrategy::Q2 => (0.0, FRAC_PI_2),
            NamedStrategy::IZ => (0.0, PI),
        };
        ConverterParams { theta_deg, phi_rad }
    }

    /// `I` and `iX` are the classical cooperate/defect moves.
    pub fn is_classical(self) -> bool {
        matches!(self, NamedStrategy::I | NamedStrategy::IX)
    }
}

/// A player's move: a named strategy or an arbitrary `C(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Named(NamedStrategy),
    Converter(ConverterParams),
}

impl Strategy {
    pub const IX: Strategy = Strategy::Named(NamedStrategy::IX);
    pub const Q1: Strategy = Strategy::Named(NamedStrategy::Q1);
    pub const I: Strategy = Strategy::Named(NamedStrategy::I);
    pub const Q2: Strategy = Strategy::Named(NamedStrategy::Q2);
    pub const IZ: Strategy = Strategy::Named(NamedStrategy::IZ);

    pub fn named() -> Vec<Strategy> {
        NamedStrategy::ALL.iter().map(|&n| Strategy::Named(n)).collect()
    }

    pub fn converter(theta_deg: f64, phi_rad: f64) -> Result<Strategy> {
        Ok(Strategy::Converter(ConverterParams::new(theta_deg, phi_rad)?))
    }

    pub fn params(&self) -> ConverterParams {
        match self {
            Strategy::Named(n) => n.params(),
            Strategy::Converter(p) => *p,
        }
    }

    pub fn element(&self) -> Element2 {
        mode_converter(self.params())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Named(n) => f.write_str(n.name()),
            Strategy::Converter(p) => write!(f, "C({}, {})", p.theta_deg, p.phi_rad),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `NAME | C(<deg>, <rad>)`; names match case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::ParseStrategy { input: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        if let Some(named) = NamedStrategy::ALL.iter().find(|n| n.name().eq_ignore_ascii_case(t)) {
            return Ok(Strategy::Named(*named));
        }
        let inner = t
            .strip_prefix(['C', 'c'])
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| fail("expected a strategy name or C(<deg>, <rad>)"))?;
        let (theta, phi) = inner.split_once(',').ok_or_else(|| fail("expected two comma-separated numbers"))?;
        let theta: f64 = theta.trim().parse().map_err(|_| fail("bad rotation angle"))?;
        let phi: f64 = phi.trim().parse().map_err(|_| fail("bad retardation phase"))?;
        Strategy::converter(theta, phi).map_err(|_| fail("parameters must be finite"))
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the opponent (Bob) picks a move each round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpponentPolicy {
    Fixed(Strategy),
    /// Best reply to Alice's current move over the swept converter family.
    BestResponse,
    /// Always `iZ`.
    Nash,
}

impl OpponentPolicy {
    pub fn choose(
        &self,
        alice: &Strategy,
        grid: usize,
        backend: Backend,
        table: &PayoffTable,
    ) -> Result<Strategy> {
        match self {
            OpponentPolicy::Fixed(s) => Ok(*s),
            OpponentPolicy::Nash => Ok(Strategy::IZ),
            OpponentPolicy::BestResponse => {
                let (t, _) =
                    crate::analysis::best_response_for(crate::analysis::Player::Bob, alice, grid, backend, table)?;
                Ok(t.strategy())
            }
        }
    }
}

impl fmt::Display for OpponentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpponentPolicy::Fixed(s) => write!(f, "fixed:{s}"),
            OpponentPolicy::BestResponse => f.write_str("best_response"),
            OpponentPolicy::Nash => f.write_str("nash"),
        }
    }
}

impl FromStr for OpponentPolicy {
    type Err = Error;

    /// `nash`, `best` / `best_response`, or a strategy (optionally `fixed:`-prefixed).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "nash" => Ok(OpponentPolicy::Nash),
            "best" | "best_response" | "best-response" => Ok(OpponentPolicy::BestResponse),
            _ => {
                let strategy = t.strip_prefix("fixed:").unwrap_or(t);
                Ok(OpponentPolicy::Fixed(strategy.parse()?))
            }
        }
    }
}

/// How the entangling and disentangling stages are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// `U` and `U†` as abstract matrices.
    #[default]
    Abstract,
    /// Wave plate + interferometer preparation and the calibrated optical
    /// disentangler.
    Optical,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abstract" => Ok(Backend::Abstract),
            "optical" => Ok(Backend::Optical),
            other => Err(Error::Config(format!("unknown backend {other:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Abstract => "abstract",
            Backend::Optical => "optical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    /// Final amplitudes `c_mn` in basis order.
    pub amplitudes: [Complex; 4],
    /// `p(m, n) = |c_mn|²`.
    pub probs: [f64; 4],
    pub payoff_a: f64,
    pub payoff_b: f64,
}

impl Outcome {
    pub fn prob(&self, alice: Bit, bob: Bit) -> f64 {
        self.probs[2 * alice.index() + bob.index()]
    }

    pub fn payoffs(&self) -> (f64, f64) {
        (self.payoff_a, self.payoff_b)
    }
}

/// Prepared mode and disentangler for one backend.
#[derive(Debug, Clone, Copy)]
pub struct Protocol {
    prepared: SpinOrbitState,
    disentangler: Element4,
}

impl Protocol {
    pub fn new(backend: Backend) -> Result<Protocol> {
        match backend {
            Backend::Abstract => {
                let u = optics::entangler();
                Ok(Protocol { prepared: u.apply(&SpinOrbitState::basis(Bit::C, Bit::C)), disentangler: u.adjoint() })
            }
            Backend::Optical => Ok(Protocol {
                prepared: optics::prepare_initial()?,
                disentangler: optics::disentangler_report()?.corrected(),
            }),
        }
    }

    /// Shared instance per backend.
    pub fn cached(backend: Backend) -> Result<&'static Protocol> {
        static ABSTRACT: OnceLock<Protocol> = OnceLock::new();
        static OPTICAL: OnceLock<Protocol> = OnceLock::new();
        let cell = match backend {
            Backend::Abstract => &ABSTRACT,
            Backend::Optical => &OPTICAL,
        };
        if let Some(p) = cell.get() {
            return Ok(p);
        }
        let p = Protocol::new(backend)?;
        Ok(cell.get_or_init(|| p))
    }

    /// Disentangled mode after Alice applies `a` to polarization and Bob `b`
    /// to the spatial mode.
    pub fn final_state(&self, a: &Element2, b: &Element2) -> SpinOrbitState {
        let played = tensor(a, b).apply(&self.prepared);
        self.disentangler.apply(&played)
    }

    pub fn play_elements(&self, a: &Element2, b: &Element2, table: &PayoffTable) -> Outcome {
        let out = self.final_state(a, b);
        let amplitudes = out.amplitudes();
        let probs = out.probabilities();
        let (payoff_a, payoff_b) = expected_payoffs(&probs, table);
        Outcome { amplitudes, probs, payoff_a, payoff_b }
    }

    pub fn play(&self, a: &Strategy, b: &Strategy, table: &PayoffTable) -> Outcome {
        self.play_elements(&a.element(), &b.element(), table)
    }
}

pub fn run_protocol(a: &Strategy, b: &Strategy, backend: Backend, table: &PayoffTable) -> Result<Outcome> {
    Ok(Protocol::cached(backend)?.play(a, b, table))
}

/// Expected penalty reduction `$_j = Σ p(m,n)·R_j(m,n)` for both players.
pub fn payoffs(probs: &[f64; 4], table: &PayoffTable) -> Result<(f64, f64)> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution { sum });
    }
    Ok(expected_payoffs(probs, table))
}

fn expected_payoffs(probs: &[f64; 4], table: &PayoffTable) -> (f64, f64) {
    OUTCOMES.iter().zip(probs).fold((0.0, 0.0), |(sa, sb), (&(m, n), p)| {
        let (ra, rb) = table.get(m, n);
        (sa + p * ra, sb + p * rb)
    })
}

/// Payoffs when Alice defects with probability `pa_d` and Bob with `pb_d`,
/// independently.
pub fn classical_mixed(pa_d: f64, pb_d: f64, table: &PayoffTable) -> (f64, f64) {
    let alice = [1.0 - pa_d, pa_d];
    let bob = [1.0 - pb_d, pb_d];
    let probs = [alice[0] * bob[0], alice[0] * bob[1], alice[1] * bob[0], alice[1] * bob[1]];
    expected_payoffs(&probs, table)
}

/// Detector readings for the four output ports plus a common background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensities {
    pub i_mn: [f64; 4],
    pub background: f64,
}

impl Intensities {
    pub fn new(i_mn: [f64; 4], background: f64) -> Result<Self> {
        let ok = i_mn.iter().chain(std::iter::once(&background)).all(|v| v.is_finite() && *v >= 0.0);
        if !ok {
            return Err(Error::Config("intensities must be finite and nonnegative".into()));
        }
        Ok(Intensities { i_mn, background })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredProbs {
    pub probs: [f64; 4],
    /// Set when a channel fell below the background and was clamped to 0.
    pub clamped: bool,
}

/// Background-subtracted intensities normalized to the total.
pub fn intensities_to_probs(x: &Intensities) -> Result<MeasuredProbs> {
    let mut clamped = false;
    let corrected = x.i_mn.map(|i| {
        let v = i - x.background;
        if v < 0.0 {
            clamped = true;
            0.0
        } else {
            v
        }
    });
    let total: f64 = corrected.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllDark);
    }
    Ok(MeasuredProbs { probs: corrected.map(|v| v / total), clamped })
}

/// Outcome for every ordered pair; `grid[i][j]` has Alice playing
/// `strategies[i]` and Bob `strategies[j]`.
pub fn coefficient_table(strategies: &[Strategy], backend: Backend, table: &PayoffTable) -> Result<Vec<Vec<Outcome>>> {
    let protocol = Protocol::cached(backend)?;
    Ok(strategies
        .iter()
        .map(|a| strategies.iter().map(|b| protocol.play(a, b, table)).collect())
        .collect())
}
