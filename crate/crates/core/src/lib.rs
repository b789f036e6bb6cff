//! Quantum prisoners dilemma on classical spin-orbit laser modes.
//!
//! A paraxial beam carrying a first-order Hermite-Gaussian spatial mode and a
//! polarization lives in a four-dimensional mode space that is mathematically
//! a pair of qubits. Polarization is Alice's qubit (`H` = cooperate, `V` =
//! defect), the spatial mode is Bob's (`h` = cooperate, `v` = defect).
//!
//! The crate is organised bottom-up:
//!
//! - [`qmath`]: fixed-size complex matrices, states, concurrence.
//! - [`optics`]: wave plates, Dove prisms, Mach-Zehnder stages, the
//!   entangler and the optical disentangler with its phase calibration.
//! - [`game`]: payoff table, strategies, the full protocol and the
//!   classical mixed-strategy baseline.
//! - [`analysis`]: payoff surface sweeps, best responses and equilibria.
//! - [`render`]: Hermite-Gaussian port images written as PGM files.
//! - [`cli`] and [`service`]: the `qpd` command line and its HTTP API.
//!
//! ```
//! use spinorbit_pd::game::{run_protocol, Backend, PayoffTable, Strategy};
//!
//! let out = run_protocol(&Strategy::IZ, &Strategy::IZ, Backend::Abstract, &PayoffTable::default())?;
//! assert!((out.payoff_a - 3.0).abs() < 1e-9);
//! # Ok::<(), spinorbit_pd::Error>(())
//! ```

pub mod analysis;
pub mod cli;
mod error;
pub mod game;
pub mod optics;
pub mod qmath;
pub mod render;
pub mod service;

pub use error::{Error, Result};
