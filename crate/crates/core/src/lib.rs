//! Entanglement detection for GHZ-like states under coherent and white noise.
//!
//! The crate is organized bottom-up:
//!
//! * [`pauli`] symbolic tensor-product observables, GHZ stabilizers and their
//!   conjugation through the noisy preparation circuit.
//! * [`state`] closed-form expectations and outcome distributions of the
//!   prepared state `(1-p)|Ψ⟩⟨Ψ| + p I/2^n`, valid at any `n`.
//! * [`oracle`] brute-force dense matrices for small `n`, used as ground truth.
//! * [`protocol`] measurement-setting families, the Fourier decomposition
//!   coefficients, seeded shot sampling and estimation.
//! * [`witness`] parameter estimation, witness evaluation and noise
//!   tolerances.
//! * [`cli`] configuration, experiment runs, sweeps and offline analysis.
//!
//! Data-parallel loops go through [`par::Execution`]; with the default
//! `parallel` feature they run on rayon, otherwise sequentially.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod par;
pub mod pauli;
pub mod protocol;
pub mod state;
pub mod witness;

pub use error::{Error, Result};

/// Complex scalar used by the dense routines.
pub type C64 = nalgebra::Complex<f64>;

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if a >= PI {
        a -= 2.0 * PI;
    }
    a
}
