//! Simulation and analysis toolkit for a central electron spin qubit
//! hyperfine-coupled to collective nuclear-spin ensembles in a GaAs quantum
//! dot.
//!
//! The crate covers the full pipeline used to study a nuclear-magnon quantum
//! register:
//!
//! - [`hilbert`]: truncated collective-basis Hilbert space (electron ⊗ three
//!   nuclear modes) and the spin/ladder operators acting on it,
//! - [`hamiltonian`]: the rotating-frame effective Hamiltonian with
//!   individually toggleable terms plus closed-form dressed-state rates,
//! - [`sampling`]: thermal / dark / deviated-dark nuclear state sampling and
//!   quasi-static detuning noise,
//! - [`dynamics`]: piecewise-constant Lindblad propagation with
//!   drive-proportional electron spin flips and the optical reset channel,
//! - [`experiments`]: NOVEL and ESR spectra, magnon Ramsey interferometry and
//!   quantum-register tomography as seeded Monte Carlo ensembles,
//! - [`analysis`]: closed-form estimators and Levenberg-Marquardt fits for
//!   the measured quantities.
//!
//! Frequencies in public interfaces are ordinary frequencies in MHz;
//! Hamiltonian matrix entries are angular frequencies in rad/us with the
//! 2*pi conversion applied exactly once at build time. Durations are ns in
//! sequence descriptions and us internally.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod experiments;
pub mod hamiltonian;
pub mod hilbert;
pub mod montecarlo;
pub mod sampling;

mod error;

pub use error::SimError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SimError>;
