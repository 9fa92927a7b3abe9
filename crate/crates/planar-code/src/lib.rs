//! Building blocks for planar surface-code experiments.
//!
//! The crate is organised around a few independent layers:
//!
//! * [`geometry`] - lattice layouts, stabilizer supports, holes, distances.
//! * [`frame`] - bit-packed Pauli error frames and syndrome extraction.
//! * [`noise`] - stochastic error models with reproducible per-trial streams.
//! * [`decode`] - minimum-weight perfect-matching decoding and an exact
//!   maximum-likelihood reference decoder for small codes.
//! * [`tableau`] - a stabilizer (Clifford) simulator plus code protocols:
//!   syndrome extraction circuits, anyon braiding, hole deformation and the
//!   nine-qubit repetition-of-repetition demo.
//! * [`thermal`] - classical finite-temperature memory models (Ising chains,
//!   Ising sheets, toric-code sectors) with continuous-time Metropolis
//!   dynamics and lifetime measurement.
//!
//! Everything is deterministic given explicit seeds; nothing reads global
//! state.

pub mod decode;
pub mod frame;
pub mod geometry;
pub mod noise;
pub mod tableau;
pub mod thermal;

#[cfg(feature = "dense-oracle")]
pub mod oracle;
