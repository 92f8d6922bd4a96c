//! Finite-accuracy position monitoring and generalized measurements.
//!
//! The crate has two halves that meet in the middle:
//!
//! * continuum: Gaussian packets on a grid ([`qstate`]), the smearing
//!   decoherence channel with its closed forms and regime classifier
//!   ([`smear`]), and coarse-graining estimates in SI units ([`classical`]);
//! * finite dimension: measurement operator sets, POVMs, ancilla
//!   realizations, entangling evolution and partial traces ([`measure`]).
//!
//! [`config`], [`report`] and [`driver`] back the `qsmear` binary; the
//! `examples/` directory walks through each capability end to end.

pub mod classical;
pub mod config;
pub mod driver;
pub mod error;
pub mod grid;
pub mod measure;
pub mod qstate;
pub mod report;
pub mod smear;

pub use error::{Error, Result};
