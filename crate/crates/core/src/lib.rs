//! Desk-scale simulation and statistical characterization of
//! context-conditioned backaction in dynamic circuits.
//!
//! The crate is organized bottom-up:
//!
//! * [`simcore`] exact statevector simulation, Pauli-trajectory noise and
//!   seeded shot sampling into [`simcore::CountsTable`]s.
//! * [`harness`] builders for the parity-context (A6) circuit families and
//!   the marker/eraser (A6.2) sweep, plus the witnesses computed from counts.
//! * [`infostats`] entropy and mutual-information estimators, the Möbius
//!   decomposition over context subsets, permutation tests and bootstrap
//!   intervals.
//! * [`kernelfit`] the local/proxy/residual kernel decomposition, the
//!   ΔE(θ) curve fit and the context-dependence verdict.
//! * [`eraser`] visibility, distinguishability and complementarity analysis.
//!
//! Data-parallel loops (shots, shuffles, resamples, circuit fan-out) go
//! through [`par`], which uses rayon when the `parallel` feature is enabled
//! and plain iterators otherwise. Results are identical either way.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eraser;
pub mod error;
pub mod harness;
pub mod infostats;
pub mod kernelfit;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod simcore;

pub use error::{Error, Result};
