//! Offline monitoring for Multi-Lane Spatial Logic (MLSL).
//!
//! A [`model::Scenario`] fixes an initial traffic snapshot, a view, and a
//! timed word. The crate simulates the induced transition sequence, evaluates
//! MLSL formulas directly ([`mlsl`]), and compiles "globally φ" checks, exact
//! and ε-δ-robust, into real-arithmetic formulas ([`rcf`]) that an external
//! SMT solver decides ([`smt`]). The [`checker`] registry bundles these routes
//! behind one interface.

pub mod checker;
pub mod error;
pub mod mlsl;
pub mod model;
pub mod rational;
pub mod rcf;
pub mod robustness;
pub mod smt;

#[cfg(test)]
mod testdata;

pub use error::{Error, Result};
pub use rational::{ExtRational, Rational};
