//! Simulation and analysis toolkit for quantum fingerprinting protocols in the
//! simultaneous-message-passing model.
//!
//! The crate is organised around a small number of geometric objects:
//!
//! * [`SignMatrix`]: the ±1 matrix of a (possibly partial) Boolean function,
//!   with 0 marking pairs outside the promise.
//! * [`ThresholdEmbedding`]: unit vectors whose *squared* inner products sit
//!   below `delta0` on 0-inputs and above `delta1` on 1-inputs. This is exactly
//!   what a repeated swap-test protocol needs.
//! * [`Realization`]: unit vectors whose *signed* inner products separate the
//!   two classes with margin `gamma`.
//! * [`VectorSystem`]: bounded-norm vectors compiled from a classical protocol
//!   whose inner products reproduce its acceptance probabilities.
//!
//! Modules:
//!
//! * [`linalg`]: dense vectors/matrices, spectral and ℓ∞→ℓ1 norms.
//! * [`embeddings`]: verification and exact conversions between embeddings and
//!   realizations, plus dimension reduction of realizations.
//! * [`sim`]: the swap-test law, repeated fingerprinting and referee decisions.
//! * [`bounds`]: Forster and Linial et al. margin upper bounds, a max-margin
//!   heuristic, and the derived communication lower bounds.
//! * [`projections`]: Gaussian Johnson–Lindenstrauss maps and distortion checks.
//! * [`compiler`]: classical protocols → vector systems → fingerprint states.
//! * [`problems`]: Equality, Inner Product and Hamming-distance generators.
//! * [`document`]: the JSON interchange format.

pub mod bounds;
pub mod compiler;
pub mod document;
pub mod embeddings;
mod error;
pub mod linalg;
pub mod problems;
pub mod projections;
pub mod rng;
pub mod sim;

pub use compiler::{ClassicalSmpProtocol, OneWayProtocol, VectorSystem};
pub use embeddings::{Realization, SignMatrix, ThresholdEmbedding};
pub use error::{Error, ErrorClass, Result};
pub use linalg::{RealMatrix, RealVector};
pub use rng::Seed;

/// Absolute slack applied to every inequality check on inner products.
pub const VERIFY_TOL: f64 = 1e-9;
