//! Exact simulation laboratory for measurement + classically-conditioned
//! rotation energy-extraction protocols on the two-qubit XY model.
//!
//! The crate is organized as a stack: [`qmatrix`] provides dense complex
//! linear algebra for 2x2 and 4x4 operators, [`xy_model`] builds the
//! Hamiltonian and its Gibbs states, [`protocol`] runs the measurement ->
//! communication -> conditional-rotation pipeline with a full energy ledger,
//! [`correlations`] computes negativity, concurrence and quantum discord, and
//! [`closedform`] evaluates every analytic expression those pipelines are
//! checked against. [`verify`] bundles the cross-checks into a runnable suite.

pub mod closedform;
pub mod correlations;
mod error;
pub(crate) mod optim;
pub mod protocol;
pub mod qmatrix;
pub mod verify;
pub mod xy_model;

pub use error::{Error, Result};
