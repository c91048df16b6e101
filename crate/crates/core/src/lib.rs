//! Finite-dimensional ontological ("hidden-variable") models of quantum systems.
//!
//! - [`qcore`]: pure states, projectors, Hermitian operators, Haar sampling.
//! - [`onto`]: ontic spaces, epistemic weights, response functions, concrete
//!   models and the structure verifier that reconstructs per-point operators.
//! - [`feasopt`]: dense two-phase simplex with Farkas certificates, alternating
//!   search for nonnegative models, Kochen-Specker assignment counting.
//! - [`bellchsh`]: two-qubit correlation tensors and CHSH values.
//! - [`dwigner`]: discrete Wigner functions on the `d x d` phase-space lattice.
//! - [`cli`]: document formats and the `ontolab` command-line runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellchsh;
pub mod cli;
pub mod dwigner;
pub mod error;
pub mod feasopt;
pub mod onto;
pub mod qcore;

pub use error::{Error, Result};
