//! Estimation of binary Markov networks by nodewise l1-penalised logistic
//! regression.
//!
//! The crate covers the full loop: generating random Ising models and
//! sampling from them ([`model`], [`sampler`]), fitting each node's
//! penalised conditional with a path solver and information-criterion
//! model selection ([`lasso`], [`selection`], [`nodewise`]), and judging
//! the results — recovery and prediction metrics, restricted-eigenvalue
//! diagnostics for collinear designs, and verifiers for the estimator's
//! finite-sample guarantees ([`evaluation`]). [`experiments`] wires those
//! pieces into reproducible sweeps over graph density and over the
//! fraction of exactly copied columns.
//!
//! Everything is deterministic given its seeds, including the parallel
//! paths.

pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod lasso;
pub mod linalg;
pub mod model;
pub mod nodewise;
pub mod numeric;
pub mod sampler;
pub mod seeds;
pub mod selection;

pub use error::{Error, Result};
