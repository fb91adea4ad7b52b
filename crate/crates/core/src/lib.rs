//! Contextuality scenarios as hypergraphs of measurement outcomes.
//!
//! [`scenario`] holds the hypergraphs and their probabilistic models,
//! [`analysis`] classifies models exactly (deterministic, classical,
//! extremal), [`bell`] builds Bell scenarios and behaviors, [`quantum`]
//! validates and certifies quantum realizations, and [`search`] looks for
//! realizations numerically. [`exactmath`] is the rational linear algebra
//! underneath, and [`cli`] the `ctxkit` command.

pub mod analysis;
pub mod bell;
pub mod cli;
pub mod error;
pub mod exactmath;
pub mod io;
pub mod quantum;
pub mod scenario;
pub mod search;

pub use error::{Error, Result};
