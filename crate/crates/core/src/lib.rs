//! Balancing domain decomposition by constraints (BDDC) for substructured
//! finite element problems, with constraints enforced by projection after a
//! change of variables and enriched adaptively from pairwise generalized
//! eigenproblems.

pub mod adaptive;
pub mod constraints;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod linalg;
pub mod solver;
pub mod substructuring;

pub use error::{Error, Result};
