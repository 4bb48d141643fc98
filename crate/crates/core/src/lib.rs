//! Desk-scale laboratory for testing correlation between two m-uniform
//! hypergraphs on unlabelled vertices.
//!
//! The crate covers the whole pipeline:
//!
//! * [`combinatorics`]: hyperedge ranking, permutations, cycle types and
//!   the orbit profile induced on hyperedges by a vertex permutation.
//! * [`models`]: correlated Gaussian-Wigner and Erdős–Rényi tensor pairs.
//! * [`statistics`]: the permutation-maximized overlap statistic, exact and
//!   local-search maximizers, asymptotic and calibrated thresholds.
//! * [`bounds`]: Chernoff, Hanson-Wright and Lambert-W based evaluators and
//!   the closed-form detection thresholds.
//! * [`secondmoment`]: exact enumeration of the second moment of the
//!   likelihood ratio and the Poisson cycle-count comparison.
//! * [`harness`]: reproducible Monte Carlo power experiments and CSV output.

pub mod bounds;
pub mod combinatorics;
pub mod error;
pub mod harness;
pub mod lambert;
pub mod models;
pub mod rng;
pub mod secondmoment;
pub mod statistics;
pub mod tensor_io;

pub use error::{Error, Result};
