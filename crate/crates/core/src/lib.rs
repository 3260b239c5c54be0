//! Exact small-dimension spin-1/2 toolkit.
//!
//! The crate covers dense complex linear algebra up to four particles,
//! the named states and observables of the GHZ, Bell and Goldstein/Hardy
//! constructions, exhaustive hidden-variable enumeration, the
//! `|P(a,b) - P(a,c)| + P(b,c)` landscape and a seeded sequential
//! Stern-Gerlach Monte Carlo.

pub mod error;
pub mod format;
pub mod landscape;
pub mod lhv;
pub mod linalg;
pub mod selftest;
pub mod sgsim;
pub mod sign;
pub mod stabilizer;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{
    anticommutator, born_probabilities, collapse_measure, commutator, eigencheck, expectation,
    kron, ComplexScalar, DenseOperator, EigenMatch, MeasurementRecord, StateVector, MAX_DIM,
    STATE_TOL, STRUCTURAL_TOL,
};
pub use sign::Sign;
