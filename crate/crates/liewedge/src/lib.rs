//! Lie wedges of coherently controlled Lindblad systems.
//!
//! The crate builds controlled master equations in three representations
//! (ℝ³ coherence vectors, single-qubit and two-qubit superoperators), checks the
//! Lie-algebraic controllability conditions, saturates inner approximations of
//! the global Lie wedge, probes the Lie-semialgebra property and samples the
//! reachable channel semigroup.

pub mod channels;
pub mod error;
pub mod liealg;
pub mod lindblad;
pub mod matcore;
pub mod par;
pub mod reachable;
pub mod semialgebra;
pub mod wedge;

pub use error::{Error, Result};
pub use lindblad::{ControlSystem, Rep, Superop};
pub use matcore::{Mat, Subspace};
