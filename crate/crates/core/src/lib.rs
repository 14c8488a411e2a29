//! Entanglement and nonlocality bounds for indistinguishable qubits.
//!
//! * [`numerics`]: small dense complex linear algebra.
//! * [`symstate`]: reference-labelled qubit pairs and parity symmetrization.
//! * [`schmidt`]: symmetric partial trace, Schmidt decomposition, projector
//!   rank checks.
//! * [`correlations`]: operator-expansion correlators and CHSH maximization.
//! * [`behaviors`]: n-party behaviors, Svetlichny-type functionals, local
//!   and quantum bounds, the S₂ = 3 box.
//! * [`exclusivity`]: events, exclusivity, two-copy products and the
//!   exclusivity-principle bound.
//! * [`cli`]: the `indist` command-line front end.

pub mod behaviors;
pub mod cli;
pub mod correlations;
pub mod error;
pub mod exclusivity;
pub mod numerics;
pub mod optimize;
pub mod schmidt;
pub mod symstate;

pub use error::{Error, Result};
