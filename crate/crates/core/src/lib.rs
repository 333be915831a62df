//! Computable partial Dirac structures.
//!
//! Linear algebra over a partial Pontryagin space `E ⊕ E♭`, certification and
//! transport of linear Dirac structures, polynomial Courant calculus on chart
//! domains, and implicit Hamiltonian simulation of constrained systems.

pub mod calculus;
pub mod dirac;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod mechanics;
pub mod pairing;
pub mod schema;
pub mod subspace;

pub use error::{Error, Result};
pub use pairing::PontryaginSpace;
pub use subspace::{Subspace, DEFAULT_TOL};
