//! Polynomial exterior calculus on chart domains.

pub mod algebroid;
pub mod chart;
pub mod dirac_field;
pub mod fields;
pub mod numeric;
pub mod poly;
pub mod presymplectic;

pub use algebroid::{LocalAlgebroid, Section};
pub use chart::{Chart, CoordKind};
pub use dirac_field::{DiracField, InvolutivityReport, Verdict};
pub use fields::{Bivector, Form, VectorField};
pub use poly::Poly;
