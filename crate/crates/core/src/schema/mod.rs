//! JSON input formats and their conversion into library objects.
//!
//! Deserialisation rejects unknown keys. Conversion reports structural
//! problems as [`SpecError::Schema`] with a JSON pointer, and passes library
//! precondition failures through as [`SpecError::Domain`].

mod field;
mod linear;
mod system;

use nalgebra::DMatrix;

use crate::error::Error;

pub use field::{chart_for, FieldKind, PolyFieldJson, SectionJson};
pub use linear::{Construct, ConstructionSpec, SequenceSpec, SpaceSpec};
pub use system::{BracketSpec, CustomSystemSpec, DiracFieldSpec, SimulationSetup, SystemSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    Schema { pointer: String, message: String },
    Domain(Error),
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::Schema { pointer, message } => write!(f, "{pointer}: {message}"),
            SpecError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<Error> for SpecError {
    fn from(e: Error) -> Self {
        SpecError::Domain(e)
    }
}

pub type SpecResult<T> = std::result::Result<T, SpecError>;

pub(crate) fn schema_err(pointer: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Dense matrix from rows, requiring `ncols` entries per row.
pub(crate) fn matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, pointer: &str) -> SpecResult<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(schema_err(pointer, format!("expected {nrows} rows, got {}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(schema_err(
                format!("{pointer}/{i}"),
                format!("expected {ncols} entries, got {}", r.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Matrix whose shape is read off the rows; all rows must agree in length.
pub(crate) fn ragged_check(rows: &[Vec<f64>], pointer: &str) -> SpecResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    matrix(rows, rows.len(), ncols, pointer)
}
