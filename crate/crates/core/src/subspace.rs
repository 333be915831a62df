//! Linear subspaces of a real coordinate space, stored by orthonormal basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Containment and equality are decided with a residual bound of this many
/// rank tolerances.
pub const EQUALITY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
    tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubspaceJson {
    pub ambient: usize,
    pub basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Span of the given vectors with a purely relative rank cutoff.
    pub fn span(vectors: &[Vec<f64>], ambient: usize, tol: f64) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "vector {i} has length {}, expected {ambient}",
                    v.len()
                )));
            }
        }
        let m = DMatrix::from_fn(ambient, vectors.len(), |i, j| vectors[j][i]);
        Ok(Self::from_columns(&m, tol, 0.0))
    }

    /// Column span of `m`; `reference` sets an absolute floor for the rank cutoff.
    pub fn from_columns(m: &DMatrix<f64>, tol: f64, reference: f64) -> Self {
        Self {
            ambient: m.nrows(),
            basis: linalg::column_basis(m, tol, reference),
            tol,
        }
    }

    /// Wraps columns that are already orthonormal.
    pub(crate) fn from_orthonormal(basis: DMatrix<f64>, tol: f64) -> Self {
        Self {
            ambient: basis.nrows(),
            basis,
            tol,
        }
    }

    pub fn zero(ambient: usize, tol: f64) -> Self {
        Self::from_orthonormal(DMatrix::zeros(ambient, 0), tol)
    }

    pub fn full(ambient: usize, tol: f64) -> Self {
        Self::from_orthonormal(DMatrix::identity(ambient, ambient), tol)
    }

    /// Span of the selected standard basis vectors.
    pub fn coordinate(ambient: usize, indices: &[usize], tol: f64) -> Self {
        let mut m = DMatrix::zeros(ambient, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        Self::from_columns(&m, tol, 1.0)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Orthonormal basis as columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        self.basis
            .column_iter()
            .map(|c| c.iter().cloned().collect())
            .collect()
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimensions {} and {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Distance from `v` to the subspace.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Largest distance of a column of `m` to the subspace.
    pub fn residual_columns(&self, m: &DMatrix<f64>) -> f64 {
        let proj = &self.basis * (self.basis.transpose() * m);
        linalg::max_column_norm(&(m - proj))
    }

    pub fn equality_tol(&self) -> f64 {
        EQUALITY_FACTOR * self.tol
    }

    /// Residual of `self ⊆ other`: the worst distance of a unit vector of
    /// `self` to `other`.
    pub fn containment_residual(&self, other: &Subspace) -> Result<f64> {
        self.check_ambient(other)?;
        Ok(other.residual_columns(&self.basis))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        Ok(self.containment_residual(other)? <= self.equality_tol())
    }

    /// Symmetric residual; zero exactly when both containments hold.
    pub fn equality_residual(&self, other: &Subspace) -> Result<f64> {
        let a = self.containment_residual(other)?;
        let b = other.containment_residual(self)?;
        let dim_gap = if self.dim() == other.dim() { 0.0 } else { 1.0 };
        Ok(a.max(b).max(dim_gap))
    }

    pub fn equals(&self, other: &Subspace) -> Result<bool> {
        Ok(self.equality_residual(other)? <= self.equality_tol())
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient, self.tol));
        }
        let stacked = linalg::hstack(&[&self.basis, &(-&other.basis)]);
        let k = linalg::kernel(&stacked, self.tol, 1.0);
        let coeffs = k.rows(0, self.dim()).into_owned();
        Ok(Subspace::from_columns(&(&self.basis * coeffs), self.tol, 1.0))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let stacked = linalg::hstack(&[&self.basis, &other.basis]);
        Ok(Subspace::from_columns(&stacked, self.tol, 1.0))
    }

    /// Orthogonal complement in the ambient space (Euclidean).
    pub fn orthogonal_complement(&self) -> Subspace {
        if self.is_zero() {
            return Subspace::full(self.ambient, self.tol);
        }
        let k = linalg::kernel(&self.basis.transpose(), self.tol, 1.0);
        Subspace::from_orthonormal(k, self.tol)
    }

    /// The part of `self` orthogonal to `inner`; used to represent the
    /// quotient `self / inner` when `inner ⊆ self`.
    pub fn complement_within(&self, inner: &Subspace) -> Result<Subspace> {
        self.check_ambient(inner)?;
        if inner.is_zero() {
            return Ok(self.clone());
        }
        let projected = &self.basis - &inner.basis * (inner.basis.transpose() * &self.basis);
        Ok(Subspace::from_columns(&projected, self.tol, 1.0))
    }

    /// Image of the subspace under a linear map given by `m`.
    pub fn image(&self, m: &DMatrix<f64>) -> Result<Subspace> {
        if m.ncols() != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "map has {} columns, subspace ambient is {}",
                m.ncols(),
                self.ambient
            )));
        }
        let reference = linalg::sigma_max(m);
        Ok(Subspace::from_columns(&(m * &self.basis), self.tol, reference))
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            ambient: self.ambient,
            basis: self.basis_vectors(),
        }
    }

    pub fn from_json(j: &SubspaceJson, tol: f64) -> Result<Self> {
        Self::span(&j.basis, j.ambient, tol)
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}
