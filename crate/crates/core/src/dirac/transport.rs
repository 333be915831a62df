//! Pullback along injective maps and pushforward along surjective maps.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{verify_dirac, LinearDirac};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::PontryaginSpace;
use crate::subspace::Subspace;

/// The transpose `φ*: E₂♭ → E₁♭` of `φ: E₁ → E₂` in `E♭` coordinates,
/// together with the residual of the compatibility condition.
#[derive(Debug, Clone, Serialize)]
pub struct DualMap {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    /// Distance of `φ*(E₂♭)` from `E₁♭` inside `E₁′` (containment only).
    pub containment_residual: f64,
    /// Distance of `E₁♭` from `φ*(E₂♭)` (the reverse containment).
    pub reverse_residual: f64,
}

impl DualMap {
    /// `rowspace(B₂ φ) ⊆ rowspace(B₁)`.
    pub fn contained(&self, tol: f64) -> bool {
        self.containment_residual <= tol
    }

    /// `rowspace(B₂ φ) = rowspace(B₁)`.
    pub fn equal(&self, tol: f64) -> bool {
        self.containment_residual <= tol && self.reverse_residual <= tol
    }
}

/// Computes `φ*` and how well `φ*(E₂♭)` matches `E₁♭` as subspaces of `E₁′`.
pub fn dual_map(phi: &DMatrix<f64>, s1: &PontryaginSpace, s2: &PontryaginSpace) -> Result<DualMap> {
    if phi.shape() != (s2.dim_e(), s1.dim_e()) {
        return Err(Error::DimensionMismatch(format!(
            "map has shape {:?}, expected ({}, {})",
            phi.shape(),
            s2.dim_e(),
            s1.dim_e()
        )));
    }
    let tol = s1.tol();
    // Functionals on E₁ as columns: B₁ᵀ spans E₁♭, (B₂ φ)ᵀ spans φ*(E₂♭).
    let b1t = s1.pairing().transpose();
    let pulled = (s2.pairing() * phi).transpose();
    let row1 = Subspace::from_columns(&b1t, tol, 0.0);
    let row2 = Subspace::from_columns(&pulled, tol, linalg::sigma_max(s2.pairing()) * linalg::sigma_max(phi));
    let containment_residual = row2.containment_residual(&row1)?;
    let reverse_residual = row1.containment_residual(&row2)?;
    let matrix = linalg::lstsq(&b1t, &pulled, tol, 0.0);
    Ok(DualMap {
        matrix,
        containment_residual,
        reverse_residual,
    })
}

/// `φ!(D₂) = {(u₁, φ*α₂) : (φ u₁, α₂) ∈ D₂}` on `space1`.
pub fn pullback(phi: &DMatrix<f64>, d2: &LinearDirac, space1: &PontryaginSpace) -> Result<LinearDirac> {
    let s2 = d2.space();
    let tol = space1.tol();
    let n1 = space1.dim_e();
    let r = linalg::rank(phi, tol, 0.0);
    if r != n1 {
        return Err(Error::NotInjective { rank: r, dim: n1 });
    }
    let dual = dual_map(phi, space1, s2)?;
    if !dual.equal(space1.equality_tol_scaled()) {
        return Err(Error::DualIncompatible {
            residual: dual.containment_residual.max(dual.reverse_residual),
        });
    }
    let d = pullback_map(phi, &dual.matrix, d2, space1)?;
    verify_dirac(&d, space1)
}

/// The defining linear solve of the pullback without precondition checks.
pub fn pullback_map(
    phi: &DMatrix<f64>,
    phi_dual: &DMatrix<f64>,
    d2: &LinearDirac,
    space1: &PontryaginSpace,
) -> Result<Subspace> {
    let s2 = d2.space();
    let n1 = space1.dim_e();
    let m1 = space1.dim_eflat();
    let u2 = s2.e_block(d2.subspace());
    let a2 = s2.eflat_block(d2.subspace());
    let scale = linalg::sigma_max(phi).max(1.0);
    let lhs = linalg::hstack(&[phi, &(-&u2)]);
    let k = linalg::kernel(&lhs, space1.tol(), scale);
    let us = k.rows(0, n1).into_owned();
    let cs = k.rows(n1, d2.dim()).into_owned();
    let mut cols = DMatrix::zeros(n1 + m1, k.ncols());
    cols.view_mut((0, 0), (n1, k.ncols())).copy_from(&us);
    cols.view_mut((n1, 0), (m1, k.ncols())).copy_from(&(phi_dual * a2 * cs));
    Ok(Subspace::from_columns(&cols, space1.tol(), 1.0))
}

/// `φ_!(D₁) = {(φ u₁, α₂) : (u₁, φ*α₂) ∈ D₁}` on `space2`.
pub fn pushforward(phi: &DMatrix<f64>, d1: &LinearDirac, space2: &PontryaginSpace) -> Result<LinearDirac> {
    let s1 = d1.space();
    let tol = space2.tol();
    let n2 = space2.dim_e();
    let r = linalg::rank(phi, tol, 0.0);
    if r != n2 {
        return Err(Error::NotSurjective { rank: r, dim: n2 });
    }
    let dual = dual_map(phi, s1, space2)?;
    if !dual.contained(space2.equality_tol_scaled()) {
        return Err(Error::DualIncompatible {
            residual: dual.containment_residual,
        });
    }
    let d = pushforward_map(phi, &dual.matrix, d1, space2)?;
    verify_dirac(&d, space2)
}

/// The defining linear solve of the pushforward without precondition checks.
pub fn pushforward_map(
    phi: &DMatrix<f64>,
    phi_dual: &DMatrix<f64>,
    d1: &LinearDirac,
    space2: &PontryaginSpace,
) -> Result<Subspace> {
    let s1 = d1.space();
    let n2 = space2.dim_e();
    let m2 = space2.dim_eflat();
    let u1 = s1.e_block(d1.subspace());
    let a1 = s1.eflat_block(d1.subspace());
    let k1 = d1.dim();
    let scale = linalg::sigma_max(phi_dual).max(1.0);
    let lhs = linalg::hstack(&[&a1, &(-phi_dual)]);
    let k = linalg::kernel(&lhs, space2.tol(), scale);
    let cs = k.rows(0, k1).into_owned();
    let alphas = k.rows(k1, m2).into_owned();
    let mut cols = DMatrix::zeros(n2 + m2, k.ncols());
    cols.view_mut((0, 0), (n2, k.ncols())).copy_from(&(phi * u1 * cs));
    cols.view_mut((n2, 0), (m2, k.ncols())).copy_from(&alphas);
    Ok(Subspace::from_columns(&cols, space2.tol(), 1.0))
}

impl PontryaginSpace {
    /// Residual threshold for subspace comparisons made in this space.
    pub fn equality_tol_scaled(&self) -> f64 {
        crate::subspace::EQUALITY_FACTOR * self.tol()
    }
}
