//! Presymplectic and contact checks on polynomial forms.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::chart::Chart;
use super::fields::{differential, exterior_derivative, Form};
use super::poly::Poly;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Serialize)]
pub struct PresymplecticReport {
    pub closed: bool,
    pub closedness_residual: f64,
    pub kernel_ranks: Vec<usize>,
    pub kernel_rank_constant: bool,
    pub image_ranks: Vec<usize>,
    pub image_rank_constant: bool,
}

impl PresymplecticReport {
    pub fn is_presymplectic(&self) -> bool {
        self.closed && self.kernel_rank_constant && self.image_rank_constant
    }
}

/// Matrix of `ω♭: X ↦ i_X ω` at `x`; column `i` holds `i_{∂ᵢ} ω`.
pub fn flat_matrix(chart: &Chart, omega: &Form, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(omega.matrix_at(chart, x)?.transpose())
}

/// Closedness as an exact identity, plus kernel and image ranks of `ω♭`
/// at each sample.
pub fn presymplectic_check(chart: &Chart, omega: &Form, samples: &[Vec<f64>], tol: f64) -> Result<PresymplecticReport> {
    if omega.degree() != 2 {
        return Err(Error::UnsupportedDegree(omega.degree()));
    }
    let dw = exterior_derivative(chart, omega)?;
    let closedness_residual = dw.residual(chart);
    let mut kernel_ranks = Vec::with_capacity(samples.len());
    let mut image_ranks = Vec::with_capacity(samples.len());
    for x in samples {
        let m = flat_matrix(chart, omega, x)?;
        let r = linalg::rank(&m, tol, 0.0);
        image_ranks.push(r);
        kernel_ranks.push(chart.dim() - r);
    }
    let constant = |v: &[usize]| v.windows(2).all(|w| w[0] == w[1]);
    Ok(PresymplecticReport {
        closed: closedness_residual <= tol,
        closedness_residual,
        kernel_rank_constant: constant(&kernel_ranks),
        image_rank_constant: constant(&image_ranks),
        kernel_ranks,
        image_ranks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketValue {
    pub value: f64,
    /// Change of `df(X_g)` when `X_g` moves along `ker ω♭`.
    pub invariance_residual: f64,
    /// `|{f,g} + {g,f}|`.
    pub antisymmetry_residual: f64,
}

/// Solves `ω♭(X) = dh(x)`, failing when `dh(x)` misses the image.
fn hamiltonian_vector(m: &DMatrix<f64>, dh: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(dh.len(), 1, dh.as_slice());
    let sol = linalg::lstsq(m, &rhs, tol, 0.0);
    let residual = (m * &sol - &rhs).norm();
    let scale = dh.norm().max(linalg::sigma_max(m)).max(1.0);
    if residual > tol * scale {
        return Err(Error::Inadmissible { residual });
    }
    Ok(sol.column(0).into_owned())
}

/// `{f, g}_ω(x) = df(X_g)` where `ω♭(X_g) = dg`.
pub fn presymplectic_bracket(chart: &Chart, omega: &Form, f: &Poly, g: &Poly, x: &[f64], tol: f64) -> Result<BracketValue> {
    let m = flat_matrix(chart, omega, x)?;
    let df = DVector::from_vec(differential(chart, f).eval(chart, x));
    let dg = DVector::from_vec(differential(chart, g).eval(chart, x));
    let xg = hamiltonian_vector(&m, &dg, tol)?;
    let xf = hamiltonian_vector(&m, &df, tol)?;
    let value = df.dot(&xg);
    let kernel = linalg::kernel(&m, tol, 0.0);
    let mut invariance_residual: f64 = 0.0;
    for k in kernel.column_iter() {
        invariance_residual = invariance_residual.max((df.dot(&(&xg + k)) - value).abs());
    }
    let antisymmetry_residual = (value + dg.dot(&xf)).abs();
    let scale = df.norm().max(dg.norm()).max(1.0) * xg.norm().max(xf.norm()).max(1.0);
    if invariance_residual > tol * scale {
        return Err(Error::Assertion(format!(
            "bracket depends on the Hamiltonian representative ({invariance_residual:.3e})"
        )));
    }
    if antisymmetry_residual > tol * scale {
        return Err(Error::Assertion(format!(
            "bracket is not antisymmetric ({antisymmetry_residual:.3e})"
        )));
    }
    Ok(BracketValue {
        value,
        invariance_residual,
        antisymmetry_residual,
    })
}

/// The unique `X` with `ξ(X) = 1` and `i_X dξ = 0` at `x`.
pub fn reeb_vector(chart: &Chart, xi: &Form, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    if xi.degree() != 1 {
        return Err(Error::UnsupportedDegree(xi.degree()));
    }
    let dxi = exterior_derivative(chart, xi)?;
    let m = flat_matrix(chart, &dxi, x)?;
    let kernel = linalg::kernel(&m, tol, 0.0);
    if kernel.ncols() != 1 {
        return Err(Error::NotContactPoint { rank: kernel.ncols() });
    }
    let v = kernel.column(0).into_owned();
    let xi_x = DVector::from_vec(xi.eval(chart, x));
    let s = xi_x.dot(&v);
    if s.abs() <= tol * xi_x.norm().max(1.0) {
        return Err(Error::Invalid("the 1-form vanishes on the kernel of its differential".into()));
    }
    Ok((v / s).iter().copied().collect())
}
