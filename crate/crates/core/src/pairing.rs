//! The partial Pontryagin space `E ⊕ E♭` realised by a pairing matrix.
//!
//! Vectors of the ambient space are laid out as `(u, α)` with `u ∈ E` in the
//! first `dim_e` coordinates and `α` in the `dim_eflat` coordinates of `E♭`.
//! The pairing is `⟨α, u⟩ = αᵀ B u`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;

#[derive(Debug, Clone)]
pub struct PontryaginSpace {
    dim_e: usize,
    b: DMatrix<f64>,
    tol: f64,
    b_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BiannihilatorReport {
    pub biannihilator: Subspace,
    pub holds: bool,
    pub residual: f64,
}

impl PontryaginSpace {
    /// Builds the space from `B` (`dim_eflat x dim_e`); rejects rank-deficient rows.
    pub fn new(b: DMatrix<f64>, tol: f64) -> Result<Self> {
        let r = linalg::rank(&b, tol, 0.0);
        if r != b.nrows() {
            return Err(Error::DegeneratePairing { rank: r, rows: b.nrows() });
        }
        let b_norm = linalg::sigma_max(&b);
        Ok(Self {
            dim_e: b.ncols(),
            b,
            tol,
            b_norm,
        })
    }

    pub fn from_rows(dim_e: usize, rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim_e {
                return Err(Error::DimensionMismatch(format!(
                    "pairing row {i} has length {}, expected {dim_e}",
                    r.len()
                )));
            }
        }
        Self::new(linalg::from_rows(rows, dim_e), tol)
    }

    pub fn full_dual(n: usize, tol: f64) -> Self {
        Self::new(DMatrix::identity(n, n), tol).expect("identity pairing is non-degenerate")
    }

    /// `E♭` spanned by the listed coordinate functionals.
    pub fn coordinate_dual(n: usize, indices: &[usize], tol: f64) -> Result<Self> {
        let mut b = DMatrix::zeros(indices.len(), n);
        for (r, &i) in indices.iter().enumerate() {
            if i >= n {
                return Err(Error::DimensionMismatch(format!("index {i} out of range {n}")));
            }
            b[(r, i)] = 1.0;
        }
        Self::new(b, tol)
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn dim_eflat(&self) -> usize {
        self.b.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim_e + self.dim_eflat()
    }

    pub fn pairing(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Scale used for isotropy and skewness thresholds.
    pub fn scale(&self) -> f64 {
        self.b_norm.max(1.0)
    }

    pub fn isotropy_tol(&self) -> f64 {
        self.tol * self.scale()
    }

    pub fn is_full_dual(&self) -> bool {
        self.dim_eflat() == self.dim_e
    }

    /// `⟨α, u⟩`.
    pub fn pair(&self, alpha: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (alpha.transpose() * &self.b * u)[(0, 0)]
    }

    /// Gram matrix of `⟨⟨·,·⟩⟩` on `E ⊕ E♭`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.dim_e;
        let m = self.dim_eflat();
        let mut g = DMatrix::zeros(n + m, n + m);
        g.view_mut((0, n), (n, m)).copy_from(&self.b.transpose());
        g.view_mut((n, 0), (m, n)).copy_from(&self.b);
        g
    }

    pub fn big_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let (u, a) = self.split(x);
        let (v, b) = self.split(y);
        self.pair(&a, &v) + self.pair(&b, &u)
    }

    pub fn split(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (
            x.rows(0, self.dim_e).into_owned(),
            x.rows(self.dim_e, self.dim_eflat()).into_owned(),
        )
    }

    pub fn join(&self, u: &DVector<f64>, alpha: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.ambient_dim());
        x.rows_mut(0, self.dim_e).copy_from(u);
        x.rows_mut(self.dim_e, self.dim_eflat()).copy_from(alpha);
        x
    }

    fn check(&self, s: &Subspace, expected: usize, what: &str) -> Result<()> {
        if s.ambient_dim() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{what} lives in dimension {}, expected {expected}",
                s.ambient_dim()
            )));
        }
        Ok(())
    }

    /// `X⁰ = {α ∈ E♭ : ⟨α, u⟩ = 0 for all u ∈ X}` in `E♭` coordinates.
    pub fn partial_annihilator(&self, x: &Subspace) -> Result<Subspace> {
        self.check(x, self.dim_e, "X")?;
        let m = self.dim_eflat();
        if x.is_zero() {
            return Ok(Subspace::full(m, self.tol));
        }
        let constraints = (&self.b * x.basis()).transpose();
        let k = linalg::kernel(&constraints, self.tol, self.b_norm);
        Ok(Subspace::from_columns(&k, self.tol, 1.0))
    }

    /// `A^ann ∩ E = {u ∈ E : ⟨α, u⟩ = 0 for all α ∈ A}` for `A ⊆ E♭`.
    pub fn annihilator_in_e(&self, a: &Subspace) -> Result<Subspace> {
        self.check(a, self.dim_eflat(), "A")?;
        if a.is_zero() {
            return Ok(Subspace::full(self.dim_e, self.tol));
        }
        let constraints = a.basis().transpose() * &self.b;
        let k = linalg::kernel(&constraints, self.tol, self.b_norm);
        Ok(Subspace::from_columns(&k, self.tol, 1.0))
    }

    /// `(E♭)^ann ∩ E`, the vectors invisible to every available functional.
    pub fn separation_kernel(&self) -> Subspace {
        self.annihilator_in_e(&Subspace::full(self.dim_eflat(), self.tol))
            .expect("dimensions agree by construction")
    }

    /// `(X⁰)^ann ∩ E` together with whether it is contained in `X`.
    pub fn biannihilator(&self, x: &Subspace) -> Result<BiannihilatorReport> {
        let ann = self.partial_annihilator(x)?;
        let bi = self.annihilator_in_e(&ann)?;
        let residual = bi.containment_residual(x)?;
        Ok(BiannihilatorReport {
            holds: residual <= x.equality_tol(),
            residual,
            biannihilator: bi,
        })
    }

    /// `D⊥` for the symmetric form `⟨⟨·,·⟩⟩`.
    pub fn big_orthogonal(&self, d: &Subspace) -> Result<Subspace> {
        self.check(d, self.ambient_dim(), "D")?;
        if d.is_zero() {
            return Ok(Subspace::full(self.ambient_dim(), self.tol));
        }
        let constraints = d.basis().transpose() * self.gram();
        let k = linalg::kernel(&constraints, self.tol, self.b_norm);
        Ok(Subspace::from_columns(&k, self.tol, 1.0))
    }

    /// Largest `|⟨⟨d_i, d_j⟩⟩|` over the orthonormal basis of `D`.
    pub fn isotropy_residual(&self, d: &Subspace) -> Result<f64> {
        self.check(d, self.ambient_dim(), "D")?;
        let g = d.basis().transpose() * self.gram() * d.basis();
        Ok(linalg::max_abs(&g))
    }

    /// `X ⊕ 0` inside `E ⊕ E♭`.
    pub fn embed_e(&self, x: &Subspace) -> Result<Subspace> {
        self.check(x, self.dim_e, "X")?;
        let mut m = DMatrix::zeros(self.ambient_dim(), x.dim());
        m.view_mut((0, 0), (self.dim_e, x.dim())).copy_from(x.basis());
        Ok(Subspace::from_columns(&m, self.tol, 1.0))
    }

    /// `0 ⊕ A` inside `E ⊕ E♭`.
    pub fn embed_eflat(&self, a: &Subspace) -> Result<Subspace> {
        self.check(a, self.dim_eflat(), "A")?;
        let mut m = DMatrix::zeros(self.ambient_dim(), a.dim());
        m.view_mut((self.dim_e, 0), (self.dim_eflat(), a.dim())).copy_from(a.basis());
        Ok(Subspace::from_columns(&m, self.tol, 1.0))
    }

    /// Upper block (E part) of the basis of `D`.
    pub fn e_block(&self, d: &Subspace) -> DMatrix<f64> {
        d.basis().rows(0, self.dim_e).into_owned()
    }

    /// Lower block (E♭ part) of the basis of `D`.
    pub fn eflat_block(&self, d: &Subspace) -> DMatrix<f64> {
        d.basis().rows(self.dim_e, self.dim_eflat()).into_owned()
    }

    /// `p(D)`.
    pub fn project_e(&self, d: &Subspace) -> Result<Subspace> {
        self.check(d, self.ambient_dim(), "D")?;
        Ok(Subspace::from_columns(&self.e_block(d), self.tol, 1.0))
    }

    /// `p♭(D)`.
    pub fn project_eflat(&self, d: &Subspace) -> Result<Subspace> {
        self.check(d, self.ambient_dim(), "D")?;
        Ok(Subspace::from_columns(&self.eflat_block(d), self.tol, 1.0))
    }

    /// `D ∩ E`, returned in `E` coordinates.
    pub fn intersect_e(&self, d: &Subspace) -> Result<Subspace> {
        self.check(d, self.ambient_dim(), "D")?;
        if d.is_zero() {
            return Ok(Subspace::zero(self.dim_e, self.tol));
        }
        let k = linalg::kernel(&self.eflat_block(d), self.tol, 1.0);
        Ok(Subspace::from_columns(&(self.e_block(d) * k), self.tol, 1.0))
    }

    /// `D ∩ E♭`, returned in `E♭` coordinates.
    pub fn intersect_eflat(&self, d: &Subspace) -> Result<Subspace> {
        self.check(d, self.ambient_dim(), "D")?;
        if d.is_zero() {
            return Ok(Subspace::zero(self.dim_eflat(), self.tol));
        }
        let k = linalg::kernel(&self.e_block(d), self.tol, 1.0);
        Ok(Subspace::from_columns(&(self.eflat_block(d) * k), self.tol, 1.0))
    }

    /// Pairing matrix of the direct sum, `B₁ ⊕ B₂`.
    pub fn direct_sum(&self, other: &PontryaginSpace) -> PontryaginSpace {
        PontryaginSpace::new(linalg::block_diag(&self.b, &other.b), self.tol)
            .expect("block diagonal of full-row-rank blocks has full row rank")
    }
}
