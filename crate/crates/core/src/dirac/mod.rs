//! Linear partial Dirac structures: certification and the standard constructions.

mod tensors;
mod transport;

pub use tensors::{ClassifyReport, InducedTensors, KernelReport, Predicates};
pub use transport::{dual_map, pullback, pullback_map, pushforward, pushforward_map, DualMap};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::PontryaginSpace;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Certified,
    IsotropicOnly,
    Rejected,
}

/// Hypotheses whose failure explains a non-certified construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    #[serde(rename = "biannihilator condition fails")]
    BiannihilatorConditionFails,
    #[serde(rename = "separation hypothesis fails")]
    SeparationHypothesisFails,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::BiannihilatorConditionFails => write!(f, "biannihilator condition fails"),
            Hypothesis::SeparationHypothesisFails => write!(f, "separation hypothesis fails"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub isotropy_residual: f64,
    /// Mutual projection residual between `D` and `D⊥`.
    pub orthogonal_residual: f64,
    pub dim_d: usize,
    pub dim_d_perp: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biannihilator_condition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_surjective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_hypothesis: Option<Hypothesis>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearDirac {
    #[serde(skip)]
    space: PontryaginSpace,
    #[serde(rename = "D")]
    d: Subspace,
    #[serde(rename = "D_perp")]
    d_perp: Subspace,
    status: Status,
    diagnostics: Diagnostics,
}

impl LinearDirac {
    pub fn space(&self) -> &PontryaginSpace {
        &self.space
    }

    pub fn subspace(&self) -> &Subspace {
        &self.d
    }

    pub fn orthogonal(&self) -> &Subspace {
        &self.d_perp
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    pub(crate) fn require_certified(&self, what: &str) -> Result<()> {
        if self.is_certified() {
            Ok(())
        } else {
            Err(Error::Uncertified(format!("{what} requires a certified structure, got {:?}", self.status)))
        }
    }

    /// Whether `span(D ∪ {v})` is still isotropic.
    pub fn extension_is_isotropic(&self, v: &[f64]) -> Result<bool> {
        let mut vecs = self.d.basis_vectors();
        vecs.push(v.to_vec());
        let ext = Subspace::span(&vecs, self.space.ambient_dim(), self.space.tol())?;
        Ok(self.space.isotropy_residual(&ext)? <= self.space.isotropy_tol())
    }
}

/// Certifies `D` against its `⟨⟨·,·⟩⟩`-orthogonal.
pub fn verify_dirac(d: &Subspace, space: &PontryaginSpace) -> Result<LinearDirac> {
    let d_perp = space.big_orthogonal(d)?;
    let isotropy_residual = space.isotropy_residual(d)?;
    let a = d.containment_residual(&d_perp)?;
    let b = d_perp.containment_residual(d)?;
    let orthogonal_residual = a.max(b);
    let isotropic = isotropy_residual <= space.isotropy_tol();
    let status = if isotropic && d.dim() == d_perp.dim() && orthogonal_residual <= d.equality_tol() {
        Status::Certified
    } else if isotropic && d.dim() < d_perp.dim() {
        Status::IsotropicOnly
    } else {
        Status::Rejected
    };
    Ok(LinearDirac {
        space: space.clone(),
        diagnostics: Diagnostics {
            isotropy_residual,
            orthogonal_residual,
            dim_d: d.dim(),
            dim_d_perp: d_perp.dim(),
            biannihilator_condition: None,
            separation_holds: None,
            map_surjective: None,
            failed_hypothesis: None,
        },
        d: d.clone(),
        d_perp,
        status,
    })
}

/// Residual of `⟨Qu, v⟩ + ⟨Qv, u⟩` for `Q : E → E♭` given as a
/// `dim_eflat x dim_e` matrix.
pub fn flat_skew_residual(q: &DMatrix<f64>, space: &PontryaginSpace) -> f64 {
    let s = q.transpose() * space.pairing();
    linalg::max_abs(&(&s + s.transpose()))
}

/// Residual of `⟨α, Pβ⟩ + ⟨β, Pα⟩` for `P : E♭ → E` given as a
/// `dim_e x dim_eflat` matrix.
pub fn sharp_skew_residual(p: &DMatrix<f64>, space: &PontryaginSpace) -> f64 {
    let s = space.pairing() * p;
    linalg::max_abs(&(&s + s.transpose()))
}

fn skew_tol(map: &DMatrix<f64>, space: &PontryaginSpace) -> f64 {
    space.tol() * space.scale() * linalg::sigma_max(map).max(1.0)
}

/// `D_Q^F = {(u, Q u + ξ) : u ∈ F, ξ ∈ F⁰}`.
pub fn construct_graph_flat(
    q: Option<&DMatrix<f64>>,
    f: Option<&Subspace>,
    space: &PontryaginSpace,
) -> Result<LinearDirac> {
    let n = space.dim_e();
    let m = space.dim_eflat();
    let zero = DMatrix::zeros(m, n);
    let q = q.unwrap_or(&zero);
    if q.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "Q has shape {:?}, expected ({m}, {n})",
            q.shape()
        )));
    }
    let residual = flat_skew_residual(q, space);
    if residual > skew_tol(q, space) {
        return Err(Error::NotSkew { residual });
    }
    let full = Subspace::full(n, space.tol());
    let f = f.unwrap_or(&full);
    if f.ambient_dim() != n {
        return Err(Error::NotInE { residual: f64::INFINITY });
    }
    let ann = space.partial_annihilator(f)?;
    let mut cols = DMatrix::zeros(n + m, f.dim() + ann.dim());
    cols.view_mut((0, 0), (n, f.dim())).copy_from(f.basis());
    cols.view_mut((n, 0), (m, f.dim())).copy_from(&(q * f.basis()));
    cols.view_mut((n, f.dim()), (m, ann.dim())).copy_from(ann.basis());
    let d = Subspace::from_columns(&cols, space.tol(), 1.0);
    let bi = space.biannihilator(f)?;
    let mut out = verify_dirac(&d, space)?;
    out.diagnostics.biannihilator_condition = Some(bi.holds);
    if !out.is_certified() && !bi.holds {
        out.diagnostics.failed_hypothesis = Some(Hypothesis::BiannihilatorConditionFails);
    }
    Ok(out)
}

/// `D_P = {(P α, α) : α ∈ E♭}`.
pub fn construct_graph_sharp(pmap: &DMatrix<f64>, space: &PontryaginSpace) -> Result<LinearDirac> {
    let n = space.dim_e();
    let m = space.dim_eflat();
    if pmap.shape() != (n, m) {
        return Err(Error::DimensionMismatch(format!(
            "Pmap has shape {:?}, expected ({n}, {m})",
            pmap.shape()
        )));
    }
    let residual = sharp_skew_residual(pmap, space);
    if residual > skew_tol(pmap, space) {
        return Err(Error::NotSkew { residual });
    }
    let mut cols = DMatrix::zeros(n + m, m);
    cols.view_mut((0, 0), (n, m)).copy_from(pmap);
    cols.view_mut((n, 0), (m, m)).fill_with_identity();
    let d = Subspace::from_columns(&cols, space.tol(), 1.0);
    let separation = space.separation_kernel().is_zero();
    let surjective = linalg::rank(pmap, space.tol(), 1.0) == n;
    let mut out = verify_dirac(&d, space)?;
    out.diagnostics.separation_holds = Some(separation);
    out.diagnostics.map_surjective = Some(surjective);
    if !out.is_certified() && !separation && !surjective {
        out.diagnostics.failed_hypothesis = Some(Hypothesis::SeparationHypothesisFails);
    }
    Ok(out)
}

/// Dirac structure spanned by explicitly listed vectors of `E ⊕ E♭`.
pub fn construct_explicit(vectors: &[Vec<f64>], space: &PontryaginSpace) -> Result<LinearDirac> {
    let d = Subspace::span(vectors, space.ambient_dim(), space.tol())?;
    verify_dirac(&d, space)
}

/// Block layout `(u₁, u₂, α₁, α₂)` of `(E₁ ⊕ E₂) ⊕ (E₁♭ ⊕ E₂♭)`.
pub fn direct_sum(d1: &LinearDirac, d2: &LinearDirac) -> Result<LinearDirac> {
    d1.require_certified("direct_sum")?;
    d2.require_certified("direct_sum")?;
    let (s1, s2) = (&d1.space, &d2.space);
    let space = s1.direct_sum(s2);
    let (n1, m1) = (s1.dim_e(), s1.dim_eflat());
    let (n2, m2) = (s2.dim_e(), s2.dim_eflat());
    let (k1, k2) = (d1.dim(), d2.dim());
    let mut cols = DMatrix::zeros(space.ambient_dim(), k1 + k2);
    cols.view_mut((0, 0), (n1, k1)).copy_from(&s1.e_block(&d1.d));
    cols.view_mut((n1 + n2, 0), (m1, k1)).copy_from(&s1.eflat_block(&d1.d));
    cols.view_mut((n1, k1), (n2, k2)).copy_from(&s2.e_block(&d2.d));
    cols.view_mut((n1 + n2 + m1, k1), (m2, k2)).copy_from(&s2.eflat_block(&d2.d));
    let d = Subspace::from_columns(&cols, space.tol(), 1.0);
    verify_dirac(&d, &space)
}
