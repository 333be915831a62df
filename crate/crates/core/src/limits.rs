//! Truncated ascending and projective sequences of linear Dirac structures.
//!
//! Levels are numbered from 1 in every report. A sequence never materialises
//! its limit; validation checks each link and coherence compares the induced
//! forms `Ω_L` across links.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dirac::{self, construct_graph_flat, direct_sum, LinearDirac};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::PontryaginSpace;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Ascending,
    Projective,
}

#[derive(Debug, Clone)]
pub struct DiracSequence {
    kind: SequenceKind,
    levels: Vec<LinearDirac>,
    links: Vec<DMatrix<f64>>,
}

pub const ASCENDING_HEADER: &str =
    "ascending: each link ε_n: E_n → E_(n+1) must satisfy ε_n*(E♭_(n+1)) = E♭_n and D_n = pullback of D_(n+1)";
pub const PROJECTIVE_HEADER: &str = "projective: each link λ_(n+1): E_(n+1) → E_n must satisfy λ*(E♭_n) ⊆ E♭_(n+1); \
the transport condition is read as D_n = pushforward of D_(n+1) along λ_(n+1), the only orientation in which the \
pushforward is defined";

#[derive(Debug, Clone, Serialize)]
pub struct LinkCheck {
    pub lower_level: usize,
    pub upper_level: usize,
    pub dual_ok: bool,
    pub dual_residual: f64,
    pub transport_ok: bool,
    pub transport_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kind: SequenceKind,
    pub header: String,
    pub depth: usize,
    pub links: Vec<LinkCheck>,
    pub valid: bool,
    pub flagged_levels: Vec<usize>,
    pub first_violating_level: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceLink {
    pub lower_level: usize,
    pub upper_level: usize,
    pub omega_residual: f64,
    pub pairing_rule_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub kind: SequenceKind,
    pub links: Vec<CoherenceLink>,
    pub max_omega_residual: f64,
    pub max_pairing_rule_residual: f64,
    pub coherent: bool,
    pub flagged_levels: Vec<usize>,
    /// Top truncation level standing in for the limit.
    pub top_level: usize,
}

impl DiracSequence {
    pub fn new(kind: SequenceKind, levels: Vec<LinearDirac>, links: Vec<DMatrix<f64>>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::Invalid(format!("a sequence needs at least 2 levels, got {}", levels.len())));
        }
        if links.len() + 1 != levels.len() {
            return Err(Error::Invalid(format!(
                "{} levels need {} links, got {}",
                levels.len(),
                levels.len() - 1,
                links.len()
            )));
        }
        for (i, link) in links.iter().enumerate() {
            let lo = levels[i].space().dim_e();
            let hi = levels[i + 1].space().dim_e();
            let (shape, needed) = match kind {
                SequenceKind::Ascending => ((hi, lo), lo),
                SequenceKind::Projective => ((lo, hi), lo),
            };
            if link.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "link {} has shape {:?}, expected {:?}",
                    i + 1,
                    link.shape(),
                    shape
                )));
            }
            let tol = levels[i].space().tol();
            let r = linalg::rank(link, tol, 0.0);
            if r != needed {
                return Err(match kind {
                    SequenceKind::Ascending => Error::NotInjective { rank: r, dim: needed },
                    SequenceKind::Projective => Error::NotSurjective { rank: r, dim: needed },
                });
            }
        }
        Ok(Self { kind, levels, links })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[LinearDirac] {
        &self.levels
    }

    pub fn links(&self) -> &[DMatrix<f64>] {
        &self.links
    }

    /// The first `depth` levels.
    pub fn prefix(&self, depth: usize) -> Result<Self> {
        Self::new(self.kind, self.levels[..depth].to_vec(), self.links[..depth - 1].to_vec())
    }

    fn require_certified(&self) -> Result<()> {
        for (i, l) in self.levels.iter().enumerate() {
            if !l.is_certified() {
                return Err(Error::Uncertified(format!("level {} is {:?}", i + 1, l.status())));
            }
        }
        Ok(())
    }

    fn tol(&self) -> f64 {
        self.levels[0].space().equality_tol_scaled()
    }

    fn check_link(&self, i: usize) -> Result<LinkCheck> {
        let lower = &self.levels[i];
        let upper = &self.levels[i + 1];
        let link = &self.links[i];
        let tol = self.tol();
        let (dual_ok, dual_residual, transport_residual) = match self.kind {
            SequenceKind::Ascending => {
                let dual = dirac::dual_map(link, lower.space(), upper.space())?;
                let res = dual.containment_residual.max(dual.reverse_residual);
                let back = dirac::pullback_map(link, &dual.matrix, upper, lower.space())?;
                (res <= tol, res, back.equality_residual(lower.subspace())?)
            }
            SequenceKind::Projective => {
                let dual = dirac::dual_map(link, upper.space(), lower.space())?;
                let res = dual.containment_residual;
                let fwd = dirac::pushforward_map(link, &dual.matrix, upper, lower.space())?;
                (res <= tol, res, fwd.equality_residual(lower.subspace())?)
            }
        };
        Ok(LinkCheck {
            lower_level: i + 1,
            upper_level: i + 2,
            dual_ok,
            dual_residual,
            transport_ok: transport_residual <= tol,
            transport_residual,
        })
    }

    fn validate(&self, expected: SequenceKind) -> Result<ValidationReport> {
        if self.kind != expected {
            return Err(Error::Invalid(format!("expected a {expected:?} sequence, got {:?}", self.kind)));
        }
        self.require_certified()?;
        let links = (0..self.links.len()).map(|i| self.check_link(i)).collect::<Result<Vec<_>>>()?;
        let failed: Vec<bool> = links.iter().map(|l| !(l.dual_ok && l.transport_ok)).collect();
        let flagged_levels = localize(self.depth(), &failed);
        Ok(ValidationReport {
            kind: self.kind,
            header: match self.kind {
                SequenceKind::Ascending => ASCENDING_HEADER,
                SequenceKind::Projective => PROJECTIVE_HEADER,
            }
            .to_string(),
            depth: self.depth(),
            valid: failed.iter().all(|f| !f),
            first_violating_level: flagged_levels.first().copied(),
            flagged_levels,
            links,
        })
    }

    pub fn validate_ascending(&self) -> Result<ValidationReport> {
        self.validate(SequenceKind::Ascending)
    }

    pub fn validate_projective(&self) -> Result<ValidationReport> {
        self.validate(SequenceKind::Projective)
    }

    pub fn validate_any(&self) -> Result<ValidationReport> {
        self.validate(self.kind)
    }

    /// Compares `Ω_L` across every link and checks the pairing rule
    /// `⟨ε*α, u⟩ = ⟨α, ε u⟩` (resp. `⟨λ*α, u⟩ = ⟨α, λ u⟩`).
    ///
    /// Requires certified levels and compatible partial duals; the transport
    /// condition itself is not required, so a level whose form is off is
    /// reported here as well as by validation.
    pub fn coherence_report(&self) -> Result<CoherenceReport> {
        self.require_certified()?;
        let tol = self.tol();
        let tensors = self.levels.iter().map(|l| l.induced_tensors()).collect::<Result<Vec<_>>>()?;
        let mut links = Vec::new();
        for (i, link) in self.links.iter().enumerate() {
            let lower = &self.levels[i];
            let upper = &self.levels[i + 1];
            let (omega_residual, pairing_rule_residual) = match self.kind {
                SequenceKind::Ascending => {
                    let dual = dirac::dual_map(link, lower.space(), upper.space())?;
                    let res = dual.containment_residual.max(dual.reverse_residual);
                    if res > tol {
                        return Err(Error::DualIncompatible { residual: res });
                    }
                    let l = tensors[i].l.basis();
                    let pushed = link * l;
                    let w_up = tensors[i + 1].omega_ambient();
                    let restricted = pushed.transpose() * w_up * &pushed;
                    let omega_res = linalg::max_abs(&(restricted - &tensors[i].omega_l));
                    let image = Subspace::from_columns(&pushed, lower.space().tol(), 1.0);
                    let contain = image.containment_residual(&tensors[i + 1].l)?;
                    let rule = dual.matrix.transpose() * lower.space().pairing() - upper.space().pairing() * link;
                    (omega_res.max(contain), linalg::max_abs(&rule))
                }
                SequenceKind::Projective => {
                    let dual = dirac::dual_map(link, upper.space(), lower.space())?;
                    if dual.containment_residual > tol {
                        return Err(Error::DualIncompatible {
                            residual: dual.containment_residual,
                        });
                    }
                    let k = projective_domain(upper, &dual.matrix)?;
                    let kb = k.basis();
                    let down = link * kb;
                    let w_up = tensors[i + 1].omega_ambient();
                    let w_lo = tensors[i].omega_ambient();
                    let lhs = kb.transpose() * w_up * kb;
                    let rhs = down.transpose() * w_lo * &down;
                    let omega_res = linalg::max_abs(&(lhs - rhs));
                    let rule = dual.matrix.transpose() * upper.space().pairing() - lower.space().pairing() * link;
                    (omega_res, linalg::max_abs(&rule))
                }
            };
            links.push(CoherenceLink {
                lower_level: i + 1,
                upper_level: i + 2,
                omega_residual,
                pairing_rule_residual,
            });
        }
        let failed: Vec<bool> = links
            .iter()
            .map(|l| l.omega_residual > tol || l.pairing_rule_residual > tol)
            .collect();
        let max_omega_residual = links.iter().fold(0.0_f64, |m, l| m.max(l.omega_residual));
        let max_pairing_rule_residual = links.iter().fold(0.0_f64, |m, l| m.max(l.pairing_rule_residual));
        Ok(CoherenceReport {
            kind: self.kind,
            coherent: failed.iter().all(|f| !f),
            flagged_levels: localize(self.depth(), &failed),
            links,
            max_omega_residual,
            max_pairing_rule_residual,
            top_level: self.depth(),
        })
    }
}

/// `p(D ∩ (E ⊕ λ*E♭_lower))`, the vectors on which the upper form restricts
/// to the lower one.
fn projective_domain(upper: &LinearDirac, lambda_dual: &DMatrix<f64>) -> Result<Subspace> {
    let sp = upper.space();
    let n = sp.dim_e();
    let m = sp.dim_eflat();
    let img = Subspace::from_columns(lambda_dual, sp.tol(), 1.0);
    let mut cols = DMatrix::zeros(n + m, n + img.dim());
    cols.view_mut((0, 0), (n, n)).fill_with_identity();
    cols.view_mut((n, n), (m, img.dim())).copy_from(img.basis());
    let w = Subspace::from_columns(&cols, sp.tol(), 1.0);
    let inter = upper.subspace().intersect(&w)?;
    sp.project_e(&inter)
}

/// Maps failing links to the levels responsible for them.
///
/// A level is flagged when every link touching it fails. An end level is
/// dropped when its only neighbour is already flagged, since one bad interior
/// level breaks both of its links.
pub fn localize(depth: usize, link_failed: &[bool]) -> Vec<usize> {
    let touching = |lvl: usize| -> Vec<usize> {
        let mut v = Vec::new();
        if lvl > 0 {
            v.push(lvl - 1);
        }
        if lvl + 1 < depth {
            v.push(lvl);
        }
        v
    };
    let mut flagged: Vec<bool> = (0..depth)
        .map(|lvl| {
            let t = touching(lvl);
            !t.is_empty() && t.iter().all(|&j| link_failed[j])
        })
        .collect();
    if depth > 2 {
        if flagged[0] && flagged[1] {
            flagged[0] = false;
        }
        if flagged[depth - 1] && flagged[depth - 2] {
            flagged[depth - 1] = false;
        }
    }
    let mut out: Vec<usize> = (0..depth).filter(|&i| flagged[i]).map(|i| i + 1).collect();
    // A failing link between two unflagged levels is still a violation; blame its upper level.
    for (j, &f) in link_failed.iter().enumerate() {
        if f && !flagged[j] && !flagged[j + 1] {
            out.push(j + 2);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `J = [[0, −1], [1, 0]]` blocks on coordinates `(q₁, p₁, q₂, p₂, …)`.
pub fn block_symplectic(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    for b in 0..n {
        q[(2 * b, 2 * b + 1)] = -1.0;
        q[(2 * b + 1, 2 * b)] = 1.0;
    }
    q
}

fn coordinate_inclusion(lo: usize, hi: usize) -> DMatrix<f64> {
    DMatrix::from_fn(hi, lo, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// `E_n = ℝ²ⁿ`, `D_n` the graph of the block symplectic map, coordinate inclusions.
pub fn block_symplectic_ascending(depth: usize, tol: f64) -> Result<DiracSequence> {
    let mut levels = Vec::new();
    let mut links = Vec::new();
    for n in 1..=depth {
        let space = PontryaginSpace::full_dual(2 * n, tol);
        levels.push(construct_graph_flat(Some(&block_symplectic(n)), None, &space)?);
        if n < depth {
            links.push(coordinate_inclusion(2 * n, 2 * n + 2));
        }
    }
    DiracSequence::new(SequenceKind::Ascending, levels, links)
}

/// Factor structures used by the product sequence, cycling through a
/// symplectic plane, a partial-dual `F ⊕ F⁰`, and `E ⊕ 0` on a line.
pub fn product_factor(index: usize, tol: f64) -> Result<LinearDirac> {
    match index % 3 {
        0 => {
            let q = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            construct_graph_flat(Some(&q), None, &PontryaginSpace::full_dual(2, tol))
        }
        1 => {
            let space = PontryaginSpace::coordinate_dual(3, &[0, 1], tol)?;
            let f = Subspace::coordinate(3, &[1, 2], tol);
            construct_graph_flat(None, Some(&f), &space)
        }
        _ => construct_graph_flat(None, None, &PontryaginSpace::full_dual(1, tol)),
    }
}

/// `Ẽ_n = E₁ ⊕ … ⊕ E_n` with `D̃_n = D₁ ⊕ … ⊕ D_n` and the projections that
/// forget the last factor.
pub fn product_projective(depth: usize, tol: f64) -> Result<DiracSequence> {
    let mut levels: Vec<LinearDirac> = Vec::new();
    let mut links = Vec::new();
    for i in 0..depth {
        let factor = product_factor(i, tol)?;
        let level = match levels.last() {
            None => factor,
            Some(prev) => {
                let lo = prev.space().dim_e();
                let hi = lo + factor.space().dim_e();
                links.push(coordinate_inclusion(lo, hi).transpose());
                direct_sum(prev, &factor)?
            }
        };
        levels.push(level);
    }
    DiracSequence::new(SequenceKind::Projective, levels, links)
}

/// Replaces one level (1-based) by `E ⊕ 0` on the same space.
pub fn with_level_replaced_by_e(seq: &DiracSequence, level: usize) -> Result<DiracSequence> {
    let mut levels = seq.levels.clone();
    let space = levels[level - 1].space().clone();
    levels[level - 1] = construct_graph_flat(None, None, &space)?;
    DiracSequence::new(seq.kind, levels, seq.links.clone())
}

/// Rescales the induced form at one level (1-based) by `factor`, keeping the
/// kernel data: `(u, α) ↦ (u, factor·α)` on the graph part.
pub fn with_level_rescaled(seq: &DiracSequence, level: usize, factor: f64) -> Result<DiracSequence> {
    let mut levels = seq.levels.clone();
    let old = &levels[level - 1];
    let sp = old.space().clone();
    let n = sp.dim_e();
    let mut cols = old.subspace().basis().clone();
    let mut lower = cols.rows_mut(n, sp.dim_eflat());
    lower *= factor;
    let d = Subspace::from_columns(&cols, sp.tol(), 1.0);
    levels[level - 1] = dirac::verify_dirac(&d, &sp)?;
    DiracSequence::new(seq.kind, levels, seq.links.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::DEFAULT_TOL;

    fn constant_sequence(kind: SequenceKind) -> DiracSequence {
        let q = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let d = construct_graph_flat(Some(&q), None, &PontryaginSpace::full_dual(2, DEFAULT_TOL)).unwrap();
        DiracSequence::new(kind, vec![d.clone(); 4], vec![DMatrix::identity(2, 2); 3]).unwrap()
    }

    #[test]
    fn localization_rule() {
        assert_eq!(localize(5, &[false, false, false, false]), Vec::<usize>::new());
        assert_eq!(localize(5, &[true, true, false, false]), vec![2]);
        assert_eq!(localize(5, &[false, true, true, false]), vec![3]);
        assert_eq!(localize(5, &[true, false, false, false]), vec![1]);
        assert_eq!(localize(5, &[false, false, false, true]), vec![5]);
        assert_eq!(localize(2, &[true]), vec![1, 2]);
    }

    #[test]
    fn constant_sequences_validate() {
        let a = constant_sequence(SequenceKind::Ascending);
        assert!(a.validate_ascending().unwrap().valid);
        let c = a.coherence_report().unwrap();
        assert!(c.coherent);
        assert_eq!(c.max_omega_residual, 0.0);
        let p = constant_sequence(SequenceKind::Projective);
        assert!(p.validate_projective().unwrap().valid);
        assert!(p.coherence_report().unwrap().coherent);
        assert!(a.validate_projective().is_err());
    }

    #[test]
    fn block_symplectic_sequence_is_valid_and_coherent() {
        let s = block_symplectic_ascending(5, DEFAULT_TOL).unwrap();
        let v = s.validate_ascending().unwrap();
        assert!(v.valid, "{v:?}");
        let c = s.coherence_report().unwrap();
        assert!(c.max_omega_residual <= 1e-12);
        for depth in 2..=5 {
            assert!(s.prefix(depth).unwrap().validate_ascending().unwrap().valid);
        }
    }

    #[test]
    fn product_sequence_is_valid_and_coherent() {
        let s = product_projective(5, DEFAULT_TOL).unwrap();
        let v = s.validate_projective().unwrap();
        assert!(v.valid, "{v:?}");
        let c = s.coherence_report().unwrap();
        assert!(c.coherent, "{c:?}");
        assert!(c.max_omega_residual <= 1e-12);
    }

    #[test]
    fn replaced_level_is_localized() {
        let s = block_symplectic_ascending(5, DEFAULT_TOL).unwrap();
        for lvl in 1..=5 {
            let bad = with_level_replaced_by_e(&s, lvl).unwrap();
            let v = bad.validate_ascending().unwrap();
            assert!(!v.valid);
            assert_eq!(v.flagged_levels, vec![lvl]);
            assert_eq!(v.first_violating_level, Some(lvl));
        }
    }

    #[test]
    fn rescaled_omega_is_flagged_by_coherence() {
        let s = block_symplectic_ascending(5, DEFAULT_TOL).unwrap();
        let bad = with_level_rescaled(&s, 3, 2.0).unwrap();
        assert!(bad.levels()[2].is_certified());
        let c = bad.coherence_report().unwrap();
        assert!(!c.coherent);
        assert_eq!(c.flagged_levels, vec![3]);
        let p = product_projective(5, DEFAULT_TOL).unwrap();
        let bad = with_level_rescaled(&p, 3, 2.0).unwrap();
        assert_eq!(bad.coherence_report().unwrap().flagged_levels, vec![3]);
        assert_eq!(bad.validate_projective().unwrap().flagged_levels, vec![3]);
    }

    #[test]
    fn dimensions_of_projections_are_monotone() {
        let s = block_symplectic_ascending(4, DEFAULT_TOL).unwrap();
        let dims: Vec<usize> = s.levels().iter().map(|l| l.kernel_report().unwrap().l.dim()).collect();
        assert!(dims.windows(2).all(|w| w[0] <= w[1]));
        let p = product_projective(4, DEFAULT_TOL).unwrap();
        let dims: Vec<usize> = p.levels().iter().map(|l| l.kernel_report().unwrap().lflat.dim()).collect();
        assert!(dims.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pullback_is_transitive() {
        let s = block_symplectic_ascending(3, DEFAULT_TOL).unwrap();
        let composite = &s.links()[1] * &s.links()[0];
        let top = &s.levels()[2];
        let bottom_space = s.levels()[0].space();
        let direct = dirac::pullback(&composite, top, bottom_space).unwrap();
        let middle = dirac::pullback(&s.links()[1], top, s.levels()[1].space()).unwrap();
        let stepwise = dirac::pullback(&s.links()[0], &middle, bottom_space).unwrap();
        assert!(direct.subspace().equals(stepwise.subspace()).unwrap());
    }

    #[test]
    fn shapes_and_ranks_are_checked() {
        let q = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let d = construct_graph_flat(Some(&q), None, &PontryaginSpace::full_dual(2, DEFAULT_TOL)).unwrap();
        assert!(DiracSequence::new(SequenceKind::Ascending, vec![d.clone()], vec![]).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            DiracSequence::new(SequenceKind::Ascending, vec![d.clone(), d.clone()], vec![singular]),
            Err(Error::NotInjective { .. })
        ));
    }
}
