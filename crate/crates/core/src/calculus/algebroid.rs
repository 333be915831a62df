//! Local algebroids `(ℝᵏ, ρ, C)` over a chart and the Courant calculus on
//! pairs `(r, α)` of a section and a dual section.
//!
//! The tangent algebroid (`k = n`, `ρ = id`, `C = 0`) recovers the classical
//! Courant bracket on `TM ⊕ T*M`.

use serde::Serialize;

use super::chart::Chart;
use super::fields::{combinations, Form, VectorField};
use super::poly::Poly;
use crate::error::{Error, Result};

/// A pair `(r, α)`: a section of the algebroid and a section of its dual.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub vector: Vec<Poly>,
    pub form: Vec<Poly>,
}

impl Section {
    pub fn new(vector: Vec<Poly>, form: Vec<Poly>) -> Self {
        Section { vector, form }
    }

    pub fn zero(rank: usize, nvars: usize) -> Self {
        Section {
            vector: vec![Poly::zero(nvars); rank],
            form: vec![Poly::zero(nvars); rank],
        }
    }

    /// Tangent section `(X, α)`.
    pub fn from_fields(x: &VectorField, alpha: &Form) -> Result<Self> {
        if alpha.degree() != 1 || alpha.dim() != x.dim() {
            return Err(Error::DimensionMismatch("section needs a vector field and a 1-form".into()));
        }
        Ok(Section {
            vector: x.comps.clone(),
            form: alpha.components().to_vec(),
        })
    }

    pub fn rank(&self) -> usize {
        self.vector.len()
    }

    pub fn vector_field(&self) -> VectorField {
        VectorField::new(self.vector.clone())
    }

    pub fn one_form(&self) -> Form {
        Form::one_form(self.form.clone())
    }

    pub fn add(&self, other: &Section) -> Section {
        Section {
            vector: self.vector.iter().zip(&other.vector).map(|(a, b)| a + b).collect(),
            form: self.form.iter().zip(&other.form).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Section) -> Section {
        Section {
            vector: self.vector.iter().zip(&other.vector).map(|(a, b)| a - b).collect(),
            form: self.form.iter().zip(&other.form).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Section {
        Section {
            vector: self.vector.iter().map(|a| a.scale(c)).collect(),
            form: self.form.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Largest reduced coefficient of the vector part.
    pub fn vector_residual(&self, chart: &Chart) -> f64 {
        self.vector.iter().map(|p| chart.residual(p)).fold(0.0, f64::max)
    }

    /// Largest reduced coefficient of the form part.
    pub fn form_residual(&self, chart: &Chart) -> f64 {
        self.form.iter().map(|p| chart.residual(p)).fold(0.0, f64::max)
    }

    pub fn residual(&self, chart: &Chart) -> f64 {
        self.vector_residual(chart).max(self.form_residual(chart))
    }
}

/// Anchor `ρ(e_a)` and skew structure field `C(e_a, e_b)` on a trivial bundle.
#[derive(Debug, Clone)]
pub struct LocalAlgebroid {
    chart: Chart,
    anchor: Vec<VectorField>,
    /// `C(e_a, e_b)` for `a < b`, in the order of `combinations(k, 2)`.
    structure: Vec<Vec<Poly>>,
}

impl LocalAlgebroid {
    pub fn tangent(chart: &Chart) -> Self {
        let n = chart.dim();
        LocalAlgebroid {
            chart: chart.clone(),
            anchor: (0..n).map(|i| VectorField::coordinate(chart, i)).collect(),
            structure: vec![vec![chart.zero(); n]; combinations(n, 2).len()],
        }
    }

    /// `anchor[a]` is `ρ(e_a)`; `structure[p]` is `C(e_a, e_b)` for the `p`-th pair `a < b`.
    pub fn new(chart: &Chart, anchor: Vec<VectorField>, structure: Option<Vec<Vec<Poly>>>) -> Result<Self> {
        let k = anchor.len();
        if anchor.iter().any(|v| v.dim() != chart.dim()) {
            return Err(Error::DimensionMismatch("anchor images must be chart vector fields".into()));
        }
        let pairs = combinations(k, 2).len();
        let structure = structure.unwrap_or_else(|| vec![vec![chart.zero(); k]; pairs]);
        if structure.len() != pairs || structure.iter().any(|c| c.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "structure field needs {pairs} pairs of length {k}"
            )));
        }
        Ok(LocalAlgebroid {
            chart: chart.clone(),
            anchor,
            structure,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self) -> &[VectorField] {
        &self.anchor
    }

    fn zero(&self) -> Poly {
        self.chart.zero()
    }

    fn check(&self, s: &Section) -> Result<()> {
        if s.vector.len() != self.rank() || s.form.len() != self.rank() {
            return Err(Error::DimensionMismatch(format!(
                "section of rank ({}, {}) on an algebroid of rank {}",
                s.vector.len(),
                s.form.len(),
                self.rank()
            )));
        }
        Ok(())
    }

    /// `C(e_a, e_b)` for any pair.
    fn c_basis(&self, a: usize, b: usize) -> Option<(usize, f64)> {
        if a == b {
            return None;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let k = self.rank();
        // Position of (lo, hi) among increasing pairs.
        let p = lo * (2 * k - lo - 1) / 2 + (hi - lo - 1);
        Some((p, sign))
    }

    /// `ρ(e_a)(f)`.
    fn rho_basis(&self, a: usize, f: &Poly) -> Poly {
        self.anchor[a].apply(&self.chart, f)
    }

    /// `ρ(s)(f) = Σ sᵃ ρ(e_a)(f)`.
    pub fn rho(&self, s: &[Poly], f: &Poly) -> Poly {
        let mut out = self.zero();
        for (a, sa) in s.iter().enumerate() {
            if !sa.is_zero() {
                out += &(sa * &self.rho_basis(a, f));
            }
        }
        out
    }

    /// `C(s, v) = Σ sᵃ vᵇ C(e_a, e_b)`.
    pub fn structure_map(&self, s: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let k = self.rank();
        let mut out = vec![self.zero(); k];
        for a in 0..k {
            for b in 0..k {
                let Some((p, sign)) = self.c_basis(a, b) else { continue };
                if s[a].is_zero() || v[b].is_zero() {
                    continue;
                }
                let coef = (&s[a] * &v[b]).scale(sign);
                for (o, c) in out.iter_mut().zip(&self.structure[p]) {
                    if !c.is_zero() {
                        *o += &(&coef * c);
                    }
                }
            }
        }
        out
    }

    /// `[s, v]_E = d v(ρ(s)) − d s(ρ(v)) − C(s, v)`.
    pub fn bracket(&self, s: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let c = self.structure_map(s, v);
        (0..self.rank())
            .map(|a| &(&self.rho(s, &v[a]) - &self.rho(v, &s[a])) - &c[a])
            .collect()
    }

    /// `⟨α, s⟩`.
    pub fn pair(&self, alpha: &[Poly], s: &[Poly]) -> Poly {
        let mut out = self.zero();
        for (a, b) in alpha.iter().zip(s) {
            if !a.is_zero() && !b.is_zero() {
                out += &(a * b);
            }
        }
        out
    }

    /// `d_E f`, with components `ρ(e_a)(f)`.
    pub fn d_scalar(&self, f: &Poly) -> Vec<Poly> {
        (0..self.rank()).map(|a| self.rho_basis(a, f)).collect()
    }

    /// `d_E β` with `(d_E β)_{ab} = ρ_a β_b − ρ_b β_a − β([e_a, e_b]_E)`.
    pub fn d_one(&self, beta: &[Poly]) -> Form {
        let k = self.rank();
        let comps = combinations(k, 2)
            .iter()
            .enumerate()
            .map(|(p, ab)| {
                let (a, b) = (ab[0], ab[1]);
                let mut out = &self.rho_basis(a, &beta[b]) - &self.rho_basis(b, &beta[a]);
                // [e_a, e_b]_E = −C(e_a, e_b).
                out += &self.pair(beta, &self.structure[p]);
                out
            })
            .collect();
        Form::from_components(k, 2, comps).expect("pair count")
    }

    /// `L_{ρ(s)} α` via `L_{ρ(s)}α(v) = ρ(s)⟨α, v⟩ − α([s, v]_E)` on the frame.
    pub fn lie_derivative(&self, s: &[Poly], alpha: &[Poly]) -> Vec<Poly> {
        let k = self.rank();
        (0..k)
            .map(|b| {
                let mut out = self.rho(s, &alpha[b]);
                let mut eb = vec![self.zero(); k];
                eb[b] = self.chart.constant(1.0);
                let br = self.bracket(s, &eb);
                out -= &self.pair(alpha, &br);
                out
            })
            .collect()
    }

    /// `⟨⟨(r, α), (s, β)⟩⟩ = ⟨α, s⟩ + ⟨β, r⟩`.
    pub fn big_pair(&self, a: &Section, b: &Section) -> Poly {
        &self.pair(&a.form, &b.vector) + &self.pair(&b.form, &a.vector)
    }

    /// `([r,s]_E, L_{ρ(r)}β − L_{ρ(s)}α + ½ d_E(i_s α − i_r β))`.
    pub fn courant(&self, a: &Section, b: &Section) -> Result<Section> {
        self.check(a)?;
        self.check(b)?;
        let vector = self.bracket(&a.vector, &b.vector);
        let lb = self.lie_derivative(&a.vector, &b.form);
        let la = self.lie_derivative(&b.vector, &a.form);
        let inner = &self.pair(&a.form, &b.vector) - &self.pair(&b.form, &a.vector);
        let d = self.d_scalar(&inner.scale(0.5));
        let form = lb
            .iter()
            .zip(&la)
            .zip(&d)
            .map(|((x, y), z)| &(x - y) + z)
            .collect();
        Ok(Section { vector, form })
    }

    /// `([r,s]_E, i_r d_E β − i_s d_E α + d_E(i_r β))`, equal to
    /// [`LocalAlgebroid::courant`] up to `½ d_E⟨⟨a, b⟩⟩`.
    pub fn courant_alt(&self, a: &Section, b: &Section) -> Result<Section> {
        self.check(a)?;
        self.check(b)?;
        let vector = self.bracket(&a.vector, &b.vector);
        let r = VectorField::new(a.vector.clone());
        let s = VectorField::new(b.vector.clone());
        let t1 = self.d_one(&b.form).interior(&r)?;
        let t2 = self.d_one(&a.form).interior(&s)?;
        let t3 = self.d_scalar(&self.pair(&b.form, &a.vector));
        let form = t1
            .components()
            .iter()
            .zip(t2.components())
            .zip(&t3)
            .map(|((x, y), z)| &(x - y) + z)
            .collect();
        Ok(Section { vector, form })
    }

    /// `T(a₁, a₂, a₃) = ⟨⟨[a₁, a₂]_C, a₃⟩⟩`.
    pub fn tensor(&self, a1: &Section, a2: &Section, a3: &Section) -> Result<Poly> {
        self.check(a3)?;
        Ok(self.big_pair(&self.courant(a1, a2)?, a3))
    }

    /// `L_{ρ(r)}β(t) + L_{ρ(s)}γ(r) + L_{ρ(t)}α(s)`, equal to the tensor on
    /// sections of a common isotropic field.
    pub fn tensor_lemma(&self, a1: &Section, a2: &Section, a3: &Section) -> Result<Poly> {
        for a in [a1, a2, a3] {
            self.check(a)?;
        }
        let mut out = self.pair(&self.lie_derivative(&a1.vector, &a2.form), &a3.vector);
        out += &self.pair(&self.lie_derivative(&a2.vector, &a3.form), &a1.vector);
        out += &self.pair(&self.lie_derivative(&a3.vector, &a1.form), &a2.vector);
        Ok(out)
    }

    /// Largest reduced coefficient of `⟨⟨aᵢ, aⱼ⟩⟩` over all pairs, self pairs included.
    pub fn isotropy_residual(&self, sections: &[&Section]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..sections.len() {
            for j in i..sections.len() {
                worst = worst.max(self.chart.residual(&self.big_pair(sections[i], sections[j])));
            }
        }
        worst
    }

    /// Tensor with the alternate formula checked whenever the three sections
    /// are mutually isotropic.
    pub fn tensor_checked(&self, a1: &Section, a2: &Section, a3: &Section, tol: f64) -> Result<TensorReport> {
        let r = self.tensor_report(a1, a2, a3, tol)?;
        if !r.holds {
            return Err(Error::Assertion(format!(
                "tensor and its cyclic Lie-derivative form differ by {:.3e}",
                r.lemma_residual
            )));
        }
        Ok(r)
    }

    /// Like [`Self::tensor_checked`] but reports a failed lemma check in `holds`.
    pub fn tensor_report(&self, a1: &Section, a2: &Section, a3: &Section, tol: f64) -> Result<TensorReport> {
        let value = self.tensor(a1, a2, a3)?;
        let isotropic = self.isotropy_residual(&[a1, a2, a3]) <= tol;
        let lemma = self.tensor_lemma(a1, a2, a3)?;
        let lemma_residual = self.chart.residual(&(&value - &lemma));
        let holds = !isotropic || lemma_residual <= tol * scale_of(&value);
        Ok(TensorReport {
            value: self.chart.reduce(&value),
            isotropic,
            lemma_residual,
            holds,
        })
    }

    /// Bracket in both forms with the agreement check.
    pub fn courant_checked(&self, a: &Section, b: &Section, tol: f64) -> Result<CourantReport> {
        let r = self.courant_report(a, b, tol)?;
        if !r.holds {
            return Err(Error::Assertion(format!(
                "Courant bracket forms disagree (residual {:.3e}, corrected {:.3e})",
                r.forms_residual, r.correction_residual
            )));
        }
        Ok(r)
    }

    /// Like [`Self::courant_checked`] but reports disagreement in `holds`.
    pub fn courant_report(&self, a: &Section, b: &Section, tol: f64) -> Result<CourantReport> {
        let bracket = self.courant(a, b)?;
        let alt = self.courant_alt(a, b)?;
        let half = self.d_scalar(&self.big_pair(a, b).scale(0.5));
        let diff = bracket.sub(&alt);
        let forms_residual = diff.residual(&self.chart);
        let corrected = Section::new(diff.vector.clone(), diff.form.iter().zip(&half).map(|(x, h)| x + h).collect());
        let correction_residual = corrected.residual(&self.chart);
        let isotropic = self.chart.residual(&self.big_pair(a, b)) <= tol;
        let bound = tol * section_scale(&bracket).max(section_scale(&alt));
        let holds = correction_residual <= bound && (!isotropic || forms_residual <= bound);
        Ok(CourantReport {
            bracket,
            alt,
            isotropic,
            forms_residual,
            correction_residual,
            holds,
        })
    }

    /// `⟲ [[a₁, a₂]_C, a₃]_C`.
    pub fn jacobiator(&self, a: [&Section; 3]) -> Result<Section> {
        let mut out = Section::zero(self.rank(), self.chart.nvars());
        for k in 0..3 {
            let inner = self.courant(a[k], a[(k + 1) % 3])?;
            out = out.add(&self.courant(&inner, a[(k + 2) % 3])?);
        }
        Ok(out)
    }

    /// Checks `⟲[[a₁,a₂],a₃] = (⅙) d ⟲⟨⟨[a₁,a₂],a₃⟩⟩` and, for mutually
    /// isotropic sections, `J₂ = ½ d T(a₁,a₂,a₃)`.
    pub fn jacobiator_check(&self, a: [&Section; 3], tol: f64) -> Result<JacobiatorReport> {
        let jac = self.jacobiator(a)?;
        let mut cyc = self.zero();
        for k in 0..3 {
            let inner = self.courant(a[k], a[(k + 1) % 3])?;
            cyc += &self.big_pair(&inner, a[(k + 2) % 3]);
        }
        let rhs = self.d_scalar(&cyc.scale(1.0 / 6.0));
        let form_residual = jac
            .form
            .iter()
            .zip(&rhs)
            .map(|(x, y)| self.chart.residual(&(x - y)))
            .fold(0.0, f64::max);
        let vector_residual = jac.vector_residual(&self.chart);
        let isotropic = self.isotropy_residual(&a) <= tol;
        let j2_residual = if isotropic {
            let t = self.tensor(a[0], a[1], a[2])?;
            let dt = self.d_scalar(&t.scale(0.5));
            Some(
                jac.form
                    .iter()
                    .zip(&dt)
                    .map(|(x, y)| self.chart.residual(&(x - y)))
                    .fold(0.0, f64::max),
            )
        } else {
            None
        };
        let scale = section_scale(&jac).max(1.0);
        let holds = vector_residual <= tol * scale
            && form_residual <= tol * scale
            && j2_residual.is_none_or(|r| r <= tol * scale);
        Ok(JacobiatorReport {
            vector_residual,
            form_residual,
            isotropic,
            j2_residual,
            holds,
        })
    }
}

fn scale_of(p: &Poly) -> f64 {
    p.max_abs_coeff().max(1.0)
}

fn section_scale(s: &Section) -> f64 {
    s.vector.iter().chain(&s.form).map(scale_of).fold(1.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct CourantReport {
    pub bracket: Section,
    pub alt: Section,
    pub isotropic: bool,
    /// Largest coefficient of the difference of the two forms.
    pub forms_residual: f64,
    /// Same after adding `½ d⟨⟨a, b⟩⟩`.
    pub correction_residual: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct TensorReport {
    pub value: Poly,
    pub isotropic: bool,
    pub lemma_residual: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiatorReport {
    pub vector_residual: f64,
    pub form_residual: f64,
    pub isotropic: bool,
    pub j2_residual: Option<f64>,
    pub holds: bool,
}
