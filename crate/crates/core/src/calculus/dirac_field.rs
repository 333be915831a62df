//! Dirac structures on chart domains given by polynomial data, and the
//! sampled involutivity test through the Courant tensor.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::algebroid::{LocalAlgebroid, Section};
use super::chart::Chart;
use super::fields::{combinations, lie_bracket, Bivector, Form, VectorField};
use super::poly::Poly;
use crate::dirac::{construct_graph_flat, construct_graph_sharp, LinearDirac};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::PontryaginSpace;
use crate::subspace::Subspace;

/// Default number of random section triples.
pub const DEFAULT_BUDGET: usize = 30;
/// Polynomial degree of the random inputs that generate sections.
pub const SECTION_DEGREE: u32 = 2;

#[derive(Debug, Clone)]
pub enum DiracField {
    /// `D_π = {(π♯α, α)}`.
    BivectorGraph(Bivector),
    /// `D_ω = {(X, i_X ω)}`.
    TwoFormGraph(Form),
    /// `D_Q^F = {(X, i_X Q + β) : X ∈ F, β ∈ F°}` with `F = ∩ ker ωⁱ`.
    DistributionPlusAnnihilator {
        constraints: Vec<Form>,
        q: Option<Form>,
        spanning: Option<Vec<VectorField>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Involutive,
    NotInvolutive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub sections: [String; 3],
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvolutivityReport {
    pub verdict: Verdict,
    pub max_abs_tensor: f64,
    pub samples: usize,
    pub frame_triples: usize,
    pub random_triples: usize,
    pub witness: Option<Witness>,
    /// Whether the distribution's spanning fields close under the Lie bracket.
    pub distribution_closed: Option<bool>,
    pub closure_residual: Option<f64>,
    /// Whether the pointwise linear structure certifies at every sample.
    pub pointwise_certified: bool,
    pub tol: f64,
}

impl DiracField {
    fn check_chart(&self, chart: &Chart) -> Result<()> {
        let n = chart.dim();
        let ok = match self {
            DiracField::BivectorGraph(p) => p.dim() == n,
            DiracField::TwoFormGraph(w) => w.dim() == n && w.degree() == 2,
            DiracField::DistributionPlusAnnihilator { constraints, q, spanning } => {
                constraints.iter().all(|c| c.dim() == n && c.degree() == 1)
                    && q.as_ref().is_none_or(|q| q.dim() == n && q.degree() == 2)
                    && spanning.as_ref().is_none_or(|s| s.iter().all(|x| x.dim() == n))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("field data does not live on a {n}-dimensional chart")))
        }
    }

    /// The linear structure at `x` in `T_xM ⊕ T*_xM`.
    pub fn linear_at(&self, chart: &Chart, x: &[f64], tol: f64) -> Result<LinearDirac> {
        self.check_chart(chart)?;
        let n = chart.dim();
        let space = PontryaginSpace::full_dual(n, tol);
        match self {
            DiracField::BivectorGraph(p) => construct_graph_sharp(&p.sharp_matrix_at(chart, x), &space),
            DiracField::TwoFormGraph(w) => construct_graph_flat(Some(&w.matrix_at(chart, x)?.transpose()), None, &space),
            DiracField::DistributionPlusAnnihilator { constraints, q, .. } => {
                let w = constraint_matrix(chart, constraints, x);
                let f = Subspace::kernel_of(&w, tol);
                let qm = match q {
                    Some(q) => q.matrix_at(chart, x)?.transpose(),
                    None => DMatrix::zeros(n, n),
                };
                construct_graph_flat(Some(&qm), Some(&f), &space)
            }
        }
    }

    /// Fields spanning the distribution: the supplied ones, or the columns of
    /// the polynomial projector `det(G) I − Wᵀ adj(G) W` with `G = W Wᵀ`.
    pub fn distribution_fields(&self, chart: &Chart) -> Option<Vec<VectorField>> {
        match self {
            DiracField::DistributionPlusAnnihilator { constraints, spanning, .. } => Some(
                spanning
                    .clone()
                    .unwrap_or_else(|| projector_fields(chart, constraints)),
            ),
            _ => None,
        }
    }

    /// Deterministic labelled frame of sections.
    pub fn frame_sections(&self, chart: &Chart) -> Result<Vec<(String, Section)>> {
        self.check_chart(chart)?;
        let n = chart.dim();
        let mut out = Vec::new();
        match self {
            DiracField::BivectorGraph(p) => {
                for i in 0..n {
                    let a = Form::basis(chart, &[i], chart.constant(1.0))?;
                    out.push((format!("(π♯dx{i}, dx{i})"), Section::from_fields(&p.sharp(&a)?, &a)?));
                }
            }
            DiracField::TwoFormGraph(w) => {
                for i in 0..n {
                    let x = VectorField::coordinate(chart, i);
                    out.push((format!("(∂{i}, i_∂{i} ω)"), Section::from_fields(&x, &w.interior(&x)?)?));
                }
            }
            DiracField::DistributionPlusAnnihilator { constraints, q, .. } => {
                for (a, x) in self.distribution_fields(chart).unwrap_or_default().iter().enumerate() {
                    let form = match q {
                        Some(q) => q.interior(x)?,
                        None => Form::zero(chart, 1),
                    };
                    out.push((format!("(X{a}, Q♭X{a})"), Section::from_fields(x, &form)?));
                }
                for (i, c) in constraints.iter().enumerate() {
                    out.push((format!("(0, ω{i})"), Section::from_fields(&VectorField::zero(chart), c)?));
                }
            }
        }
        Ok(out)
    }

    /// A section generated from random polynomial inputs of degree `degree`.
    pub fn random_section<R: Rng + ?Sized>(&self, chart: &Chart, degree: u32, rng: &mut R) -> Result<Section> {
        self.check_chart(chart)?;
        let n = chart.dim();
        match self {
            DiracField::BivectorGraph(p) => {
                let a = Form::one_form((0..n).map(|_| chart.random_poly(degree, rng)).collect());
                Section::from_fields(&p.sharp(&a)?, &a)
            }
            DiracField::TwoFormGraph(w) => {
                let x = VectorField::new((0..n).map(|_| chart.random_poly(degree, rng)).collect());
                Section::from_fields(&x, &w.interior(&x)?)
            }
            DiracField::DistributionPlusAnnihilator { constraints, q, .. } => {
                let mut x = VectorField::zero(chart);
                for f in self.distribution_fields(chart).unwrap_or_default() {
                    x = x.add(&f.mul(&chart.random_poly(degree, rng)));
                }
                let mut form = match q {
                    Some(q) => q.interior(&x)?,
                    None => Form::zero(chart, 1),
                };
                for c in constraints {
                    form = form.add(&c.mul(&chart.random_poly(degree, rng)))?;
                }
                Section::from_fields(&x, &form)
            }
        }
    }

    /// Sampled test of `T_D ≡ 0`: frame triples first, then `budget` random
    /// triples, each evaluated at every sample.
    pub fn involutivity_check(
        &self,
        chart: &Chart,
        samples: &[Vec<f64>],
        budget: usize,
        seed: u64,
        tol: f64,
    ) -> Result<InvolutivityReport> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if samples.iter().any(|x| x.len() != chart.dim()) {
            return Err(Error::DimensionMismatch("sample point dimension".into()));
        }
        let alg = LocalAlgebroid::tangent(chart);
        let ring: Vec<Vec<f64>> = samples.iter().map(|x| chart.ring_point(x)).collect();
        let frame = self.frame_sections(chart)?;
        let mut triples: Vec<([String; 3], [Section; 3])> = Vec::new();
        for c in combinations(frame.len(), 3) {
            let (i, j, k) = (c[0], c[1], c[2]);
            triples.push((
                [frame[i].0.clone(), frame[j].0.clone(), frame[k].0.clone()],
                [frame[i].1.clone(), frame[j].1.clone(), frame[k].1.clone()],
            ));
        }
        let frame_triples = triples.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 0..budget {
            let s = [
                self.random_section(chart, SECTION_DEGREE, &mut rng)?,
                self.random_section(chart, SECTION_DEGREE, &mut rng)?,
                self.random_section(chart, SECTION_DEGREE, &mut rng)?,
            ];
            triples.push(([format!("random{t}.0"), format!("random{t}.1"), format!("random{t}.2")], s));
        }

        let mut max_abs: f64 = 0.0;
        let mut witness = None;
        for (labels, s) in &triples {
            let t = chart.reduce(&alg.tensor(&s[0], &s[1], &s[2])?);
            for (x, r) in samples.iter().zip(&ring) {
                let v = t.eval(r);
                max_abs = max_abs.max(v.abs());
                if witness.is_none() && v.abs() > tol * t.eval_abs(r).max(1.0) {
                    witness = Some(Witness {
                        sections: labels.clone(),
                        point: x.clone(),
                        value: v,
                    });
                }
            }
        }

        let (distribution_closed, closure_residual) = match self {
            DiracField::DistributionPlusAnnihilator { constraints, .. } => {
                let fields = self.distribution_fields(chart).unwrap_or_default();
                let r = closure_residual(chart, constraints, &fields, samples)?;
                (Some(r <= crate::subspace::EQUALITY_FACTOR * tol), Some(r))
            }
            _ => (None, None),
        };

        let mut pointwise_certified = true;
        for x in samples {
            pointwise_certified &= self.linear_at(chart, x, tol)?.is_certified();
        }

        Ok(InvolutivityReport {
            verdict: if witness.is_none() {
                Verdict::Involutive
            } else {
                Verdict::NotInvolutive
            },
            max_abs_tensor: max_abs,
            samples: samples.len(),
            frame_triples,
            random_triples: budget,
            witness,
            distribution_closed,
            closure_residual,
            pointwise_certified,
            tol,
        })
    }
}

/// Rows are the constraint covectors at `x`.
pub fn constraint_matrix(chart: &Chart, constraints: &[Form], x: &[f64]) -> DMatrix<f64> {
    let n = chart.dim();
    let mut w = DMatrix::zeros(constraints.len(), n);
    for (i, c) in constraints.iter().enumerate() {
        for (j, v) in c.eval(chart, x).into_iter().enumerate() {
            w[(i, j)] = v;
        }
    }
    w
}

/// Largest normalized distance of `[Xₐ, X_b](x)` from `ker W(x)`.
fn closure_residual(chart: &Chart, constraints: &[Form], fields: &[VectorField], samples: &[Vec<f64>]) -> Result<f64> {
    let mut brackets = Vec::new();
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            brackets.push(lie_bracket(chart, &fields[a], &fields[b])?);
        }
    }
    let mut worst: f64 = 0.0;
    for x in samples {
        let w = constraint_matrix(chart, constraints, x);
        if w.nrows() == 0 {
            continue;
        }
        // Orthonormal basis of row(W); the component of v along it leaves ker W.
        let rows = linalg::column_basis(&w.transpose(), 1e-12, 0.0);
        for br in &brackets {
            let v = DVector::from_vec(br.eval(chart, x));
            let off = (rows.transpose() * &v).norm();
            worst = worst.max(off / v.norm().max(1.0));
        }
    }
    Ok(worst)
}

fn det(m: &[Vec<Poly>], nvars: usize) -> Poly {
    match m.len() {
        0 => Poly::constant(nvars, 1.0),
        1 => m[0][0].clone(),
        k => {
            let mut out = Poly::zero(nvars);
            for j in 0..k {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor(m, 0, j);
                let term = &m[0][j] * &det(&minor, nvars);
                if j % 2 == 0 {
                    out += &term;
                } else {
                    out -= &term;
                }
            }
            out
        }
    }
}

fn minor(m: &[Vec<Poly>], row: usize, col: usize) -> Vec<Vec<Poly>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, p)| p.clone()).collect())
        .collect()
}

/// Columns of `det(G) I − Wᵀ adj(G) W`, which lie in `ker W` identically.
fn projector_fields(chart: &Chart, constraints: &[Form]) -> Vec<VectorField> {
    let n = chart.dim();
    let k = constraints.len();
    let nv = chart.nvars();
    let w: Vec<&[Poly]> = constraints.iter().map(|c| c.components()).collect();
    let g: Vec<Vec<Poly>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = Poly::zero(nv);
                    for l in 0..n {
                        acc += &(&w[i][l] * &w[j][l]);
                    }
                    chart.reduce(&acc)
                })
                .collect()
        })
        .collect();
    let dg = det(&g, nv);
    // adj(G)[i][j] = (−1)^{i+j} det(minor(G, j, i)).
    let adj: Vec<Vec<Poly>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let c = det(&minor(&g, j, i), nv);
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|col| {
            let comps = (0..n)
                .map(|row| {
                    let mut acc = if row == col { dg.clone() } else { Poly::zero(nv) };
                    for i in 0..k {
                        for j in 0..k {
                            acc -= &(&(&w[i][row] * &adj[i][j]) * &w[j][col]);
                        }
                    }
                    chart.reduce(&acc)
                })
                .collect();
            VectorField::new(comps)
        })
        .filter(|v: &VectorField| v.comps.iter().any(|p| !p.is_zero()))
        .collect()
}

/// `count` seeded random chart points.
pub fn sample_points(chart: &Chart, count: usize, seed: u64, radius: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| chart.random_point(radius, &mut rng)).collect()
}

impl Subspace {
    /// `ker W` with the rank decided relative to the largest singular value.
    pub(crate) fn kernel_of(w: &DMatrix<f64>, tol: f64) -> Subspace {
        let n = w.ncols();
        if w.nrows() == 0 {
            return Subspace::full(n, tol);
        }
        Subspace::from_columns(&linalg::kernel(w, tol, 0.0), tol, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::chart::CoordKind;
    use crate::calculus::fields::exterior_derivative;

    const TOL: f64 = 1e-10;

    fn disk_chart() -> Chart {
        Chart::new(vec![CoordKind::Linear, CoordKind::Linear, CoordKind::Linear, CoordKind::Angle])
    }

    fn disk_constraints(ch: &Chart, r: f64) -> Vec<Form> {
        let c = ch.cos(3).unwrap();
        let s = ch.sin(3).unwrap();
        vec![
            Form::one_form(vec![ch.constant(1.0), ch.zero(), c.scale(-r), ch.zero()]),
            Form::one_form(vec![ch.zero(), ch.constant(1.0), s.scale(-r), ch.zero()]),
        ]
    }

    #[test]
    fn constant_poisson_is_involutive() {
        let ch = Chart::euclidean(2);
        let pi = Bivector::zero(&ch).with_term(0, 1, ch.constant(1.0)).unwrap();
        let d = DiracField::BivectorGraph(pi);
        let samples = sample_points(&ch, 100, 0, 2.0);
        let rep = d.involutivity_check(&ch, &samples, DEFAULT_BUDGET, 0, TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::Involutive);
        assert!(rep.max_abs_tensor <= 1e-10);
        assert!(rep.pointwise_certified);
    }

    #[test]
    fn nonclosed_two_form_has_unit_witness() {
        let ch = Chart::euclidean(3);
        let w = Form::basis(&ch, &[1, 2], ch.coordinate(0).unwrap()).unwrap();
        let d = DiracField::TwoFormGraph(w);
        let samples = sample_points(&ch, 10, 1, 1.0);
        let rep = d.involutivity_check(&ch, &samples, 5, 0, TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::NotInvolutive);
        let wit = rep.witness.unwrap();
        assert!((wit.value - 1.0).abs() < 1e-14);
        assert_eq!(wit.sections[0], "(∂0, i_∂0 ω)");
    }

    #[test]
    fn closed_two_form_is_involutive() {
        let ch = Chart::euclidean(3);
        let a = Form::one_form(vec![
            ch.coordinate(1).unwrap(),
            &ch.coordinate(0).unwrap() * &ch.coordinate(2).unwrap(),
            ch.zero(),
        ]);
        let w = exterior_derivative(&ch, &a).unwrap();
        let d = DiracField::TwoFormGraph(w);
        let samples = sample_points(&ch, 20, 2, 1.0);
        let rep = d.involutivity_check(&ch, &samples, 10, 3, TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::Involutive, "{rep:?}");
    }

    #[test]
    fn rolling_disk_distribution_is_not_involutive() {
        let ch = disk_chart();
        let constraints = disk_constraints(&ch, 1.0);
        let c = ch.cos(3).unwrap();
        let s = ch.sin(3).unwrap();
        let spanning = vec![
            VectorField::coordinate(&ch, 3),
            VectorField::new(vec![c, s, ch.constant(1.0), ch.zero()]),
        ];
        let samples = sample_points(&ch, 10, 4, 1.0);
        for spanning in [Some(spanning), None] {
            let d = DiracField::DistributionPlusAnnihilator {
                constraints: constraints.clone(),
                q: None,
                spanning,
            };
            let rep = d.involutivity_check(&ch, &samples, 3, 0, TOL).unwrap();
            assert_eq!(rep.verdict, Verdict::NotInvolutive);
            assert_eq!(rep.distribution_closed, Some(false));
            assert!(rep.pointwise_certified);
        }
    }

    #[test]
    fn coordinate_distribution_is_involutive() {
        let ch = Chart::euclidean(2);
        let d = DiracField::DistributionPlusAnnihilator {
            constraints: vec![Form::basis(&ch, &[0], ch.constant(1.0)).unwrap()],
            q: None,
            spanning: None,
        };
        let samples = sample_points(&ch, 20, 5, 1.0);
        let rep = d.involutivity_check(&ch, &samples, DEFAULT_BUDGET, 0, TOL).unwrap();
        assert_eq!(rep.verdict, Verdict::Involutive);
        assert_eq!(rep.distribution_closed, Some(true));
    }

    #[test]
    fn projector_fields_lie_in_the_distribution() {
        let ch = disk_chart();
        let constraints = disk_constraints(&ch, 2.0);
        let fields = projector_fields(&ch, &constraints);
        assert!(!fields.is_empty());
        for f in &fields {
            for c in &constraints {
                let mut acc = ch.zero();
                for (a, b) in c.components().iter().zip(&f.comps) {
                    acc += &(a * b);
                }
                assert!(ch.residual(&acc) < 1e-12);
            }
        }
        // They span the 2-dimensional distribution at a sample point.
        let x = [0.1, 0.2, 0.3, 0.7];
        let cols: Vec<Vec<f64>> = fields.iter().map(|f| f.eval(&ch, &x)).collect();
        let sp = Subspace::span(&cols, 4, 1e-10).unwrap();
        assert_eq!(sp.dim(), 2);
    }

    #[test]
    fn empty_samples_error() {
        let ch = Chart::euclidean(2);
        let d = DiracField::BivectorGraph(Bivector::zero(&ch));
        assert!(matches!(d.involutivity_check(&ch, &[], 1, 0, TOL), Err(Error::EmptySamples)));
    }
}
