//! Vector fields, differential forms and bivectors with polynomial components.

use nalgebra::DMatrix;

use super::chart::Chart;
use super::poly::Poly;
use crate::error::{Error, Result};

/// Strictly increasing index tuples of length `k` from `0..n`, in lex order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Sorts `idx` and returns the permutation sign, or `None` on a repeat.
fn sort_signed(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

fn position(n: usize, sorted: &[usize]) -> usize {
    combinations(n, sorted.len())
        .iter()
        .position(|c| c == sorted)
        .expect("valid index tuple")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub comps: Vec<Poly>,
}

impl VectorField {
    pub fn new(comps: Vec<Poly>) -> Self {
        VectorField { comps }
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            comps: vec![chart.zero(); chart.dim()],
        }
    }

    /// The coordinate field `∂ᵢ`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.comps[i] = chart.constant(1.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// `X(f) = Σ Xʲ ∂ⱼ f`.
    pub fn apply(&self, chart: &Chart, f: &Poly) -> Poly {
        let mut out = chart.zero();
        for (j, xj) in self.comps.iter().enumerate() {
            if !xj.is_zero() {
                out += &(xj * &chart.partial(j, f));
            }
        }
        out
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, f: &Poly) -> VectorField {
        VectorField::new(self.comps.iter().map(|a| a * f).collect())
    }

    pub fn eval(&self, chart: &Chart, x: &[f64]) -> Vec<f64> {
        let r = chart.ring_point(x);
        self.comps.iter().map(|c| c.eval(&r)).collect()
    }

    pub fn reduce(&self, chart: &Chart) -> VectorField {
        VectorField::new(self.comps.iter().map(|c| chart.reduce(c)).collect())
    }

    pub fn residual(&self, chart: &Chart) -> f64 {
        self.comps.iter().map(|c| chart.residual(c)).fold(0.0, f64::max)
    }
}

/// `[X,Y]ⁱ = Σⱼ (Xʲ ∂ⱼ Yⁱ − Yʲ ∂ⱼ Xⁱ)`.
pub fn lie_bracket(chart: &Chart, x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.dim() != chart.dim() || y.dim() != chart.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector fields of dimension {} and {} on a {}-dimensional chart",
            x.dim(),
            y.dim(),
            chart.dim()
        )));
    }
    Ok(VectorField::new(
        (0..chart.dim())
            .map(|i| &x.apply(chart, &y.comps[i]) - &y.apply(chart, &x.comps[i]))
            .collect(),
    ))
}

/// A differential `k`-form; components are stored for increasing index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    dim: usize,
    degree: usize,
    comps: Vec<Poly>,
}

impl Form {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        let n = chart.dim();
        Form {
            dim: n,
            degree,
            comps: vec![chart.zero(); combinations(n, degree).len()],
        }
    }

    pub fn scalar(f: Poly, dim: usize) -> Self {
        Form {
            dim,
            degree: 0,
            comps: vec![f],
        }
    }

    /// Components in the order of [`combinations`].
    pub fn from_components(dim: usize, degree: usize, comps: Vec<Poly>) -> Result<Self> {
        let expected = combinations(dim, degree).len();
        if comps.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{degree}-form on dimension {dim} needs {expected} components, got {}",
                comps.len()
            )));
        }
        Ok(Form { dim, degree, comps })
    }

    /// `Σ αᵢ dxᵢ`.
    pub fn one_form(comps: Vec<Poly>) -> Self {
        Form {
            dim: comps.len(),
            degree: 1,
            comps,
        }
    }

    /// `f dx_{i₁} ∧ … ∧ dx_{i_k}` for arbitrary distinct indices.
    pub fn basis(chart: &Chart, idx: &[usize], f: Poly) -> Result<Self> {
        let mut out = Form::zero(chart, idx.len());
        let (sorted, sign) = sort_signed(idx).ok_or_else(|| Error::Invalid("repeated form index".into()))?;
        if sorted.last().is_some_and(|&i| i >= chart.dim()) {
            return Err(Error::DimensionMismatch("form index out of range".into()));
        }
        let p = position(out.dim, &sorted);
        out.comps[p] = f.scale(sign);
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    /// Component `α(∂_{i₁}, …, ∂_{i_k})` for any index tuple.
    pub fn component(&self, idx: &[usize]) -> Poly {
        let nvars = self.comps.first().map_or(0, Poly::nvars);
        match sort_signed(idx) {
            None => Poly::zero(nvars),
            Some((sorted, sign)) => self.comps[position(self.dim, &sorted)].scale(sign),
        }
    }

    fn check_same(&self, other: &Form) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "forms of type ({}, {}) and ({}, {})",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        Ok(Form {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        Ok(Form {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul(&self, f: &Poly) -> Form {
        Form {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().map(|a| a * f).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Form {
        Form {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("wedge of forms on different charts".into()));
        }
        let nvars = self.comps.first().map_or(0, Poly::nvars);
        let k = self.degree + other.degree;
        let mut comps = vec![Poly::zero(nvars); combinations(self.dim, k).len()];
        let left = combinations(self.dim, self.degree);
        let right = combinations(self.dim, other.degree);
        for (i, a) in left.iter().enumerate() {
            if self.comps[i].is_zero() {
                continue;
            }
            for (j, b) in right.iter().enumerate() {
                if other.comps[j].is_zero() {
                    continue;
                }
                let joined: Vec<usize> = a.iter().chain(b).copied().collect();
                if let Some((sorted, sign)) = sort_signed(&joined) {
                    comps[position(self.dim, &sorted)] += &(&self.comps[i] * &other.comps[j]).scale(sign);
                }
            }
        }
        Ok(Form {
            dim: self.dim,
            degree: k,
            comps,
        })
    }

    /// `(i_X α)(Y₁, …) = α(X, Y₁, …)`.
    pub fn interior(&self, x: &VectorField) -> Result<Form> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch("interior product dimension".into()));
        }
        if self.degree == 0 {
            return Err(Error::UnsupportedDegree(0));
        }
        let nvars = self.comps.first().map_or(0, Poly::nvars);
        let rest = combinations(self.dim, self.degree - 1);
        let comps = rest
            .iter()
            .map(|tail| {
                let mut acc = Poly::zero(nvars);
                for (j, xj) in x.comps.iter().enumerate() {
                    if xj.is_zero() {
                        continue;
                    }
                    let mut idx = vec![j];
                    idx.extend_from_slice(tail);
                    let c = self.component(&idx);
                    if !c.is_zero() {
                        acc += &(xj * &c);
                    }
                }
                acc
            })
            .collect();
        Ok(Form {
            dim: self.dim,
            degree: self.degree - 1,
            comps,
        })
    }

    /// `α(X₁, …, X_k)` as a polynomial.
    pub fn evaluate(&self, vectors: &[&VectorField]) -> Result<Poly> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "{}-form evaluated on {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        let mut f = self.clone();
        for v in vectors {
            f = f.interior(v)?;
        }
        Ok(f.comps[0].clone())
    }

    /// Skew matrix `Ω[i][j] = ω(∂ᵢ, ∂ⱼ)` of a 2-form at a chart point.
    pub fn matrix_at(&self, chart: &Chart, x: &[f64]) -> Result<DMatrix<f64>> {
        if self.degree != 2 {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        let r = chart.ring_point(x);
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |i, j| self.component(&[i, j]).eval(&r)))
    }

    /// Component values at a chart point, in the stored order.
    pub fn eval(&self, chart: &Chart, x: &[f64]) -> Vec<f64> {
        let r = chart.ring_point(x);
        self.comps.iter().map(|c| c.eval(&r)).collect()
    }

    pub fn reduce(&self, chart: &Chart) -> Form {
        Form {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().map(|c| chart.reduce(c)).collect(),
        }
    }

    /// Largest reduced coefficient over all components.
    pub fn residual(&self, chart: &Chart) -> f64 {
        self.comps.iter().map(|c| chart.residual(c)).fold(0.0, f64::max)
    }
}

/// `df = Σ ∂ᵢf dxᵢ`.
pub fn differential(chart: &Chart, f: &Poly) -> Form {
    Form::one_form((0..chart.dim()).map(|i| chart.partial(i, f)).collect())
}

/// Exterior derivative of a form of degree at most two.
pub fn exterior_derivative(chart: &Chart, alpha: &Form) -> Result<Form> {
    if alpha.degree > 2 {
        return Err(Error::UnsupportedDegree(alpha.degree));
    }
    if alpha.dim != chart.dim() {
        return Err(Error::DimensionMismatch("form and chart dimensions differ".into()));
    }
    let mut out = Form::zero(chart, alpha.degree + 1);
    for (idx, c) in combinations(alpha.dim, alpha.degree).iter().zip(&alpha.comps) {
        if c.is_zero() {
            continue;
        }
        let basis = Form::basis(chart, idx, chart.constant(1.0))?;
        out = out.add(&differential(chart, c).wedge(&basis)?)?;
    }
    Ok(out)
}

/// `L_X α = i_X dα + d(i_X α)`; for functions, `X(f)`.
pub fn lie_derivative(chart: &Chart, x: &VectorField, alpha: &Form) -> Result<Form> {
    if x.dim() != chart.dim() || alpha.dim != chart.dim() {
        return Err(Error::DimensionMismatch("Lie derivative dimensions".into()));
    }
    if alpha.degree == 0 {
        return Ok(Form::scalar(x.apply(chart, &alpha.comps[0]), alpha.dim));
    }
    let first = exterior_derivative(chart, alpha)?.interior(x)?;
    let second = exterior_derivative(chart, &alpha.interior(x)?)?;
    first.add(&second)
}

/// A bivector field `π = Σ_{i<j} π^{ij} ∂ᵢ ∧ ∂ⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    dim: usize,
    comps: Vec<Poly>,
}

impl Bivector {
    pub fn zero(chart: &Chart) -> Self {
        Bivector {
            dim: chart.dim(),
            comps: vec![chart.zero(); combinations(chart.dim(), 2).len()],
        }
    }

    pub fn from_components(dim: usize, comps: Vec<Poly>) -> Result<Self> {
        let expected = combinations(dim, 2).len();
        if comps.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "bivector on dimension {dim} needs {expected} components, got {}",
                comps.len()
            )));
        }
        Ok(Bivector { dim, comps })
    }

    /// Adds `f ∂ᵢ ∧ ∂ⱼ`.
    pub fn with_term(mut self, i: usize, j: usize, f: Poly) -> Result<Self> {
        let (sorted, sign) = sort_signed(&[i, j]).ok_or_else(|| Error::Invalid("repeated bivector index".into()))?;
        let p = position(self.dim, &sorted);
        self.comps[p] += &f.scale(sign);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    /// `π^{ij}` for any pair.
    pub fn component(&self, i: usize, j: usize) -> Poly {
        let nvars = self.comps.first().map_or(0, Poly::nvars);
        match sort_signed(&[i, j]) {
            None => Poly::zero(nvars),
            Some((sorted, sign)) => self.comps[position(self.dim, &sorted)].scale(sign),
        }
    }

    /// `π♯(α)ʲ = Σᵢ π^{ij} αᵢ`.
    pub fn sharp(&self, alpha: &Form) -> Result<VectorField> {
        if alpha.degree() != 1 || alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch("π♯ expects a 1-form".into()));
        }
        let nvars = self.comps.first().map_or(0, Poly::nvars);
        Ok(VectorField::new(
            (0..self.dim)
                .map(|j| {
                    let mut acc = Poly::zero(nvars);
                    for i in 0..self.dim {
                        let a = &alpha.components()[i];
                        if !a.is_zero() {
                            acc += &(&self.component(i, j) * a);
                        }
                    }
                    acc
                })
                .collect(),
        ))
    }

    /// `{f, g} = π(df, dg) = Σ π^{ij} ∂ᵢf ∂ⱼg`.
    pub fn poisson(&self, chart: &Chart, f: &Poly, g: &Poly) -> Poly {
        let df: Vec<Poly> = (0..self.dim).map(|i| chart.partial(i, f)).collect();
        let dg: Vec<Poly> = (0..self.dim).map(|i| chart.partial(i, g)).collect();
        let mut acc = chart.zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let p = self.component(i, j);
                if !p.is_zero() && !df[i].is_zero() && !dg[j].is_zero() {
                    acc += &(&p * &(&df[i] * &dg[j]));
                }
            }
        }
        acc
    }

    /// Matrix `P[j][i] = π^{ij}` of `π♯` at a chart point.
    pub fn sharp_matrix_at(&self, chart: &Chart, x: &[f64]) -> DMatrix<f64> {
        let r = chart.ring_point(x);
        DMatrix::from_fn(self.dim, self.dim, |j, i| self.component(i, j).eval(&r))
    }
}

/// Cyclic Jacobiator `{f₁,{f₂,f₃}} + {f₂,{f₃,f₁}} + {f₃,{f₁,f₂}}`.
pub fn poisson_jacobiator(chart: &Chart, pi: &Bivector, f: [&Poly; 3]) -> Poly {
    let mut acc = chart.zero();
    for k in 0..3 {
        let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
        acc += &pi.poisson(chart, a, &pi.poisson(chart, b, c));
    }
    acc
}
