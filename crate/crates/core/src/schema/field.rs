//! Polynomial fields as `{"dim", "kind", "angles"?, "components"}`.
//!
//! Component keys are 0-based coordinate indices, comma-separated and strictly
//! increasing for forms and bivectors (`"0"`, `"0,2"`); a scalar uses the key
//! `""`. Monomial keys list one exponent per ring variable, `"(1,0,2)"`. An
//! angle coordinate contributes two ring variables `(cos, sin)` in its place.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{schema_err, SpecResult};
use crate::calculus::fields::combinations;
use crate::calculus::{Bivector, Chart, CoordKind, Form, Poly, Section, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    OneForm,
    TwoForm,
    ThreeForm,
    Bivector,
}

impl FieldKind {
    /// Number of indices per component.
    pub fn arity(self) -> usize {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Vector | FieldKind::OneForm => 1,
            FieldKind::TwoForm | FieldKind::Bivector => 2,
            FieldKind::ThreeForm => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFieldJson {
    pub dim: usize,
    pub kind: FieldKind,
    /// Coordinates (0-based) that are angles.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<usize>,
    #[serde(default)]
    pub components: BTreeMap<String, BTreeMap<String, f64>>,
}

fn parse_indices(key: &str, arity: usize, dim: usize) -> Result<Vec<usize>, String> {
    if arity == 0 {
        return if key.trim().is_empty() {
            Ok(vec![])
        } else {
            Err("a scalar has the single component key \"\"".into())
        };
    }
    let idx: Vec<usize> = key
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad index {t:?}")))
        .collect::<Result<_, _>>()?;
    if idx.len() != arity {
        return Err(format!("expected {arity} indices"));
    }
    if idx.iter().any(|&i| i >= dim) {
        return Err(format!("index out of range for dimension {dim}"));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err("indices must be strictly increasing".into());
    }
    Ok(idx)
}

fn parse_monomial(key: &str, nvars: usize) -> Result<Vec<u16>, String> {
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("monomial key {key:?} must look like \"(1,0,2)\""))?;
    let exps: Vec<u16> = if inner.trim().is_empty() {
        vec![]
    } else {
        inner
            .split(',')
            .map(|t| t.trim().parse::<u16>().map_err(|_| format!("bad exponent {t:?}")))
            .collect::<Result<_, _>>()?
    };
    if exps.len() != nvars {
        return Err(format!("monomial has {} exponents, the ring has {nvars} variables", exps.len()));
    }
    Ok(exps)
}

fn monomial_key(exps: &[u16]) -> String {
    let parts: Vec<String> = exps.iter().map(u16::to_string).collect();
    format!("({})", parts.join(","))
}

fn index_key(idx: &[usize]) -> String {
    idx.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Chart with the given angle coordinates.
pub fn chart_for(dim: usize, angles: &[usize], pointer: &str) -> SpecResult<Chart> {
    let mut kinds = vec![CoordKind::Linear; dim];
    for (i, &a) in angles.iter().enumerate() {
        if a >= dim {
            return Err(schema_err(format!("{pointer}/angles/{i}"), format!("angle index {a} ≥ dim {dim}")));
        }
        kinds[a] = CoordKind::Angle;
    }
    Ok(Chart::new(kinds))
}

impl PolyFieldJson {
    pub fn chart(&self, pointer: &str) -> SpecResult<Chart> {
        chart_for(self.dim, &self.angles, pointer)
    }

    /// Components in canonical (strictly increasing index) order.
    pub fn polys(&self, pointer: &str) -> SpecResult<Vec<Poly>> {
        let chart = self.chart(pointer)?;
        let nv = chart.nvars();
        let order = combinations(self.dim, self.kind.arity());
        let mut comps = vec![Poly::zero(nv); order.len()];
        for (key, terms) in &self.components {
            let ptr = format!("{pointer}/components/{}", key.replace('~', "~0").replace('/', "~1"));
            let idx = parse_indices(key, self.kind.arity(), self.dim).map_err(|m| schema_err(&ptr, m))?;
            let slot = order.iter().position(|c| *c == idx).expect("index set is a combination");
            let mut parsed = Vec::with_capacity(terms.len());
            for (mono, &c) in terms {
                let exps = parse_monomial(mono, nv).map_err(|m| schema_err(format!("{ptr}/{mono}"), m))?;
                if !c.is_finite() {
                    return Err(schema_err(format!("{ptr}/{mono}"), "coefficient must be finite"));
                }
                parsed.push((exps, c));
            }
            comps[slot] = Poly::from_terms(nv, parsed);
        }
        Ok(comps)
    }

    fn expect(&self, kind: FieldKind, pointer: &str) -> SpecResult<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(schema_err(
                format!("{pointer}/kind"),
                format!("expected {kind:?}, got {:?}", self.kind),
            ))
        }
    }

    pub fn scalar(&self, pointer: &str) -> SpecResult<Poly> {
        self.expect(FieldKind::Scalar, pointer)?;
        Ok(self.polys(pointer)?.remove(0))
    }

    pub fn vector_field(&self, pointer: &str) -> SpecResult<VectorField> {
        self.expect(FieldKind::Vector, pointer)?;
        Ok(VectorField::new(self.polys(pointer)?))
    }

    pub fn form(&self, pointer: &str) -> SpecResult<Form> {
        let degree = match self.kind {
            FieldKind::Scalar => 0,
            FieldKind::OneForm => 1,
            FieldKind::TwoForm => 2,
            FieldKind::ThreeForm => 3,
            other => {
                return Err(schema_err(format!("{pointer}/kind"), format!("expected a form, got {other:?}")));
            }
        };
        Ok(Form::from_components(self.dim, degree, self.polys(pointer)?)?)
    }

    pub fn bivector(&self, pointer: &str) -> SpecResult<Bivector> {
        self.expect(FieldKind::Bivector, pointer)?;
        Ok(Bivector::from_components(self.dim, self.polys(pointer)?)?)
    }

    /// Serialises canonical-order components, omitting zero ones.
    pub fn from_polys(chart: &Chart, kind: FieldKind, comps: &[Poly]) -> Self {
        let order = combinations(chart.dim(), kind.arity());
        let mut components = BTreeMap::new();
        for (idx, p) in order.iter().zip(comps) {
            if p.is_zero() {
                continue;
            }
            let terms = p.terms().map(|(m, c)| (monomial_key(m.exponents()), c)).collect();
            components.insert(index_key(idx), terms);
        }
        let angles = chart
            .kinds()
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == CoordKind::Angle)
            .map(|(i, _)| i)
            .collect();
        PolyFieldJson {
            dim: chart.dim(),
            kind,
            angles,
            components,
        }
    }

    pub fn from_form(chart: &Chart, form: &Form) -> Self {
        let kind = match form.degree() {
            0 => FieldKind::Scalar,
            1 => FieldKind::OneForm,
            2 => FieldKind::TwoForm,
            _ => FieldKind::ThreeForm,
        };
        Self::from_polys(chart, kind, form.components())
    }
}

/// A pair `(X, α)`; either part may be omitted and is then zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<PolyFieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<PolyFieldJson>,
}

impl SectionJson {
    /// The chart declared by the section's fields; both parts must agree.
    pub fn chart(&self, pointer: &str) -> SpecResult<Option<Chart>> {
        let v = self.vector.as_ref().map(|f| f.chart(&format!("{pointer}/vector"))).transpose()?;
        let a = self.form.as_ref().map(|f| f.chart(&format!("{pointer}/form"))).transpose()?;
        match (v, a) {
            (Some(v), Some(a)) if v != a => Err(schema_err(pointer, "vector and form live on different charts")),
            (v, a) => Ok(v.or(a)),
        }
    }

    pub fn section(&self, chart: &Chart, pointer: &str) -> SpecResult<Section> {
        if let Some(c) = self.chart(pointer)? {
            if c != *chart {
                return Err(schema_err(pointer, "section lives on a different chart"));
            }
        }
        let x = match &self.vector {
            Some(v) => v.vector_field(&format!("{pointer}/vector"))?,
            None => VectorField::zero(chart),
        };
        let alpha = match &self.form {
            Some(f) => {
                let p = format!("{pointer}/form");
                f.expect(FieldKind::OneForm, &p)?;
                f.form(&p)?
            }
            None => Form::zero(chart, 1),
        };
        Ok(Section::from_fields(&x, &alpha)?)
    }

    pub fn from_section(chart: &Chart, s: &Section) -> Self {
        SectionJson {
            vector: Some(PolyFieldJson::from_polys(chart, FieldKind::Vector, &s.vector)),
            form: Some(PolyFieldJson::from_polys(chart, FieldKind::OneForm, &s.form)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> PolyFieldJson {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn two_form_round_trip() {
        let f = parse(r#"{"dim": 3, "kind": "two_form", "components": {"1,2": {"(1,0,0)": 1.0}}}"#);
        let w = f.form("").unwrap();
        let chart = Chart::euclidean(3);
        let x1 = Poly::var(3, 0);
        assert_eq!(w.component(&[1, 2]), x1);
        assert_eq!(w.component(&[2, 1]), -&x1);
        let back = PolyFieldJson::from_form(&chart, &w);
        assert_eq!(back, f);
    }

    #[test]
    fn angle_chart_uses_cos_sin_variables() {
        let f = parse(r#"{"dim": 2, "kind": "vector", "angles": [1], "components": {"0": {"(0,1,0)": 2.0}}}"#);
        let chart = f.chart("").unwrap();
        assert_eq!(chart.nvars(), 3);
        let x = f.vector_field("").unwrap();
        assert_eq!(x.comps[0], chart.cos(1).unwrap().scale(2.0));
    }

    #[test]
    fn structural_errors_carry_pointers() {
        let bad_order = parse(r#"{"dim": 3, "kind": "two_form", "components": {"2,1": {"(0,0,0)": 1.0}}}"#);
        match bad_order.form("/omega") {
            Err(super::super::SpecError::Schema { pointer, .. }) => assert_eq!(pointer, "/omega/components/2,1"),
            other => panic!("{other:?}"),
        }
        let bad_mono = parse(r#"{"dim": 2, "kind": "one_form", "components": {"0": {"(1,0,0)": 1.0}}}"#);
        assert!(bad_mono.form("").is_err());
        let unknown = serde_json::from_str::<PolyFieldJson>(r#"{"dim": 2, "kind": "one_form", "extra": 1}"#);
        assert!(unknown.is_err());
    }

    #[test]
    fn scalar_uses_empty_key() {
        let f = parse(r#"{"dim": 2, "kind": "scalar", "components": {"": {"(1,1)": 3.0}}}"#);
        assert_eq!(f.scalar("").unwrap(), Poly::monomial(vec![1, 1], 3.0));
    }
}
