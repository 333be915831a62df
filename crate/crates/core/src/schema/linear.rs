//! Construction specs for linear Dirac structures and sequences of them.

use serde::{Deserialize, Serialize};

use super::{matrix, ragged_check, schema_err, SpecResult};
use crate::dirac::{self, LinearDirac};
use crate::limits::{DiracSequence, SequenceKind};
use crate::pairing::PontryaginSpace;
use crate::subspace::Subspace;

/// `E = ℝ^dimE` with `E♭` given by pairing rows; no pairing means the full dual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<Vec<f64>>>,
}

impl SpaceSpec {
    pub fn build(&self, tol: f64, pointer: &str) -> SpecResult<PontryaginSpace> {
        match &self.pairing {
            None => Ok(PontryaginSpace::full_dual(self.dim_e, tol)),
            Some(rows) => {
                let b = matrix(rows, rows.len(), self.dim_e, &format!("{pointer}/pairing"))?;
                Ok(PontryaginSpace::new(b, tol)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Construct {
    /// `Q` has `dim E♭` rows of length `dim E`; `F` lists spanning vectors of `E`.
    GraphFlat {
        #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
        q: Option<Vec<Vec<f64>>>,
        #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
        f: Option<Vec<Vec<f64>>>,
    },
    /// `Pmap` has `dim E` rows of length `dim E♭`.
    GraphSharp {
        #[serde(rename = "Pmap")]
        pmap: Vec<Vec<f64>>,
    },
    DirectSum { parts: Vec<ConstructionSpec> },
    /// Spanning vectors `(u, α)` of `D` in `E ⊕ E♭` coordinates.
    Explicit { vectors: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    pub construct: Construct,
}

impl ConstructionSpec {
    pub fn build(&self, tol: f64, pointer: &str) -> SpecResult<LinearDirac> {
        let cptr = format!("{pointer}/construct");
        if let Construct::DirectSum { parts } = &self.construct {
            if self.space.is_some() {
                return Err(schema_err(
                    format!("{pointer}/space"),
                    "direct_sum takes its spaces from the parts",
                ));
            }
            if parts.len() < 2 {
                return Err(schema_err(format!("{cptr}/parts"), "direct_sum needs at least 2 parts"));
            }
            let mut acc = parts[0].build(tol, &format!("{cptr}/parts/0"))?;
            for (i, p) in parts.iter().enumerate().skip(1) {
                let next = p.build(tol, &format!("{cptr}/parts/{i}"))?;
                acc = dirac::direct_sum(&acc, &next)?;
            }
            return Ok(acc);
        }
        let space = self
            .space
            .as_ref()
            .ok_or_else(|| schema_err(format!("{pointer}/space"), "missing field"))?
            .build(tol, &format!("{pointer}/space"))?;
        let (n, m) = (space.dim_e(), space.dim_eflat());
        match &self.construct {
            Construct::GraphFlat { q, f } => {
                let q = q.as_ref().map(|rows| matrix(rows, m, n, &format!("{cptr}/Q"))).transpose()?;
                let f = match f {
                    None => None,
                    Some(vs) => {
                        ragged_check(vs, &format!("{cptr}/F"))?;
                        Some(Subspace::span(vs, n, tol).map_err(|e| schema_err(format!("{cptr}/F"), e.to_string()))?)
                    }
                };
                Ok(dirac::construct_graph_flat(q.as_ref(), f.as_ref(), &space)?)
            }
            Construct::GraphSharp { pmap } => {
                let p = matrix(pmap, n, m, &format!("{cptr}/Pmap"))?;
                Ok(dirac::construct_graph_sharp(&p, &space)?)
            }
            Construct::Explicit { vectors } => {
                for (i, v) in vectors.iter().enumerate() {
                    if v.len() != n + m {
                        return Err(schema_err(
                            format!("{cptr}/vectors/{i}"),
                            format!("expected {} entries, got {}", n + m, v.len()),
                        ));
                    }
                }
                Ok(dirac::construct_explicit(vectors, &space)?)
            }
            Construct::DirectSum { .. } => unreachable!("handled above"),
        }
    }
}

/// Links are matrices given by rows: `ε_n` is `dim E_(n+1) × dim E_n`,
/// `λ_(n+1)` is `dim E_n × dim E_(n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub levels: Vec<ConstructionSpec>,
    pub links: Vec<Vec<Vec<f64>>>,
}

impl SequenceSpec {
    pub fn build(&self, tol: f64) -> SpecResult<DiracSequence> {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| l.build(tol, &format!("/levels/{i}")))
            .collect::<SpecResult<Vec<_>>>()?;
        let links = self
            .links
            .iter()
            .enumerate()
            .map(|(i, rows)| ragged_check(rows, &format!("/links/{i}")))
            .collect::<SpecResult<Vec<_>>>()?;
        Ok(DiracSequence::new(self.kind, levels, links)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::SpecError;
    use super::*;
    use crate::dirac::{Hypothesis, Status};

    fn spec(s: &str) -> ConstructionSpec {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn partial_annihilator_example() {
        let s = spec(
            r#"{"space": {"dimE": 3, "pairing": [[1,0,0],[0,1,0]]},
                "construct": {"kind": "graph_flat", "F": [[0,1,0],[0,0,1]]}}"#,
        );
        let d = s.build(1e-10, "").unwrap();
        assert_eq!(d.status(), Status::Certified);
        assert_eq!(d.dim(), 3);
    }

    #[test]
    fn separation_counterexample() {
        let s = spec(r#"{"space": {"dimE": 2, "pairing": [[0,1]]}, "construct": {"kind": "graph_sharp", "Pmap": [[0],[0]]}}"#);
        let d = s.build(1e-10, "").unwrap();
        assert_eq!(d.status(), Status::IsotropicOnly);
        assert_eq!(d.diagnostics().failed_hypothesis, Some(Hypothesis::SeparationHypothesisFails));
    }

    #[test]
    fn direct_sum_of_symplectic_planes() {
        let plane = r#"{"space": {"dimE": 2}, "construct": {"kind": "graph_flat", "Q": [[0,-1],[1,0]]}}"#;
        let s = spec(&format!(r#"{{"construct": {{"kind": "direct_sum", "parts": [{plane}, {plane}]}}}}"#));
        let d = s.build(1e-10, "").unwrap();
        assert!(d.is_certified());
        assert_eq!(d.dim(), 4);
    }

    #[test]
    fn schema_errors() {
        let e = spec(r#"{"space": {"dimE": 2}, "construct": {"kind": "graph_flat", "Q": [[0,-1]]}}"#)
            .build(1e-10, "")
            .unwrap_err();
        assert!(matches!(e, SpecError::Schema { ref pointer, .. } if pointer == "/construct/Q"), "{e:?}");
        let e = spec(r#"{"construct": {"kind": "explicit", "vectors": []}}"#).build(1e-10, "").unwrap_err();
        assert!(matches!(e, SpecError::Schema { ref pointer, .. } if pointer == "/space"));
        let skew = spec(r#"{"space": {"dimE": 2}, "construct": {"kind": "graph_flat", "Q": [[1,0],[0,0]]}}"#);
        assert!(matches!(skew.build(1e-10, ""), Err(SpecError::Domain(_))));
        assert!(serde_json::from_str::<ConstructionSpec>(r#"{"construct": {"kind": "explicit", "vectors": [], "x": 1}}"#).is_err());
        assert!(serde_json::from_str::<ConstructionSpec>(r#"{"space": {"dimE": -1}, "construct": {"kind": "explicit", "vectors": []}}"#).is_err());
    }

    #[test]
    fn constant_sequence_validates() {
        let plane = r#"{"space": {"dimE": 2}, "construct": {"kind": "graph_flat", "Q": [[0,-1],[1,0]]}}"#;
        let s: SequenceSpec = serde_json::from_str(&format!(
            r#"{{"kind": "ascending", "levels": [{plane}, {plane}, {plane}], "links": [[[1,0],[0,1]], [[1,0],[0,1]]]}}"#
        ))
        .unwrap();
        let seq = s.build(1e-10).unwrap();
        assert!(seq.validate_any().unwrap().valid);
    }
}
