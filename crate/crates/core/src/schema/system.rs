//! Dirac-field, bracket and mechanical-system specs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::field::{PolyFieldJson, SectionJson};
use super::{schema_err, SpecResult};
use crate::calculus::{Chart, DiracField, Section};
use crate::mechanics::{self, phase_chart, ConstrainedSystem, IntegrateOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiracFieldSpec {
    BivectorGraph {
        pi: PolyFieldJson,
    },
    TwoFormGraph {
        omega: PolyFieldJson,
    },
    /// `F = ∩ ker ωⁱ` plus its annihilator, optionally twisted by a 2-form `Q`.
    DistributionPlusAnnihilator {
        constraints: Vec<PolyFieldJson>,
        #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
        q: Option<PolyFieldJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spanning: Option<Vec<PolyFieldJson>>,
    },
}

fn same_chart(chart: &Chart, field: &PolyFieldJson, pointer: &str) -> SpecResult<()> {
    if field.chart(pointer)? == *chart {
        Ok(())
    } else {
        Err(schema_err(pointer, "field lives on a different chart"))
    }
}

impl DiracFieldSpec {
    pub fn build(&self) -> SpecResult<(Chart, DiracField)> {
        match self {
            DiracFieldSpec::BivectorGraph { pi } => Ok((pi.chart("/pi")?, DiracField::BivectorGraph(pi.bivector("/pi")?))),
            DiracFieldSpec::TwoFormGraph { omega } => {
                let w = omega.form("/omega")?;
                if w.degree() != 2 {
                    return Err(schema_err("/omega/kind", "expected two_form"));
                }
                Ok((omega.chart("/omega")?, DiracField::TwoFormGraph(w)))
            }
            DiracFieldSpec::DistributionPlusAnnihilator { constraints, q, spanning } => {
                let chart = match (constraints.first(), q) {
                    (Some(c), _) => c.chart("/constraints/0")?,
                    (None, Some(q)) => q.chart("/Q")?,
                    (None, None) => return Err(schema_err("/constraints", "cannot infer the chart from an empty list")),
                };
                let mut forms = Vec::with_capacity(constraints.len());
                for (i, c) in constraints.iter().enumerate() {
                    let p = format!("/constraints/{i}");
                    same_chart(&chart, c, &p)?;
                    let f = c.form(&p)?;
                    if f.degree() != 1 {
                        return Err(schema_err(format!("{p}/kind"), "expected one_form"));
                    }
                    forms.push(f);
                }
                let q = match q {
                    None => None,
                    Some(q) => {
                        same_chart(&chart, q, "/Q")?;
                        let f = q.form("/Q")?;
                        if f.degree() != 2 {
                            return Err(schema_err("/Q/kind", "expected two_form"));
                        }
                        Some(f)
                    }
                };
                let spanning = match spanning {
                    None => None,
                    Some(v) => Some(
                        v.iter()
                            .enumerate()
                            .map(|(i, x)| {
                                let p = format!("/spanning/{i}");
                                same_chart(&chart, x, &p)?;
                                x.vector_field(&p)
                            })
                            .collect::<SpecResult<Vec<_>>>()?,
                    ),
                };
                Ok((
                    chart,
                    DiracField::DistributionPlusAnnihilator {
                        constraints: forms,
                        q,
                        spanning,
                    },
                ))
            }
        }
    }
}

/// Two sections whose Courant bracket is requested, and an optional third
/// for the Courant tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub a: SectionJson,
    pub b: SectionJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<SectionJson>,
}

impl BracketSpec {
    pub fn build(&self) -> SpecResult<(Chart, Vec<Section>)> {
        let mut all = vec![("/a", &self.a), ("/b", &self.b)];
        if let Some(c) = &self.c {
            all.push(("/c", c));
        }
        let mut chart = None;
        for (p, s) in &all {
            if let Some(c) = s.chart(p)? {
                match &chart {
                    None => chart = Some(c),
                    Some(prev) if *prev != c => return Err(schema_err(*p, "section lives on a different chart")),
                    Some(_) => {}
                }
            }
        }
        let chart = chart.ok_or_else(|| schema_err("", "no field declares the chart"))?;
        let sections = all
            .iter()
            .map(|(p, s)| s.section(&chart, p))
            .collect::<SpecResult<Vec<_>>>()?;
        Ok((chart, sections))
    }
}

/// A user-defined system: constraints on the configuration chart and a
/// Hamiltonian on the phase chart (`dim` configuration coordinates followed by
/// `dim` momenta, same angles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSystemSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_names: Option<Vec<String>>,
    #[serde(default)]
    pub constraints: Vec<PolyFieldJson>,
    pub hamiltonian: PolyFieldJson,
}

fn default_h() -> f64 {
    1e-3
}

fn default_horizon() -> f64 {
    10.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSystemSpec>,
    #[serde(default = "yes")]
    pub check_admissible: bool,
}

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct SimulationSetup {
    pub system: ConstrainedSystem,
    pub z0: Vec<f64>,
    pub h: f64,
    pub horizon: f64,
    pub options: IntegrateOptions,
}

impl SystemSpec {
    /// The stock acceptance run of a named system.
    pub fn stock(name: &str) -> Self {
        SystemSpec {
            name: name.to_string(),
            params: None,
            z0: None,
            h: default_h(),
            horizon: default_horizon(),
            custom: None,
            check_admissible: true,
        }
    }

    pub fn build(&self, tol: f64) -> SpecResult<SimulationSetup> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(schema_err("/h", "step must be positive and finite"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(schema_err("/T", "horizon must be non-negative and finite"));
        }
        let (system, default_z0) = match &self.custom {
            Some(c) => {
                if self.params.is_some() {
                    return Err(schema_err("/params", "custom systems take no parameters"));
                }
                (c.build()?, None)
            }
            None => {
                let params = match &self.params {
                    Some(p) => p.clone(),
                    None => mechanics::default_params(&self.name)?,
                };
                let sys = mechanics::build_system(&self.name, &params)?;
                let z0 = mechanics::default_initial_state(&self.name, &params)?;
                (sys, Some(z0))
            }
        };
        let z0 = match (&self.z0, default_z0) {
            (Some(z), _) => z.clone(),
            (None, Some(z)) => z,
            (None, None) => return Err(schema_err("/z0", "missing field")),
        };
        if z0.len() != 2 * system.dim() {
            return Err(schema_err("/z0", format!("expected {} entries, got {}", 2 * system.dim(), z0.len())));
        }
        Ok(SimulationSetup {
            system,
            z0,
            h: self.h,
            horizon: self.horizon,
            options: IntegrateOptions {
                check_admissible: self.check_admissible,
                tol,
            },
        })
    }
}

impl CustomSystemSpec {
    fn build(&self) -> SpecResult<ConstrainedSystem> {
        let q = super::field::chart_for(self.dim, &self.angles, "/custom")?;
        let mut forms = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let p = format!("/custom/constraints/{i}");
            same_chart(&q, c, &p)?;
            let f = c.form(&p)?;
            if f.degree() != 1 {
                return Err(schema_err(format!("{p}/kind"), "expected one_form"));
            }
            forms.push(f);
        }
        same_chart(&phase_chart(&q), &self.hamiltonian, "/custom/hamiltonian")?;
        let h = self.hamiltonian.scalar("/custom/hamiltonian")?;
        let names = match &self.q_names {
            Some(n) if n.len() != self.dim => {
                return Err(schema_err("/custom/q_names", format!("expected {} names", self.dim)));
            }
            Some(n) => n.clone(),
            None => (1..=self.dim).map(|i| format!("q{i}")).collect(),
        };
        Ok(ConstrainedSystem::new("custom", q, names, forms, h, BTreeMap::new())?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::SpecError;
    use super::*;
    use crate::calculus::Verdict;
    use crate::calculus::dirac_field::sample_points;
    use crate::error::Error;

    #[test]
    fn involutive_custom_distribution() {
        let s: DiracFieldSpec = serde_json::from_str(
            r#"{"kind": "distribution_plus_annihilator",
                "constraints": [{"dim": 2, "kind": "one_form", "components": {"0": {"(0,0)": 1.0}}}]}"#,
        )
        .unwrap();
        let (chart, field) = s.build().unwrap();
        let pts = sample_points(&chart, 10, 0, 1.0);
        let r = field.involutivity_check(&chart, &pts, 10, 0, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Involutive);
    }

    #[test]
    fn custom_system_with_one_constraint() {
        let s: SystemSpec = serde_json::from_str(
            r#"{"name": "slide", "z0": [0, 0, 0, 1], "h": 0.01, "T": 0.1,
                "custom": {"dim": 2,
                  "constraints": [{"dim": 2, "kind": "one_form", "components": {"0": {"(0,0)": 1.0}}}],
                  "hamiltonian": {"dim": 4, "kind": "scalar", "components": {"": {"(0,0,2,0)": 0.5, "(0,0,0,2)": 0.5}}}}}"#,
        )
        .unwrap();
        let setup = s.build(1e-8).unwrap();
        assert_eq!(setup.system.num_constraints(), 1);
        let t = mechanics::integrate(&setup.system, &setup.z0, setup.h, setup.horizon, setup.options).unwrap();
        assert!((t.q.last().unwrap()[1] - 0.1).abs() < 1e-12);
        assert_eq!(t.q.last().unwrap()[0], 0.0);
    }

    #[test]
    fn stock_spec_and_errors() {
        let setup = SystemSpec::stock("rolling-disk").build(1e-8).unwrap();
        assert_eq!(setup.z0.len(), 8);
        let mut s = SystemSpec::stock("pendulum");
        assert!(matches!(s.build(1e-8), Err(SpecError::Domain(Error::UnknownSystem(_)))));
        s = SystemSpec::stock("lc-circuit");
        s.params = Some(BTreeMap::from([
            ("l".into(), 1.0),
            ("c1".into(), -1.0),
            ("c2".into(), 1.0),
            ("c3".into(), 1.0),
        ]));
        assert!(matches!(s.build(1e-8), Err(SpecError::Domain(Error::NonPositiveParameter { .. }))));
        let mut s = SystemSpec::stock("lc-circuit");
        s.z0 = Some(vec![0.0; 3]);
        assert!(matches!(s.build(1e-8), Err(SpecError::Schema { ref pointer, .. }) if pointer == "/z0"));
    }
}
