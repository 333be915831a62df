//! One function per subcommand, each returning a JSON report and a verdict.

use std::path::Path;

use serde_json::{json, Value};

use dirackit_core::calculus::dirac_field::{sample_points, DEFAULT_BUDGET};
use dirackit_core::calculus::{Chart, CoordKind, LocalAlgebroid, Section, Verdict};
use dirackit_core::dirac::{LinearDirac, Status};
use dirackit_core::limits::DiracSequence;
use dirackit_core::mechanics::{self, diagnostics, integrate};
use dirackit_core::schema::{
    BracketSpec, ConstructionSpec, DiracFieldSpec, FieldKind, PolyFieldJson, SectionJson, SequenceSpec, SystemSpec,
};

use crate::io::{write_atomic, Failure};

/// Residual bound for the graph-recovery and quotient-inverse checks.
pub const RECOVERY_TOL: f64 = 1e-9;

pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    pub summary: String,
}

fn structure_json(d: &LinearDirac) -> Value {
    json!({
        "dimE": d.space().dim_e(),
        "dimEflat": d.space().dim_eflat(),
        "status": d.status(),
        "D": d.subspace(),
        "D_perp": d.orthogonal(),
        "diagnostics": d.diagnostics(),
    })
}

pub fn construct(spec: &ConstructionSpec, tol: f64) -> Result<Outcome, Failure> {
    let d = spec.build(tol, "")?;
    let passed = d.is_certified();
    let mut report = structure_json(&d);
    report["tol"] = json!(tol);
    Ok(Outcome {
        summary: format!("status {:?}, dim D = {}", d.status(), d.dim()),
        report,
        passed,
    })
}

pub fn verify(spec: &ConstructionSpec, tol: f64) -> Result<Outcome, Failure> {
    let d = spec.build(tol, "")?;
    let mut report = structure_json(&d);
    report["tol"] = json!(tol);
    if d.status() != Status::Certified {
        return Ok(Outcome {
            summary: format!("status {:?}", d.status()),
            report,
            passed: false,
        });
    }
    let kernels = d.kernel_report()?;
    let tensors = d.induced_tensors()?;
    let classes = d.classify()?;
    let bound = RECOVERY_TOL.max(tol);
    let checks = json!({
        "kernel_relations": kernels.holds,
        "omega_skew": tensors.omega_skew_residual <= bound,
        "quotient_pairing": tensors.quotient_pairing_residual <= bound,
        "graph_recovery": tensors.graph_recovery_residual <= bound,
        "quotient_inverse": tensors.quotient_inverse_residual <= bound,
        "equivalence_groups": classes.contradictions == 0,
    });
    let passed = checks.as_object().expect("object").values().all(|v| v == &Value::Bool(true));
    report["kernel_report"] = json!(kernels);
    report["induced_tensors"] = json!(tensors);
    report["classify"] = json!(classes);
    report["checks"] = checks;
    Ok(Outcome {
        summary: format!("status Certified, cases {:?}, checks {}", classes.cases, if passed { "pass" } else { "FAIL" }),
        report,
        passed,
    })
}

fn chart_json(chart: &Chart) -> Value {
    let angles: Vec<usize> = chart
        .kinds()
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == CoordKind::Angle)
        .map(|(i, _)| i)
        .collect();
    json!({ "dim": chart.dim(), "angles": angles })
}

fn section_at(chart: &Chart, s: &Section, x: &[f64]) -> Value {
    json!({
        "vector": s.vector_field().eval(chart, x),
        "form": s.one_form().eval(chart, x),
    })
}

pub fn bracket(spec: &BracketSpec, at: Option<&[f64]>, tol: f64) -> Result<Outcome, Failure> {
    let (chart, sections) = spec.build()?;
    if let Some(x) = at {
        if x.len() != chart.dim() {
            return Err(Failure::new(
                crate::io::EXIT_MALFORMED,
                format!("--at has {} coordinates, the chart has {}", x.len(), chart.dim()),
            ));
        }
    }
    let alg = LocalAlgebroid::tangent(&chart);
    let r = alg.courant_report(&sections[0], &sections[1], tol)?;
    let mut passed = r.holds;
    let mut report = json!({
        "chart": chart_json(&chart),
        "bracket": SectionJson::from_section(&chart, &r.bracket),
        "alt": SectionJson::from_section(&chart, &r.alt),
        "isotropic": r.isotropic,
        "forms_residual": r.forms_residual,
        "correction_residual": r.correction_residual,
        "holds": r.holds,
        "tol": tol,
    });
    let tensor = match sections.get(2) {
        None => None,
        Some(c) => {
            let t = alg.tensor_report(&sections[0], &sections[1], c, tol)?;
            passed &= t.holds;
            report["tensor"] = json!({
                "value": PolyFieldJson::from_polys(&chart, FieldKind::Scalar, std::slice::from_ref(&t.value)),
                "isotropic": t.isotropic,
                "lemma_residual": t.lemma_residual,
                "holds": t.holds,
            });
            Some(t.value)
        }
    };
    if let Some(x) = at {
        let mut values = json!({
            "point": x,
            "bracket": section_at(&chart, &r.bracket, x),
        });
        if let Some(t) = &tensor {
            values["tensor"] = json!(chart.eval(t, x));
        }
        report["at"] = values;
    }
    Ok(Outcome {
        summary: format!(
            "bracket forms {} (residual {:.3e})",
            if r.holds { "agree" } else { "DISAGREE" },
            r.forms_residual
        ),
        report,
        passed,
    })
}

pub fn involutivity(spec: &DiracFieldSpec, samples: usize, seed: u64, budget: Option<usize>, tol: f64) -> Result<Outcome, Failure> {
    let (chart, field) = spec.build()?;
    let points = sample_points(&chart, samples, seed, 1.0);
    let r = field.involutivity_check(&chart, &points, budget.unwrap_or(DEFAULT_BUDGET), seed, tol)?;
    let passed = r.verdict == Verdict::Involutive && r.pointwise_certified;
    let mut report = json!(r);
    report["chart"] = chart_json(&chart);
    report["seed"] = json!(seed);
    Ok(Outcome {
        summary: format!("{:?}, max |T| = {:.3e}", r.verdict, r.max_abs_tensor),
        report,
        passed,
    })
}

pub fn limits(spec: &SequenceSpec, tol: f64) -> Result<Outcome, Failure> {
    let seq: DiracSequence = spec.build(tol)?;
    let validation = seq.validate_any()?;
    let mut report = json!({ "validation": validation, "tol": tol });
    let mut passed = validation.valid;
    let mut summary = match validation.first_violating_level {
        Some(l) => format!("invalid, first violation at level {l}"),
        None => "valid".to_string(),
    };
    if validation.valid {
        let coherence = seq.coherence_report()?;
        passed &= coherence.coherent;
        summary.push_str(&format!(
            ", Ω residual {:.3e}{}",
            coherence.max_omega_residual,
            if coherence.coherent { "" } else { " (incoherent)" }
        ));
        report["coherence"] = json!(coherence);
    }
    Ok(Outcome { report, passed, summary })
}

pub fn simulate(spec: &SystemSpec, out: Option<&Path>, tol: f64) -> Result<Outcome, Failure> {
    let setup = spec.build(tol)?;
    let traj = integrate(&setup.system, &setup.z0, setup.h, setup.horizon, setup.options)?;
    let diag = diagnostics(&traj)?;
    if let Some(path) = out {
        write_atomic(path, |w| {
            traj.write_csv(w).map_err(|e| std::io::Error::other(e.to_string()))
        })?;
    }
    let passed = diag.passes(tol);
    let last = traj.len() - 1;
    let report = json!({
        "system": spec.name,
        "params": setup.system.params,
        "q_names": traj.q_names,
        "p_names": traj.p_names,
        "h": setup.h,
        "T": setup.horizon,
        "z0": setup.z0,
        "final": { "t": traj.times[last], "q": traj.q[last], "p": traj.p[last] },
        "diagnostics": diag,
        "tol": tol,
        "passed": passed,
        "csv": out.map(|p| p.display().to_string()),
    });
    Ok(Outcome {
        summary: format!(
            "{} steps, energy drift {:.3e}, constraint {:.3e}, membership {:.3e}",
            diag.steps, diag.max_energy_drift, diag.max_constraint_residual, diag.max_membership_residual
        ),
        report,
        passed,
    })
}

/// Stock systems runnable by name.
pub fn stock_system(name: &str) -> Result<SystemSpec, Failure> {
    mechanics::default_params(name)?;
    Ok(SystemSpec::stock(name))
}
