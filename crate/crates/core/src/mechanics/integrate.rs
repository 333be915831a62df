//! Classical RK4 with per-stage multiplier solves and post-step projection.

use std::io::Write;

use serde::Serialize;

use super::{ConstrainedSystem, MEMBERSHIP_TOL, PROJECTION_TOL};
use crate::calculus::CoordKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Reject initial states whose constraint residual exceeds `tol`.
    pub check_admissible: bool,
    pub tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            check_admissible: true,
            tol: MEMBERSHIP_TOL,
        }
    }
}

/// Time-stamped chart states with per-step diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub q_names: Vec<String>,
    pub p_names: Vec<String>,
    pub times: Vec<f64>,
    /// Chart coordinates; angles are unwrapped to a continuous branch.
    pub q: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    /// Chart velocities returned by the multiplier solve.
    pub qdot: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub res_constraint: Vec<f64>,
    pub res_dirac: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns `t, q…, p…, energy, res_constraint, res_dirac, lambda…`
    /// with shortest round-trip decimal formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.lambda.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend(self.q_names.iter().cloned());
        header.extend(self.p_names.iter().cloned());
        header.extend(["energy", "res_constraint", "res_dirac"].map(String::from));
        header.extend((1..=k).map(|i| format!("lambda{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut row = vec![self.times[i]];
            row.extend(&self.q[i]);
            row.extend(&self.p[i]);
            row.extend([self.energy[i], self.res_constraint[i], self.res_dirac[i]]);
            row.extend(&self.lambda[i]);
            w.write_record(row.iter().map(|&v| round_trip(v))).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn round_trip(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialise")
    } else {
        v.to_string()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

/// Chart coordinates of a ring state; `prev` selects the angle branch.
fn chart_state(sys: &ConstrainedSystem, y: &[f64], prev: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
    let mut q = Vec::with_capacity(sys.dim());
    let mut o = 0;
    for (i, k) in sys.q_chart().kinds().iter().enumerate() {
        match k {
            CoordKind::Linear => {
                q.push(y[o]);
                o += 1;
            }
            CoordKind::Angle => {
                let mut phi = y[o + 1].atan2(y[o]);
                if let Some(prev) = prev {
                    let tau = std::f64::consts::TAU;
                    phi += tau * ((prev[i] - phi) / tau).round();
                }
                q.push(phi);
                o += 2;
            }
        }
    }
    (q, y[o..].to_vec())
}

/// Ring-variable rates from chart velocities.
fn ring_rates(sys: &ConstrainedSystem, y: &[f64], qdot: &[f64], pdot: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut o = 0;
    for (i, k) in sys.q_chart().kinds().iter().enumerate() {
        match k {
            CoordKind::Linear => {
                out.push(qdot[i]);
                o += 1;
            }
            CoordKind::Angle => {
                out.push(-y[o + 1] * qdot[i]);
                out.push(y[o] * qdot[i]);
                o += 2;
            }
        }
    }
    out.extend_from_slice(pdot);
    out
}

fn renormalize_angles(sys: &ConstrainedSystem, y: &mut [f64]) {
    let mut o = 0;
    for k in sys.q_chart().kinds() {
        match k {
            CoordKind::Linear => o += 1,
            CoordKind::Angle => {
                let r = y[o].hypot(y[o + 1]);
                y[o] /= r;
                y[o + 1] /= r;
                o += 2;
            }
        }
    }
}

fn field(sys: &ConstrainedSystem, y: &[f64]) -> Result<Vec<f64>> {
    let r = sys.dynamics_rhs(y)?;
    Ok(ring_rates(sys, y, r.qdot.as_slice(), r.pdot.as_slice()))
}

/// Integrates from the chart state `z0 = (q, p)` with step `h` up to `horizon`.
pub fn integrate(sys: &ConstrainedSystem, z0: &[f64], h: f64, horizon: f64, opts: IntegrateOptions) -> Result<Trajectory> {
    if !(h > 0.0) || !(horizon >= 0.0) || !h.is_finite() || !horizon.is_finite() {
        return Err(Error::Invalid(format!("step {h} and horizon {horizon} must be positive and finite")));
    }
    let steps = (horizon / h).round() as usize;
    let mut y = sys.ring_state(z0)?;
    let mut traj = Trajectory {
        q_names: sys.q_names.clone(),
        p_names: sys.p_names(),
        times: Vec::with_capacity(steps + 1),
        q: Vec::with_capacity(steps + 1),
        p: Vec::with_capacity(steps + 1),
        qdot: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        res_constraint: Vec::with_capacity(steps + 1),
        res_dirac: Vec::with_capacity(steps + 1),
        lambda: Vec::with_capacity(steps + 1),
    };
    let mut prev_q: Option<Vec<f64>> = None;
    for step in 0..=steps {
        let rhs = sys.dynamics_rhs(&y)?;
        let res_c = sys.constraint_residual(&y, &rhs.qdot).max(rhs.consistency_residual);
        if step == 0 && opts.check_admissible && res_c > opts.tol {
            return Err(Error::InadmissibleState { residual: res_c });
        }
        let (q, p) = chart_state(sys, &y, prev_q.as_deref());
        traj.times.push(step as f64 * h);
        traj.energy.push(sys.energy(&y));
        traj.res_constraint.push(res_c);
        traj.res_dirac.push(sys.membership_residual(&y, &rhs)?);
        traj.lambda.push(rhs.lambda.iter().copied().collect());
        traj.qdot.push(rhs.qdot.iter().copied().collect());
        traj.q.push(q.clone());
        traj.p.push(p);
        prev_q = Some(q);
        if step == steps {
            break;
        }
        let k1 = ring_rates(sys, &y, rhs.qdot.as_slice(), rhs.pdot.as_slice());
        let shifted = |c: f64, k: &[f64]| y.iter().zip(k).map(|(a, b)| a + c * b).collect::<Vec<_>>();
        let k2 = field(sys, &shifted(0.5 * h, &k1))?;
        let k3 = field(sys, &shifted(0.5 * h, &k2))?;
        let k4 = field(sys, &shifted(h, &k3))?;
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        renormalize_angles(sys, &mut y);
        sys.project_momenta(&mut y, PROJECTION_TOL);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub steps: usize,
    pub max_energy_drift: f64,
    pub mean_energy_drift: f64,
    pub max_constraint_residual: f64,
    pub mean_constraint_residual: f64,
    pub first_constraint_residual: f64,
    pub max_membership_residual: f64,
    pub mean_membership_residual: f64,
    pub max_multiplier_norm: f64,
    pub mean_multiplier_norm: f64,
}

impl DiagnosticsReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_energy_drift <= tol && self.max_constraint_residual <= tol && self.max_membership_residual <= tol
    }
}

pub fn diagnostics(traj: &Trajectory) -> Result<DiagnosticsReport> {
    if traj.is_empty() {
        return Err(Error::Invalid("empty trajectory".into()));
    }
    let n = traj.len() as f64;
    let e0 = traj.energy[0];
    let drift: Vec<f64> = traj.energy.iter().map(|e| (e - e0).abs()).collect();
    let norms: Vec<f64> = traj.lambda.iter().map(|l| l.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    Ok(DiagnosticsReport {
        steps: traj.len() - 1,
        max_energy_drift: max(&drift),
        mean_energy_drift: mean(&drift),
        max_constraint_residual: max(&traj.res_constraint),
        mean_constraint_residual: mean(&traj.res_constraint),
        first_constraint_residual: traj.res_constraint[0],
        max_membership_residual: max(&traj.res_dirac),
        mean_membership_residual: mean(&traj.res_dirac),
        max_multiplier_norm: max(&norms),
        mean_multiplier_norm: mean(&norms),
    })
}
