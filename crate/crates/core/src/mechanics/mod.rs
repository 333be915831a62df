//! Induced Dirac structures on `T*Q` and implicit Hamiltonian simulation of
//! systems with linear velocity constraints.

mod dynamics;
mod integrate;
pub mod reference;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{Chart, CoordKind, Form, Poly};
use crate::error::{Error, Result};
use crate::linalg;

pub use dynamics::{induced_dirac_at, Rhs};
pub use integrate::{diagnostics, integrate, DiagnosticsReport, IntegrateOptions, Trajectory};

/// Residual threshold for constraint and membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Target accuracy of the post-step projection.
pub const PROJECTION_TOL: f64 = 1e-12;

/// Configuration chart, constraint 1-forms `ωⁱ(q)` and Hamiltonian `H(q, p)`.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub name: String,
    pub q_names: Vec<String>,
    q_chart: Chart,
    phase: Chart,
    /// Constraint forms with coefficients in the phase ring.
    constraints: Vec<Form>,
    hamiltonian: Poly,
    pub params: BTreeMap<String, f64>,
    hp: Vec<Poly>,
    hq: Vec<Poly>,
    hpp: Vec<Vec<Poly>>,
    hpq: Vec<Vec<Poly>>,
    hqq: Vec<Vec<Poly>>,
    hqp: Vec<Vec<Poly>>,
    /// `dw[l][i][j] = ∂_l ωⁱ_j`.
    dw: Vec<Vec<Vec<Poly>>>,
}

/// Chart `T*Q`: the coordinates of `Q` followed by linear momenta.
pub fn phase_chart(q_chart: &Chart) -> Chart {
    let mut kinds = q_chart.kinds().to_vec();
    kinds.extend(std::iter::repeat_n(CoordKind::Linear, q_chart.dim()));
    Chart::new(kinds)
}

impl ConstrainedSystem {
    /// `constraints` have coefficients in the ring of `q_chart`;
    /// `hamiltonian` lives in the ring of [`phase_chart`].
    pub fn new(
        name: &str,
        q_chart: Chart,
        q_names: Vec<String>,
        constraints: Vec<Form>,
        hamiltonian: Poly,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = q_chart.dim();
        let phase = phase_chart(&q_chart);
        if q_names.len() != n {
            return Err(Error::DimensionMismatch(format!("{} names for {n} coordinates", q_names.len())));
        }
        if hamiltonian.nvars() != phase.nvars() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian has {} variables, the phase chart has {}",
                hamiltonian.nvars(),
                phase.nvars()
            )));
        }
        let map: Vec<usize> = (0..q_chart.nvars()).collect();
        let mut lifted = Vec::with_capacity(constraints.len());
        for c in &constraints {
            if c.degree() != 1 || c.dim() != n || c.components().iter().any(|p| p.nvars() != q_chart.nvars()) {
                return Err(Error::DimensionMismatch("constraints must be 1-forms on the configuration chart".into()));
            }
            lifted.push(Form::one_form(
                c.components().iter().map(|p| p.embed(phase.nvars(), &map)).collect(),
            ));
        }
        let dq = |f: &Poly, i: usize| phase.partial(i, f);
        let dp = |f: &Poly, i: usize| phase.partial(n + i, f);
        let hp: Vec<Poly> = (0..n).map(|i| dp(&hamiltonian, i)).collect();
        let hq: Vec<Poly> = (0..n).map(|i| dq(&hamiltonian, i)).collect();
        let hpp = (0..n).map(|i| (0..n).map(|j| dp(&hp[i], j)).collect()).collect();
        let hpq = (0..n).map(|i| (0..n).map(|j| dq(&hp[i], j)).collect()).collect();
        let hqq = (0..n).map(|i| (0..n).map(|j| dq(&hq[i], j)).collect()).collect();
        let hqp = (0..n).map(|i| (0..n).map(|j| dp(&hq[i], j)).collect()).collect();
        let dw = (0..n)
            .map(|l| {
                lifted
                    .iter()
                    .map(|c| c.components().iter().map(|p| dq(p, l)).collect())
                    .collect()
            })
            .collect();
        let sys = ConstrainedSystem {
            name: name.to_string(),
            q_names,
            q_chart,
            phase,
            constraints: lifted,
            hamiltonian,
            params,
            hp,
            hq,
            hpp,
            hpq,
            hqq,
            hqp,
            dw,
        };
        sys.validate_rank()?;
        Ok(sys)
    }

    /// Full rank of the constraints at seeded sample configurations.
    fn validate_rank(&self) -> Result<()> {
        let k = self.constraints.len();
        if k == 0 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..16 {
            let q = self.q_chart.random_point(1.0, &mut rng);
            let mut z = q.clone();
            z.extend(std::iter::repeat_n(0.0, self.dim()));
            let w = self.constraint_matrix(&self.phase.ring_point(&z));
            let r = linalg::rank(&w, crate::DEFAULT_TOL, 0.0);
            if r < k {
                return Err(Error::RankDeficientConstraints { rank: r, expected: k });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.q_chart.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn q_chart(&self) -> &Chart {
        &self.q_chart
    }

    pub fn phase_chart(&self) -> &Chart {
        &self.phase
    }

    pub fn constraints(&self) -> &[Form] {
        &self.constraints
    }

    pub fn hamiltonian(&self) -> &Poly {
        &self.hamiltonian
    }

    pub fn p_names(&self) -> Vec<String> {
        self.q_names.iter().map(|q| format!("p_{q}")).collect()
    }

    /// Ring point of a chart state `(q, p)`.
    pub fn ring_state(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != 2 * self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has length {}, expected {}",
                z.len(),
                2 * self.dim()
            )));
        }
        Ok(self.phase.ring_point(z))
    }

    pub fn energy(&self, y: &[f64]) -> f64 {
        self.hamiltonian.eval(y)
    }

    /// Rows `ωⁱ(q)` at a ring state.
    pub fn constraint_matrix(&self, y: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(self.constraints.len(), n, |i, j| self.constraints[i].components()[j].eval(y))
    }
}

fn param(params: &BTreeMap<String, f64>, names: &[&str]) -> Result<f64> {
    let (key, value) = names
        .iter()
        .find_map(|k| params.get(*k).map(|v| (*k, *v)))
        .ok_or_else(|| Error::MissingParameter(names[0].to_string()))?;
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::NonPositiveParameter {
            name: key.to_string(),
            value,
        });
    }
    Ok(value)
}

/// Unit parameters for a stock system.
pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>> {
    let keys: &[&str] = match name {
        "rolling-disk" => &["m", "I", "J", "R"],
        "lc-circuit" => &["l", "c1", "c2", "c3"],
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(keys.iter().map(|k| (k.to_string(), 1.0)).collect())
}

/// The acceptance initial state of a stock system, as `(q, p)`.
pub fn default_initial_state(name: &str, params: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    match name {
        "rolling-disk" => {
            // θ̇(0) = 1, φ̇(0) = 0.5, φ(0) = 0; ẋ = R cos φ θ̇, ẏ = R sin φ θ̇.
            let m = param(params, &["m"])?;
            let i = param(params, &["I"])?;
            let j = param(params, &["J"])?;
            let r = param(params, &["R"])?;
            Ok(vec![0.0, 0.0, 0.0, 0.0, m * r, 0.0, i, 0.5 * j])
        }
        "lc-circuit" => {
            let l = param(params, &["l", "ell", "ℓ"])?;
            let c1 = param(params, &["c1"])?;
            let c3 = param(params, &["c3"])?;
            // Charges on c₁ and c₃ share a voltage.
            let v = 0.3;
            Ok(vec![0.1, v * c1, -0.2, v * c3, 0.4 * l, 0.0, 0.0, 0.0])
        }
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// Builds `rolling-disk` or `lc-circuit`.
pub fn build_system(name: &str, params: &BTreeMap<String, f64>) -> Result<ConstrainedSystem> {
    match name {
        "rolling-disk" => rolling_disk(params),
        "lc-circuit" => lc_circuit(params),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// Chart `(x, y, θ, φ)` with `φ` an angle;
/// `ω¹ = dx − R cos φ dθ`, `ω² = dy − R sin φ dθ`,
/// `H = (p_x² + p_y²)/2m + p_θ²/2I + p_φ²/2J`.
fn rolling_disk(params: &BTreeMap<String, f64>) -> Result<ConstrainedSystem> {
    let m = param(params, &["m"])?;
    let inertia = param(params, &["I"])?;
    let j = param(params, &["J"])?;
    let r = param(params, &["R"])?;
    let q = Chart::new(vec![CoordKind::Linear, CoordKind::Linear, CoordKind::Linear, CoordKind::Angle]);
    let c = q.cos(3)?;
    let s = q.sin(3)?;
    let constraints = vec![
        Form::one_form(vec![q.constant(1.0), q.zero(), c.scale(-r), q.zero()]),
        Form::one_form(vec![q.zero(), q.constant(1.0), s.scale(-r), q.zero()]),
    ];
    let phase = phase_chart(&q);
    let h = kinetic(&phase, 4, &[m, m, inertia, j]);
    let names = ["x", "y", "theta", "phi"].map(String::from).to_vec();
    ConstrainedSystem::new("rolling-disk", q, names, constraints, h, params.clone())
}

/// `Q = ℝ⁴` with coordinates `(q^ℓ, q^{c₁}, q^{c₂}, q^{c₃})`;
/// `ω¹ = −dq^ℓ + dq^{c₂}`, `ω² = −dq^{c₁} + dq^{c₂} − dq^{c₃}`,
/// `H = p_ℓ²/2ℓ + Σ (q^{cᵢ})²/2cᵢ`.
fn lc_circuit(params: &BTreeMap<String, f64>) -> Result<ConstrainedSystem> {
    let l = param(params, &["l", "ell", "ℓ"])?;
    let caps = [param(params, &["c1"])?, param(params, &["c2"])?, param(params, &["c3"])?];
    let q = Chart::euclidean(4);
    let k = |v: f64| q.constant(v);
    let constraints = vec![
        Form::one_form(vec![k(-1.0), k(0.0), k(1.0), k(0.0)]),
        Form::one_form(vec![k(0.0), k(-1.0), k(1.0), k(-1.0)]),
    ];
    let phase = phase_chart(&q);
    let mut h = kinetic(&phase, 4, &[l, f64::INFINITY, f64::INFINITY, f64::INFINITY]);
    for (i, c) in caps.iter().enumerate() {
        let x = Poly::var(phase.nvars(), i + 1);
        h += &(&x * &x).scale(0.5 / c);
    }
    let names = ["q_l", "q_c1", "q_c2", "q_c3"].map(String::from).to_vec();
    ConstrainedSystem::new("lc-circuit", q, names, constraints, h, params.clone())
}

/// `Σ pᵢ² / 2 mᵢ`; an infinite mass drops the term.
fn kinetic(phase: &Chart, n: usize, masses: &[f64]) -> Poly {
    let nv = phase.nvars();
    let first_p = nv - n;
    let mut h = Poly::zero(nv);
    for (i, &m) in masses.iter().enumerate() {
        if m.is_finite() {
            let p = Poly::var(nv, first_p + i);
            h += &(&p * &p).scale(0.5 / m);
        }
    }
    h
}

/// Free particle on `ℝⁿ` with mass `m` and no constraints.
pub fn free_particle(n: usize, m: f64) -> Result<ConstrainedSystem> {
    let q = Chart::euclidean(n);
    let phase = phase_chart(&q);
    let h = kinetic(&phase, n, &vec![m; n]);
    let names = (1..=n).map(|i| format!("q{i}")).collect();
    let params = BTreeMap::from([("m".to_string(), m)]);
    ConstrainedSystem::new("free-particle", q, names, vec![], h, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stock_systems_build() {
        let p = default_params("rolling-disk").unwrap();
        let disk = build_system("rolling-disk", &p).unwrap();
        assert_eq!(disk.dim(), 4);
        assert_eq!(disk.num_constraints(), 2);
        let qc = disk.q_chart();
        let c = qc.cos(3).unwrap();
        let map: Vec<usize> = (0..qc.nvars()).collect();
        let lifted = c.scale(-1.0).embed(disk.phase_chart().nvars(), &map);
        assert_eq!(disk.constraints()[0].components()[2], lifted);

        let lc = build_system("lc-circuit", &default_params("lc-circuit").unwrap()).unwrap();
        let w = lc.constraint_matrix(&[0.0; 8]);
        assert_eq!(w.row(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(w.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(build_system("pendulum", &BTreeMap::new()), Err(Error::UnknownSystem(_))));
        let mut p = default_params("rolling-disk").unwrap();
        p.insert("R".into(), -1.0);
        assert!(matches!(build_system("rolling-disk", &p), Err(Error::NonPositiveParameter { .. })));
        p.remove("R");
        assert!(matches!(build_system("rolling-disk", &p), Err(Error::MissingParameter(_))));
    }

    #[test]
    fn rank_deficient_constraints_are_rejected() {
        let q = Chart::euclidean(2);
        let phase = phase_chart(&q);
        let c = Form::one_form(vec![q.constant(1.0), q.zero()]);
        let h = kinetic(&phase, 2, &[1.0, 1.0]);
        let err = ConstrainedSystem::new("dup", q, vec!["a".into(), "b".into()], vec![c.clone(), c.scale(2.0)], h, BTreeMap::new());
        assert!(matches!(err, Err(Error::RankDeficientConstraints { rank: 1, expected: 2 })));
    }
}
