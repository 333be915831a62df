//! Kernel lemmas, the induced maps `P_L`, `P_L♭`, the form `Ω_L`, and the
//! case analysis of a certified structure.

use nalgebra::DMatrix;
use serde::Serialize;

use super::LinearDirac;
use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    #[serde(rename = "L")]
    pub l: Subspace,
    #[serde(rename = "Lflat")]
    pub lflat: Subspace,
    #[serde(rename = "D_cap_E")]
    pub d_cap_e: Subspace,
    #[serde(rename = "D_cap_Eflat")]
    pub d_cap_eflat: Subspace,
    /// Residual of `D ∩ E♭ = L⁰`.
    pub annihilator_of_l_residual: f64,
    /// Residual of `L♭ = (D ∩ E)⁰`.
    pub annihilator_of_d_cap_e_residual: f64,
    pub rank_nullity_holds: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedTensors {
    #[serde(rename = "L")]
    pub l: Subspace,
    #[serde(rename = "Lflat")]
    pub lflat: Subspace,
    #[serde(rename = "D_cap_E")]
    pub d_cap_e: Subspace,
    #[serde(rename = "D_cap_Eflat")]
    pub d_cap_eflat: Subspace,
    /// Representative of `L / (D ∩ E)` inside `L`.
    pub quotient: Subspace,
    /// Representative of `L♭ / (D ∩ E♭)` inside `L♭`.
    pub quotient_flat: Subspace,
    /// `P_L`: columns are images of the basis of `L`, in `E♭` coordinates,
    /// normalised into `quotient_flat`.
    #[serde(serialize_with = "ser_matrix")]
    pub p_l: DMatrix<f64>,
    /// `P_L♭`: columns are images of the basis of `L♭`, in `E` coordinates,
    /// normalised into `quotient`.
    #[serde(serialize_with = "ser_matrix")]
    pub p_lflat: DMatrix<f64>,
    /// `Ω_L` in the coordinates of the basis of `L`.
    #[serde(serialize_with = "ser_matrix")]
    pub omega_l: DMatrix<f64>,
    pub omega_skew_residual: f64,
    /// `⟨β_j, u_i⟩ + ⟨α_i, v_j⟩` over basis pairs of `D`.
    pub quotient_pairing_residual: f64,
    /// Distance between `D` and the graph relation `P_L(u) = α|_L`.
    pub graph_recovery_residual: f64,
    /// `P̂_L♭ ∘ P̂_L − I` on coordinates of `L / (D ∩ E)`.
    pub quotient_inverse_residual: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    linalg::to_rows(m).serialize(s)
}

impl InducedTensors {
    /// `Ω_L` as a bilinear form on all of `E` (zero off `L`).
    pub fn omega_ambient(&self) -> DMatrix<f64> {
        self.l.basis() * &self.omega_l * self.l.basis().transpose()
    }

    /// Kernel of `Ω_L` inside `L`, in `E` coordinates.
    pub fn omega_kernel(&self, tol: f64) -> Subspace {
        let k = linalg::kernel(&self.omega_l, tol, 1.0);
        Subspace::from_columns(&(self.l.basis() * k), tol, 1.0)
    }

    /// Kernel of `P_L` inside `L`, in `E` coordinates.
    pub fn p_l_kernel(&self, tol: f64) -> Subspace {
        let k = linalg::kernel(&self.p_l, tol, 1.0);
        Subspace::from_columns(&(self.l.basis() * k), tol, 1.0)
    }

    /// Kernel of `P_L♭` inside `L♭`, in `E♭` coordinates.
    pub fn p_lflat_kernel(&self, tol: f64) -> Subspace {
        let k = linalg::kernel(&self.p_lflat, tol, 1.0);
        Subspace::from_columns(&(self.lflat.basis() * k), tol, 1.0)
    }
}

impl LinearDirac {
    pub fn kernel_report(&self) -> Result<KernelReport> {
        self.require_certified("kernel_report")?;
        let sp = &self.space;
        let l = sp.project_e(&self.d)?;
        let lflat = sp.project_eflat(&self.d)?;
        let d_cap_e = sp.intersect_e(&self.d)?;
        let d_cap_eflat = sp.intersect_eflat(&self.d)?;
        let annihilator_of_l_residual = d_cap_eflat.equality_residual(&sp.partial_annihilator(&l)?)?;
        let annihilator_of_d_cap_e_residual = lflat.equality_residual(&sp.partial_annihilator(&d_cap_e)?)?;
        let rank_nullity_holds = self.dim() == l.dim() + d_cap_eflat.dim()
            && self.dim() == lflat.dim() + d_cap_e.dim();
        let tol = self.d.equality_tol();
        let holds = annihilator_of_l_residual <= tol && annihilator_of_d_cap_e_residual <= tol && rank_nullity_holds;
        Ok(KernelReport {
            l,
            lflat,
            d_cap_e,
            d_cap_eflat,
            annihilator_of_l_residual,
            annihilator_of_d_cap_e_residual,
            rank_nullity_holds,
            holds,
        })
    }

    pub fn induced_tensors(&self) -> Result<InducedTensors> {
        self.require_certified("induced_tensors")?;
        let sp = &self.space;
        let tol = sp.tol();
        let kr = self.kernel_report()?;
        let quotient = kr.l.complement_within(&kr.d_cap_e)?;
        let quotient_flat = kr.lflat.complement_within(&kr.d_cap_eflat)?;
        if quotient.dim() != quotient_flat.dim() {
            return Err(Error::Assertion(format!(
                "quotient dimensions differ: {} vs {}",
                quotient.dim(),
                quotient_flat.dim()
            )));
        }
        let du = sp.e_block(&self.d);
        let da = sp.eflat_block(&self.d);

        // Lift u ∈ L to (u, α) ∈ D, then normalise α into the quotient representative.
        let lift = linalg::lstsq(&du, kr.l.basis(), tol, 1.0);
        let alphas = &da * &lift;
        let qf = quotient_flat.basis();
        let p_l = qf * (qf.transpose() * alphas);

        let lift_flat = linalg::lstsq(&da, kr.lflat.basis(), tol, 1.0);
        let vs = &du * &lift_flat;
        let qe = quotient.basis();
        let p_lflat = qe * (qe.transpose() * vs);

        let b = sp.pairing();
        // Ω(u_i, u_j) = −⟨P_L(u_j), u_i⟩.
        let omega_l = -(kr.l.basis().transpose() * b.transpose() * &p_l);
        let omega_skew_residual = linalg::max_abs(&(&omega_l + omega_l.transpose()));

        // ⟨β_j, u_i⟩ = −⟨α_i, v_j⟩ for basis pairs (u_i, α_i), (v_j, β_j) of D.
        let pairing = du.transpose() * b.transpose() * &da;
        let quotient_pairing_residual = linalg::max_abs(&(&pairing + pairing.transpose()));

        let graph_recovery_residual = graph_recovery(self, &kr.l, &kr.lflat, &p_l)?;

        // P̂: quotient → quotient_flat coordinates; P̂♭: quotient_flat → quotient coordinates.
        let lift_q = linalg::lstsq(&du, qe, tol, 1.0);
        let p_hat = qf.transpose() * (&da * lift_q);
        let lift_qf = linalg::lstsq(&da, qf, tol, 1.0);
        let p_hat_flat = qe.transpose() * (&du * lift_qf);
        let r = quotient.dim();
        let quotient_inverse_residual = linalg::max_abs(&(p_hat_flat * p_hat - DMatrix::identity(r, r)));

        Ok(InducedTensors {
            l: kr.l,
            lflat: kr.lflat,
            d_cap_e: kr.d_cap_e,
            d_cap_eflat: kr.d_cap_eflat,
            quotient,
            quotient_flat,
            p_l,
            p_lflat,
            omega_l,
            omega_skew_residual,
            quotient_pairing_residual,
            graph_recovery_residual,
            quotient_inverse_residual,
        })
    }

    pub fn classify(&self) -> Result<ClassifyReport> {
        let t = self.induced_tensors()?;
        let sp = &self.space;
        let tol = sp.tol();
        let n = sp.dim_e();
        let m = sp.dim_eflat();
        let k = sp.separation_kernel();
        let rank_pl = linalg::rank(&t.p_l, tol, 1.0);
        let rank_plf = linalg::rank(&t.p_lflat, tol, 1.0);

        let b = t.lflat.dim() == m;
        let d = t.d_cap_eflat.is_zero();
        let e = t.l.dim() == n;

        let literal = {
            let a = t.d_cap_e.is_zero();
            Predicates {
                a,
                b,
                c: a && b,
                d,
                e,
                f: d && e,
                g: e && a && rank_pl == m && m == n,
                h: b && d && rank_plf == n && m == n,
            }
        };
        // On the quotient E / ker B the available functionals separate points.
        let separated = {
            let a = t.d_cap_e.equals(&k)?;
            Predicates {
                a,
                b,
                c: a && b,
                d,
                e,
                f: d && e,
                g: e && a && rank_pl == m,
                h: b && d && rank_plf == n - k.dim(),
            }
        };
        let contradictions = separated.contradictions();
        let literal_contradictions = literal.contradictions();
        let mut cases = Vec::new();
        if separated.a {
            cases.push("i".to_string());
        }
        if separated.d {
            cases.push("ii".to_string());
        }
        if separated.a && separated.d {
            cases.push("iii".to_string());
        }
        Ok(ClassifyReport {
            predicates: separated,
            literal_predicates: literal,
            separation_kernel_dim: k.dim(),
            contradictions,
            literal_contradictions,
            cases,
        })
    }
}

/// Builds `{(u, α) : u ∈ L, α ∈ L♭, P_L(u) = α|_L}` and returns its distance to `D`.
fn graph_recovery(dirac: &LinearDirac, l: &Subspace, lflat: &Subspace, p_l: &DMatrix<f64>) -> Result<f64> {
    let sp = &dirac.space;
    let n = sp.dim_e();
    let m = sp.dim_eflat();
    let restrict = l.basis().transpose() * sp.pairing().transpose();
    let lhs = linalg::hstack(&[&(&restrict * p_l), &(-(&restrict * lflat.basis()))]);
    let k = linalg::kernel(&lhs, sp.tol(), 1.0);
    let xs = k.rows(0, l.dim()).into_owned();
    let ys = k.rows(l.dim(), lflat.dim()).into_owned();
    let mut cols = DMatrix::zeros(n + m, k.ncols());
    cols.view_mut((0, 0), (n, k.ncols())).copy_from(&(l.basis() * xs));
    cols.view_mut((n, 0), (m, k.ncols())).copy_from(&(lflat.basis() * ys));
    let recovered = Subspace::from_columns(&cols, sp.tol(), 1.0);
    recovered.equality_residual(&dirac.d)
}

/// Truth values of the assertions (a)–(h) of the case analysis.
///
/// (c) is bijectivity of `p♭|_D` onto `E♭` and (f) bijectivity of `p|_D` onto
/// `E`, so that each sits with the kernel and image conditions it is
/// equivalent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
    pub f: bool,
    pub g: bool,
    pub h: bool,
}

impl Predicates {
    /// Number of violated equivalences among (a)⇔(b)⇔(c), (d)⇔(e)⇔(f) and
    /// (a)∧(d)⇔(g)⇔(h).
    pub fn contradictions(&self) -> usize {
        let pairs = [
            (self.a, self.b),
            (self.b, self.c),
            (self.d, self.e),
            (self.e, self.f),
            (self.a && self.d, self.g),
            (self.g, self.h),
        ];
        pairs.iter().filter(|(x, y)| x != y).count()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    /// Predicates evaluated modulo `ker B`, where `E♭` separates points.
    pub predicates: Predicates,
    /// Predicates read verbatim on `E`; differ from `predicates` only when
    /// `E♭` is a proper subspace of the dual.
    pub literal_predicates: Predicates,
    pub separation_kernel_dim: usize,
    pub contradictions: usize,
    pub literal_contradictions: usize,
    pub cases: Vec<String>,
}
