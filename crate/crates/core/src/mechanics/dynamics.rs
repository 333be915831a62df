//! Pointwise induced Dirac structure and the multiplier solve.

use nalgebra::{DMatrix, DVector};

use super::ConstrainedSystem;
use crate::dirac::{verify_dirac, LinearDirac};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::PontryaginSpace;
use crate::subspace::{Subspace, DEFAULT_TOL};

/// Velocities, momentum rates and multipliers at a state.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub qdot: DVector<f64>,
    pub pdot: DVector<f64>,
    pub lambda: DVector<f64>,
    /// Relative residual of the stacked multiplier equations.
    pub consistency_residual: f64,
}

fn eval_vec(p: &[crate::calculus::Poly], y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(p.len(), p.iter().map(|f| f.eval(y)))
}

fn eval_mat(p: &[Vec<crate::calculus::Poly>], y: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    DMatrix::from_fn(n, n, |i, j| p[i][j].eval(y))
}

/// Columns spanning `ker a`, with the conventions `ker(0 × r) = ℝʳ`.
fn null_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() == 0 {
        return DMatrix::identity(a.ncols(), a.ncols());
    }
    if a.ncols() == 0 {
        return DMatrix::zeros(0, 0);
    }
    linalg::kernel(a, DEFAULT_TOL, 1.0)
}

impl ConstrainedSystem {
    /// Basis of `{(q̇, ṗ, α, ω) : q̇ ∈ Δ, ω = q̇, α + ṗ ∈ Δ°}` at a ring state.
    pub(crate) fn induced_subspace(&self, y: &[f64], tol: f64) -> Result<Subspace> {
        let n = self.dim();
        let w = self.constraint_matrix(y);
        let k = w.nrows();
        if k > 0 {
            let r = linalg::rank(&w, tol, 0.0);
            if r < k {
                return Err(Error::RankDeficientConstraints { rank: r, expected: k });
            }
        }
        let delta = null_columns(&w);
        let nd = if k == 0 { n } else { delta.ncols() };
        let mut cols = DMatrix::zeros(4 * n, nd + n + k);
        for c in 0..nd {
            for i in 0..n {
                cols[(i, c)] = delta[(i, c)];
                cols[(3 * n + i, c)] = delta[(i, c)];
            }
        }
        for j in 0..n {
            cols[(n + j, nd + j)] = 1.0;
            cols[(2 * n + j, nd + j)] = -1.0;
        }
        for i in 0..k {
            for j in 0..n {
                cols[(2 * n + j, nd + n + i)] = w[(i, j)];
            }
        }
        Ok(Subspace::from_columns(&cols, tol, 1.0))
    }

    /// Distance of `(q̇, ṗ, ∂H/∂q, q̇)` from the induced structure.
    pub fn membership_residual(&self, y: &[f64], rhs: &Rhs) -> Result<f64> {
        let d = self.induced_subspace(y, DEFAULT_TOL)?;
        let hq = eval_vec(&self.hq, y);
        let mut v = DVector::zeros(4 * self.dim());
        let n = self.dim();
        v.rows_mut(0, n).copy_from(&rhs.qdot);
        v.rows_mut(n, n).copy_from(&rhs.pdot);
        v.rows_mut(2 * n, n).copy_from(&hq);
        v.rows_mut(3 * n, n).copy_from(&rhs.qdot);
        Ok(d.residual(&v))
    }

    /// `max |ωⁱ(q)(q̇)|`.
    pub fn constraint_residual(&self, y: &[f64], qdot: &DVector<f64>) -> f64 {
        let w = self.constraint_matrix(y);
        if w.nrows() == 0 {
            return 0.0;
        }
        (w * qdot).amax()
    }

    /// Solves for `q̇ = ∂H/∂p + K w` and `ṗ = −∂H/∂q + Σ λᵢ ωⁱ`, with
    /// `K = ker ∂²H/∂p²`, from the constraints, the momentum balance along
    /// `K` and their first time derivatives.
    pub fn dynamics_rhs(&self, y: &[f64]) -> Result<Rhs> {
        let n = self.dim();
        let hp = eval_vec(&self.hp, y);
        let hq = eval_vec(&self.hq, y);
        let hpp = eval_mat(&self.hpp, y);
        let hpq = eval_mat(&self.hpq, y);
        let hqq = eval_mat(&self.hqq, y);
        let hqp = eval_mat(&self.hqp, y);
        let w = self.constraint_matrix(y);
        let k = w.nrows();
        let kmat = linalg::kernel(&hpp, DEFAULT_TOL, 0.0);
        let r = kmat.ncols();
        let wk = &w * &kmat;
        let u = if r == 0 { DMatrix::identity(k, k) } else { null_columns(&wk.transpose()) };
        let z = if k == 0 { DMatrix::identity(r, r) } else { null_columns(&wk) };

        // q̇ = a + K w, ṗ = b + Wᵀ λ.
        let a = hp.clone();
        let b = -&hq;
        let wt = w.transpose();
        // d/dt (W ∂H/∂p) = (M + W H_pq) q̇ + W H_pp ṗ with M[:, l] = ∂_l W · ∂H/∂p.
        let mut m = DMatrix::zeros(k, n);
        for l in 0..n {
            let dwl = DMatrix::from_fn(k, n, |i, j| self.dw[l][i][j].eval(y));
            m.set_column(l, &(dwl * &hp));
        }
        let pmat = &m + &w * &hpq;
        let rmat = &w * &hpp;
        let s = z.transpose() * kmat.transpose();

        let unknowns = r + k;
        let rows = k + r + u.ncols() + s.nrows();
        let mut lhs = DMatrix::zeros(rows, unknowns);
        let mut rhs = DVector::zeros(rows);
        let mut row = 0;
        // Constraints on velocities.
        lhs.view_mut((row, 0), (k, r)).copy_from(&wk);
        rhs.rows_mut(row, k).copy_from(&(-(&w * &a)));
        row += k;
        // No force along the degenerate momentum directions.
        lhs.view_mut((row, r), (r, k)).copy_from(&wk.transpose());
        rhs.rows_mut(row, r).copy_from(&(kmat.transpose() * &hq));
        row += r;
        // Differentiated constraints that the velocity unknowns cannot absorb.
        let ut = u.transpose();
        let nu = u.ncols();
        lhs.view_mut((row, 0), (nu, r)).copy_from(&(&ut * &pmat * &kmat));
        lhs.view_mut((row, r), (nu, k)).copy_from(&(&ut * &rmat * &wt));
        rhs.rows_mut(row, nu).copy_from(&(-(&ut * (&pmat * &a + &rmat * &b))));
        row += nu;
        // Differentiated momentum balance that the multipliers cannot absorb.
        let ns = s.nrows();
        lhs.view_mut((row, 0), (ns, r)).copy_from(&(&s * &hqq * &kmat));
        lhs.view_mut((row, r), (ns, k)).copy_from(&(&s * &hqp * &wt));
        rhs.rows_mut(row, ns).copy_from(&(-(&s * (&hqq * &a + &hqp * &b))));

        let x = if unknowns == 0 {
            DVector::zeros(0)
        } else {
            let svd = linalg::full_svd(&lhs);
            let sigma = &svd.sigma;
            let rank = linalg::rank_from(sigma, DEFAULT_TOL, 0.0);
            if rank < unknowns {
                let smax = sigma.first().copied().unwrap_or(0.0);
                let smin = sigma.get(unknowns - 1).copied().unwrap_or(0.0);
                return Err(Error::SingularMultipliers {
                    condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
                });
            }
            let sol = linalg::lstsq(&lhs, &DMatrix::from_column_slice(rows, 1, rhs.as_slice()), DEFAULT_TOL, 0.0);
            sol.column(0).into_owned()
        };
        let consistency_residual = if rows == 0 {
            0.0
        } else {
            (&lhs * &x - &rhs).amax() / rhs.amax().max(1.0)
        };
        let wv = x.rows(0, r).into_owned();
        let lambda = x.rows(r, k).into_owned();
        let qdot = &a + &kmat * &wv;
        let pdot = &b + &wt * &lambda;
        Ok(Rhs {
            qdot,
            pdot,
            lambda,
            consistency_residual,
        })
    }

    /// Least-squares correction of `p` onto `{Uᵀ W ∂H/∂p = 0}`, keeping `q`.
    pub(crate) fn project_momenta(&self, y: &mut [f64], tol: f64) {
        let n = self.dim();
        let first_p = y.len() - n;
        for _ in 0..4 {
            let w = self.constraint_matrix(y);
            if w.nrows() == 0 {
                return;
            }
            let hpp = eval_mat(&self.hpp, y);
            let kmat = linalg::kernel(&hpp, DEFAULT_TOL, 0.0);
            let wk = &w * &kmat;
            let u = if kmat.ncols() == 0 { DMatrix::identity(w.nrows(), w.nrows()) } else { null_columns(&wk.transpose()) };
            if u.ncols() == 0 {
                return;
            }
            let g = u.transpose() * &w * eval_vec(&self.hp, y);
            if g.amax() <= tol {
                return;
            }
            let jac = u.transpose() * &w * &hpp;
            let delta = linalg::lstsq(&jac, &DMatrix::from_column_slice(g.len(), 1, g.as_slice()), DEFAULT_TOL, 0.0);
            for i in 0..n {
                y[first_p + i] -= delta[(i, 0)];
            }
        }
    }
}

/// The induced Dirac structure on `T_z(T*Q)` with the full dual, certified.
pub fn induced_dirac_at(sys: &ConstrainedSystem, z: &[f64]) -> Result<LinearDirac> {
    let y = sys.ring_state(z)?;
    let d = sys.induced_subspace(&y, DEFAULT_TOL)?;
    verify_dirac(&d, &PontryaginSpace::full_dual(2 * sys.dim(), DEFAULT_TOL))
}
