//! Dense SVD helpers with an explicit rank policy.
//!
//! A singular value counts toward the rank when it exceeds
//! `tol * max(sigma_max, reference)`. A `reference` of zero gives a purely
//! relative cutoff; internal callers pass the scale of the data they built the
//! matrix from so that rounding noise on a numerically zero matrix is not
//! mistaken for rank.

use nalgebra::DMatrix;

/// Singular value decomposition `a = u diag(sigma) vᵀ` with descending
/// singular values and a complete right factor (`v` is `ncols x ncols`).
/// `sigma` has `ncols` entries; columns of `u` belonging to zero singular
/// values are zero.
pub struct FullSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD.
///
/// nalgebra's bidiagonal SVD loses up to seven digits on matrices with
/// clustered singular values, which skew-structured pairings produce
/// routinely; Jacobi rotations keep the backward error at rounding level.
pub fn full_svd(a: &DMatrix<f64>) -> FullSvd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    // Below this the computed inner product is rounding noise.
    let threshold = (m as f64) * f64::EPSILON;
    // Columns this small are zero to working precision.
    let negligible = f64::EPSILON * f64::EPSILON * a.norm();
    if m > 0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let (ni, nj) = (w.column(i).norm(), w.column(j).norm());
                    if ni <= negligible || nj <= negligible {
                        continue;
                    }
                    let gamma = w.column(i).dot(&w.column(j));
                    if gamma.abs() <= threshold * ni * nj {
                        continue;
                    }
                    rotated = true;
                    let zeta = (nj * nj - ni * ni) / (2.0 * gamma);
                    let t = if zeta.abs() > 1e100 {
                        0.5 / zeta
                    } else {
                        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut w, i, j, c, s);
                    rotate(&mut v, i, j, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| if m == 0 { 0.0 } else { w.column(j).norm() }).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(m, n);
    let mut v_sorted = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > 0.0 {
            u.set_column(dst, &(w.column(src) / s));
        }
        v_sorted.set_column(dst, &v.column(src));
        sigma.push(s);
    }
    FullSvd { u, sigma, v: v_sorted }
}

fn rotate(a: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..a.nrows() {
        let (x, y) = (a[(r, i)], a[(r, j)]);
        a[(r, i)] = c * x - s * y;
        a[(r, j)] = s * x + c * y;
    }
}

pub fn cutoff(sigma: &[f64], tol: f64, reference: f64) -> f64 {
    let smax = sigma.first().copied().unwrap_or(0.0);
    tol * smax.max(reference)
}

pub fn rank_from(sigma: &[f64], tol: f64, reference: f64) -> usize {
    let c = cutoff(sigma, tol, reference);
    sigma.iter().filter(|&&s| s > c && s > 0.0).count()
}

pub fn rank(a: &DMatrix<f64>, tol: f64, reference: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    rank_from(&full_svd(a).sigma, tol, reference)
}

pub fn sigma_max(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    full_svd(a).sigma[0]
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn column_basis(a: &DMatrix<f64>, tol: f64, reference: f64) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    // Column space of a = row space of a^T; use the right factor of a^T.
    let svd = full_svd(&a.transpose());
    let r = rank_from(&svd.sigma, tol, reference);
    svd.v.columns(0, r).into_owned()
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn kernel(a: &DMatrix<f64>, tol: f64, reference: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let svd = full_svd(a);
    let r = rank_from(&svd.sigma, tol, reference);
    svd.v.columns(r, n - r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` with the same rank policy.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64, reference: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, b.ncols());
    }
    let pinv = pseudo_inverse(a, tol, reference);
    pinv * b
}

pub fn pseudo_inverse(a: &DMatrix<f64>, tol: f64, reference: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = full_svd(a);
    let r = rank_from(&svd.sigma, tol, reference);
    let mut out = DMatrix::zeros(n, m);
    for i in 0..r {
        out += svd.v.column(i) * svd.u.column(i).transpose() / svd.sigma[i];
    }
    out
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Column-wise maximum Euclidean norm.
pub fn max_column_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().fold(0.0, |m, c| m.max(c.norm()))
}

pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    a.row_iter().map(|r| r.iter().cloned().collect()).collect()
}
