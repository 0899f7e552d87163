//! Jacobi-based decompositions: SVD (with a Householder QR pre-pass for tall
//! inputs), Hermitian eigenproblems, polar factors and numerical nullspaces.
//!
//! Everything here is deterministic: sweep order is fixed and no pivoting
//! depends on anything but the input entries.

use alloc::vec;
use alloc::vec::Vec;

use super::matrix::{c, ComplexMatrix, C64};
use super::TolerancePolicy;
use crate::error::{Error, Result};

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// `M = U · diag(S) · V*` with `U` (m×m) and `V` (n×n) unitary and `S`
/// (length `min(m, n)`) nonnegative and descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        self.rank_scaled(rel_tol, 0.0)
    }

    /// Number of singular values above `rel_tol · max(σ_max, scale)`, for
    /// matrices whose entries have a known natural magnitude.
    pub fn rank_scaled(&self, rel_tol: f64, scale: f64) -> usize {
        let reference = self.sigma_max().max(scale);
        if reference == 0.0 {
            return 0;
        }
        let cutoff = rel_tol * reference;
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut sigma = ComplexMatrix::zeros(m, n);
        for (i, &s) in self.singular_values.iter().enumerate() {
            sigma[(i, i)] = c(s, 0.0);
        }
        &(&self.u * &sigma) * &self.v.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix: `M = B · diag(values) · B*`
/// where the columns of `basis` are eigenvectors, values ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub basis: ComplexMatrix,
}

impl HermitianEigen {
    /// The unitary `U = B*` in the row convention `M = U* · diag(λ) · U`.
    pub fn unitary(&self) -> ComplexMatrix {
        self.basis.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::diagonal_real(&self.values);
        &(&self.basis * &d) * &self.basis.adjoint()
    }
}

/// Left polar factors `M = X · U`, `X` Hermitian positive definite, `U` unitary.
#[derive(Debug, Clone)]
pub struct PolarLeft {
    pub positive: ComplexMatrix,
    pub unitary: ComplexMatrix,
}

/// Right polar factors `M = U · Y`, `U` unitary, `Y` Hermitian positive definite.
#[derive(Debug, Clone)]
pub struct PolarRight {
    pub unitary: ComplexMatrix,
    pub positive: ComplexMatrix,
}

/// Unitary `G` diagonalising the Hermitian 2×2 `[[a, b], [conj b, d]]`
/// via `G* H G`. Returned as `(cs, sn, phase)` with
/// `G = [[cs, sn], [-sn·phase, cs·phase]]`.
fn jacobi_2x2(a: f64, d: f64, b: C64) -> (f64, f64, C64) {
    let mag = b.norm();
    if mag == 0.0 {
        return (1.0, 0.0, c(1.0, 0.0));
    }
    let phase = (b / mag).conj();
    let zeta = (d - a) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
    } else {
        -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
    };
    let cs = 1.0 / libm::sqrt(1.0 + t * t);
    (cs, t * cs, phase)
}

/// Column update `[x_p, x_q] ← [x_p, x_q] · G`.
#[inline]
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, cs: f64, sn: f64, phase: C64) {
    for i in 0..m.rows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = xp * cs - xq * phase * sn;
        m[(i, q)] = xp * sn + xq * phase * cs;
    }
}

fn dot(a: &ComplexMatrix, p: usize, b: &ComplexMatrix, q: usize) -> C64 {
    (0..a.rows()).map(|i| a[(i, p)].conj() * b[(i, q)]).sum()
}

/// Householder QR of a tall matrix: returns `(Q, R)` with `Q` m×m unitary
/// and `R` n×n upper triangular such that `A = Q · [R; 0]`.
fn householder_qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    for k in 0..n.min(m) {
        let norm_x = libm::sqrt((k..m).map(|i| r[(i, k)].norm_sqr()).sum::<f64>());
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let unit = if x0.norm() == 0.0 { c(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -unit * norm_x;
        let mut v: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R ← (I − 2vv*/v*v) R on rows k..m
        for j in k..n {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            let f = s * (2.0 / vnorm2);
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * f;
            }
        }
        // Q ← Q (I − 2vv*/v*v) on columns k..m
        for i in 0..m {
            let s: C64 = v.iter().enumerate().map(|(t, vi)| q[(i, k + t)] * vi).sum();
            let f = s * (2.0 / vnorm2);
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] -= f * vi.conj();
            }
        }
    }
    let r_top = ComplexMatrix::from_fn(n, n, |i, j| if i <= j && i < m { r[(i, j)] } else { c(0.0, 0.0) });
    (q, r_top)
}

/// Extends orthonormal columns to an orthonormal basis of `C^dim`.
pub(crate) fn complete_basis(columns: &mut Vec<Vec<C64>>, dim: usize) {
    let mut candidate = 0;
    while columns.len() < dim && candidate < dim {
        let mut v = vec![c(0.0, 0.0); dim];
        v[candidate] = c(1.0, 0.0);
        candidate += 1;
        for _ in 0..2 {
            for col in columns.iter() {
                let proj: C64 = col.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi -= ci * proj;
                }
            }
        }
        let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            columns.push(v);
        }
    }
}

/// One-sided Jacobi on a square matrix: returns `(W, σ, V)` with `A V = W diag(σ)`,
/// unsorted.
fn one_sided_jacobi(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let n = a.cols();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w, p, &w, p).re;
                let beta = dot(&w, q, &w, q).re;
                let gamma = dot(&w, p, &w, q);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.norm() <= JACOBI_EPS * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let (cs, sn, phase) = jacobi_2x2(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, cs, sn, phase);
                rotate_columns(&mut v, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| libm::sqrt(dot(&w, j, &w, j).re)).collect();
    (w, sigma, v)
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

fn svd_tall(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    let (q, r) = householder_qr(a);
    let (w, sigma, v) = one_sided_jacobi(&r);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let smax = order.first().map_or(0.0, |&j| sigma[j]);
    let mut left: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for &j in &order {
        let s = sigma[j];
        values.push(s);
        if s > 1e-300 && s > smax * 1e-15 {
            left.push(w.column(j).into_iter().map(|z| z / s).collect());
        }
    }
    complete_basis(&mut left, n);
    let w_full = ComplexMatrix::from_columns(n, &left);

    let v_sorted = ComplexMatrix::from_columns(n, &order.iter().map(|&j| v.column(j)).collect::<Vec<_>>());
    let mut embed = ComplexMatrix::identity(m);
    embed.set_block(0, 0, &w_full);
    Svd { u: &q * &embed, singular_values: values, v: v_sorted }
}

/// Singular value decomposition by Householder QR followed by one-sided Jacobi.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: ComplexMatrix::identity(rows),
            singular_values: Vec::new(),
            v: ComplexMatrix::identity(cols),
        });
    }
    if rows >= cols {
        Ok(svd_tall(m))
    } else {
        let t = svd_tall(&m.adjoint());
        Ok(Svd { u: t.v, singular_values: t.singular_values, v: t.u })
    }
}

/// Cyclic two-sided Jacobi for Hermitian matrices.
pub fn hermitian_eig(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<HermitianEigen> {
    check_finite(m)?;
    if !m.is_square() {
        return Err(Error::invalid("eigenproblem needs a square matrix"));
    }
    let scale = 1.0 + m.frobenius_norm();
    if m.hermitian_defect() > tol.residual_abs_tol * scale {
        return Err(Error::invalid("matrix is not Hermitian"));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut e = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if libm::sqrt(off) <= JACOBI_EPS * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                if b.norm() <= JACOBI_EPS * norm * 1e-3 {
                    continue;
                }
                let (cs, sn, phase) = jacobi_2x2(a[(p, p)].re, a[(q, q)].re, b);
                // A ← G* A G, restricted to rows/columns p, q.
                rotate_columns(&mut a, p, q, cs, sn, phase);
                for j in 0..n {
                    let xp = a[(p, j)];
                    let xq = a[(q, j)];
                    a[(p, j)] = xp * cs - xq * phase.conj() * sn;
                    a[(q, j)] = xp * sn + xq * phase.conj() * cs;
                }
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
                rotate_columns(&mut e, p, q, cs, sn, phase);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let basis = ComplexMatrix::from_columns(n, &order.iter().map(|&j| e.column(j)).collect::<Vec<_>>());
    Ok(HermitianEigen { values, basis })
}

fn require_invertible(s: &Svd, tol: &TolerancePolicy) -> Result<()> {
    let smin = s.singular_values.last().copied().unwrap_or(1.0);
    if !s.singular_values.is_empty() && smin <= tol.rank_rel_tol * s.sigma_max() {
        return Err(Error::SingularInput);
    }
    Ok(())
}

fn sandwich(outer: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let d = ComplexMatrix::diagonal_real(values);
    &(outer * &d) * &outer.adjoint()
}

/// `M = X · U` with `X ≻ 0` and `U` unitary. Note the order: the positive
/// factor sits on the left, unlike the usual `U · P` library convention.
pub fn polar_left(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<PolarLeft> {
    if !m.is_square() {
        return Err(Error::invalid("polar decomposition needs a square matrix"));
    }
    let s = svd(m)?;
    require_invertible(&s, tol)?;
    Ok(PolarLeft { positive: sandwich(&s.u, &s.singular_values), unitary: &s.u * &s.v.adjoint() })
}

/// `M = U · Y` with `U` unitary and `Y ≻ 0`.
pub fn polar_right(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<PolarRight> {
    if !m.is_square() {
        return Err(Error::invalid("polar decomposition needs a square matrix"));
    }
    let s = svd(m)?;
    require_invertible(&s, tol)?;
    Ok(PolarRight { unitary: &s.u * &s.v.adjoint(), positive: sandwich(&s.v, &s.singular_values) })
}

/// Nearest partial isometry `W V*` of a rectangular matrix `W Σ V*`:
/// column-orthonormal when tall, row-orthonormal when wide.
pub fn nearest_isometry(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = svd(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let u = s.u.block(0, 0, rows, k);
    let v = s.v.block(0, 0, cols, k);
    Ok(&u * &v.adjoint())
}

/// Orthonormal basis of the numerical nullspace; a singular value counts as
/// zero when it is at most `rank_rel_tol · σ_max`.
pub fn nullspace(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Vec<Vec<C64>>> {
    nullspace_scaled(m, 0.0, tol)
}

/// [`nullspace`] with the rank cutoff measured against `max(σ_max, scale)`.
pub fn nullspace_scaled(m: &ComplexMatrix, scale: f64, tol: &TolerancePolicy) -> Result<Vec<Vec<C64>>> {
    let s = svd(m)?;
    let rank = s.rank_scaled(tol.rank_rel_tol, scale);
    Ok((rank..m.cols()).map(|j| s.v.column(j)).collect())
}

pub fn numerical_rank(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<usize> {
    Ok(svd(m)?.rank(tol.rank_rel_tol))
}

/// Minimum-norm least-squares solution of `A x ≈ b` through the pseudo-inverse.
/// Returns the solution and the numerical rank of `A`.
pub fn least_squares(a: &ComplexMatrix, b: &[C64], tol: &TolerancePolicy) -> Result<(Vec<C64>, usize)> {
    if b.len() != a.rows() {
        return Err(Error::invalid("right-hand side length mismatch"));
    }
    let s = svd(a)?;
    let rank = s.rank(tol.rank_rel_tol);
    let mut x = vec![c(0.0, 0.0); a.cols()];
    for k in 0..rank {
        let coeff: C64 = (0..a.rows()).map(|i| s.u[(i, k)].conj() * b[i]).sum::<C64>() / s.singular_values[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += s.v[(j, k)] * coeff;
        }
    }
    Ok((x, rank))
}
