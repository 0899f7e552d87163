//! Orthogonal splitting of a `*`-representation into indecomposables.
//!
//! A random self-adjoint element of `End_*(T)` has spectral projections that
//! are themselves endomorphisms; grouping its eigenvalues across all vertices
//! splits every arrow block at once. Each piece is split again until its
//! `*`-endomorphism algebra is `C`.

use alloc::format;
use alloc::vec::Vec;

use super::{end_space, schur_from_end, Category, Morphism, MAX_RESAMPLES};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eig, ComplexMatrix, TolerancePolicy, C64};
use crate::quiver::VertexId;
use crate::random::{real_gaussian, rng_from_seed, SeededRng};
use crate::representation::Representation;

/// Relative eigenvalue gap separating two spectral clusters.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub summands: Vec<Representation>,
    /// Per summand, per vertex: a column-orthonormal `d(v) × d_k(v)` embedding.
    pub embeddings: Vec<Morphism>,
}

impl DecompositionResult {
    /// `U_v = [E_{v,1} | E_{v,2} | …]` for every vertex of `t`.
    pub fn joint_unitary(&self, t: &Representation) -> Morphism {
        let mut out = Morphism::default();
        for v in t.quiver().vertices() {
            let parts: Vec<&ComplexMatrix> = self.embeddings.iter().map(|e| e.get(v.id).expect("vertex")).collect();
            out.insert(v.id, ComplexMatrix::hstack(t.dim(v.id), &parts));
        }
        out
    }

    pub fn reassembled(&self) -> Result<Representation> {
        Representation::direct_sum_all(&self.summands)
    }

    /// Worst `‖U_v* U_v − I‖_F` over vertices.
    pub fn orthogonality_defect(&self, t: &Representation) -> f64 {
        self.joint_unitary(t)
            .iter()
            .map(|(_, u)| (&u.adjoint() * u).distance(&ComplexMatrix::identity(u.cols())))
            .fold(0.0, f64::max)
    }

    /// Worst relative `‖U_h* T_α U_t − (⊕ S_k)_α‖ / (1 + ‖T_α‖)` over arrows.
    pub fn block_diagonal_defect(&self, t: &Representation) -> Result<f64> {
        let u = self.joint_unitary(t);
        let sum = self.reassembled()?;
        let mut worst: f64 = 0.0;
        for a in t.quiver().arrows() {
            let uh = u.get(a.head).expect("vertex");
            let ut = u.get(a.tail).expect("vertex");
            let blk = t.block(a.id);
            let conj = &(&uh.adjoint() * blk) * ut;
            worst = worst.max(conj.distance(sum.block(a.id)) / (1.0 + blk.frobenius_norm()));
        }
        Ok(worst)
    }
}

struct Piece {
    rep: Representation,
    embedding: Morphism,
}

fn compress(left: &ComplexMatrix, right: &ComplexMatrix, block: &ComplexMatrix) -> ComplexMatrix {
    &(&left.adjoint() * block) * right
}

/// Attempts one spectral split; `Ok(None)` means this draw did not separate.
fn try_split(
    t: &Representation,
    end: &super::HomSpace,
    rng: &mut SeededRng,
    tol: &TolerancePolicy,
) -> Result<Option<Vec<(Representation, Morphism)>>> {
    let coeffs: Vec<C64> = (0..end.dimension()).map(|_| c(real_gaussian(rng), 0.0)).collect();
    let mut h = Morphism::default();
    for (k, e) in end.basis.iter().enumerate() {
        let sym = e.add(&e.adjoint()).scale(c(0.5, 0.0));
        let term = sym.scale(coeffs[k]);
        h = if k == 0 { term } else { h.add(&term) };
    }

    let mut eigen = Vec::new();
    let mut spectrum: Vec<(f64, VertexId, usize)> = Vec::new();
    for v in t.quiver().vertices() {
        let hv = h.get(v.id).expect("vertex").hermitian_part();
        let e = hermitian_eig(&hv, tol)?;
        for (i, &lambda) in e.values.iter().enumerate() {
            spectrum.push((lambda, v.id, i));
        }
        eigen.push((v.id, e));
    }
    spectrum.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = match (spectrum.first(), spectrum.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Ok(None),
    };
    let spread = hi - lo;
    if spread <= 0.0 {
        return Ok(None);
    }
    let mut cluster_of = Vec::with_capacity(spectrum.len());
    let mut current = 0usize;
    for (k, s) in spectrum.iter().enumerate() {
        if k > 0 && s.0 - spectrum[k - 1].0 > CLUSTER_GAP * spread {
            current += 1;
        }
        cluster_of.push(current);
    }
    let clusters = current + 1;
    if clusters < 2 {
        return Ok(None);
    }

    // Per cluster, per vertex: eigenvector columns.
    let mut projections: Vec<Morphism> = (0..clusters).map(|_| Morphism::default()).collect();
    for (v, e) in &eigen {
        let d = t.dim(*v);
        for (k, proj) in projections.iter_mut().enumerate() {
            let cols: Vec<Vec<C64>> = spectrum
                .iter()
                .zip(&cluster_of)
                .filter(|((_, w, _), &cl)| w == v && cl == k)
                .map(|((_, _, i), _)| e.basis.column(*i))
                .collect();
            proj.insert(*v, ComplexMatrix::from_columns(d, &cols));
        }
    }

    // Off-diagonal leakage must vanish for a genuine endomorphism.
    let slack = tol.rank_rel_tol * 100.0;
    for a in t.quiver().arrows() {
        let blk = t.block(a.id);
        for (k, pk) in projections.iter().enumerate() {
            for (l, pl) in projections.iter().enumerate() {
                if k == l {
                    continue;
                }
                let leak = compress(pk.get(a.head).unwrap(), pl.get(a.tail).unwrap(), blk);
                if leak.frobenius_norm() > slack * (1.0 + blk.frobenius_norm()) {
                    return Ok(None);
                }
            }
        }
    }

    let mut out = Vec::with_capacity(clusters);
    for proj in projections {
        let dims = t.quiver().vertices().iter().map(|v| (v.id, proj.get(v.id).unwrap().cols())).collect();
        let blocks = t
            .quiver()
            .arrows()
            .iter()
            .map(|a| (a.id, compress(proj.get(a.head).unwrap(), proj.get(a.tail).unwrap(), t.block(a.id))))
            .collect();
        out.push((Representation::new(t.quiver().clone(), dims, blocks)?, proj));
    }
    Ok(Some(out))
}

/// Splits `t` into `*`-indecomposable orthogonal summands.
pub fn decompose(t: &Representation, seed: u64, tol: &TolerancePolicy) -> Result<DecompositionResult> {
    let mut rng = rng_from_seed(seed);
    let mut pending = alloc::vec![Piece { rep: t.clone(), embedding: Morphism::identity(t) }];
    let mut summands = Vec::new();
    let mut embeddings = Vec::new();
    while let Some(piece) = pending.pop() {
        if piece.rep.total_dim() == 0 {
            continue;
        }
        let end = end_space(&piece.rep, Category::Star, tol)?;
        if schur_from_end(&end, tol)? {
            summands.push(piece.rep);
            embeddings.push(piece.embedding);
            continue;
        }
        let mut split = None;
        for _ in 0..MAX_RESAMPLES {
            if let Some(parts) = try_split(&piece.rep, &end, &mut rng, tol)? {
                split = Some(parts);
                break;
            }
        }
        let parts = split.ok_or_else(|| {
            Error::NumericalDegeneracy(format!(
                "End_* has dimension {} but {} random self-adjoint draws failed to split it",
                end.dimension(),
                MAX_RESAMPLES
            ))
        })?;
        // Reverse so that pieces come off the stack in ascending eigenvalue order.
        for (rep, proj) in parts.into_iter().rev() {
            let embedding = piece.embedding.compose(&proj);
            pending.push(Piece { rep, embedding });
        }
    }
    Ok(DecompositionResult { summands, embeddings })
}
