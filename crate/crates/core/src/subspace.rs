//! Systems of `n` subspaces given by orthogonal projections `P_i` on `H_0`,
//! and the functors between them and star-quiver representations whose arrow
//! Grams `T(γ_i)* T(γ_i)` are nonzero scalars.
//!
//! `F` sends `T` to the projections onto the arrow images; `G` embeds each
//! image back with its natural isometry `Γ_i` scaled by `√α_i`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c, least_squares, nullspace_scaled, svd, ComplexMatrix, TolerancePolicy, C64};
use crate::morphism::{end_space, hom_space, intertwining_residual, Category, Morphism};
use crate::quiver::{star_leaf_count, star_quiver, ArrowId, VertexId};
use crate::representation::Representation;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSystem {
    pub ambient_dim: usize,
    pub projections: Vec<ComplexMatrix>,
    pub weights: Option<Vec<f64>>,
}

impl ProjectionSystem {
    pub fn new(ambient_dim: usize, projections: Vec<ComplexMatrix>, weights: Option<Vec<f64>>) -> Result<Self> {
        if projections.is_empty() {
            return Err(Error::invalid("a system needs at least one projection"));
        }
        for (i, p) in projections.iter().enumerate() {
            if p.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::invalid(format!("projection {i} is not {ambient_dim}×{ambient_dim}")));
            }
            if !p.is_finite() {
                return Err(Error::invalid(format!("projection {i} has a non-finite entry")));
            }
        }
        if let Some(w) = &weights {
            if w.len() != projections.len() {
                return Err(Error::invalid("one weight per projection is required"));
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("non-finite weight"));
            }
        }
        Ok(Self { ambient_dim, projections, weights })
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.weights = Some(weights);
        Self::new(self.ambient_dim, self.projections, self.weights)
    }

    /// `‖Σ α_i P_i − I‖_F` for the attached weights.
    pub fn weight_residual(&self) -> Option<f64> {
        let w = self.weights.as_ref()?;
        let mut sum = ComplexMatrix::identity(self.ambient_dim).scale_real(-1.0);
        for (p, &a) in self.projections.iter().zip(w) {
            sum = &sum + &p.scale_real(a);
        }
        Some(sum.frobenius_norm())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub idempotency: Vec<f64>,
    pub self_adjointness: Vec<f64>,
    pub ranks: Vec<usize>,
    /// `‖Σ α_i P_i − I‖_F` when weights are attached.
    pub weight_residual: Option<f64>,
    pub weights_consistent: Option<bool>,
}

fn projection_slack(p: &ComplexMatrix, tol: &TolerancePolicy) -> f64 {
    tol.rank_rel_tol * (1.0 + p.frobenius_norm())
}

/// Idempotency and self-adjointness per projection, plus subspace dimensions.
pub fn validate_system(s: &ProjectionSystem, tol: &TolerancePolicy) -> Result<ProjectionReport> {
    let mut idempotency = Vec::new();
    let mut self_adjointness = Vec::new();
    let mut ranks = Vec::new();
    for (index, p) in s.projections.iter().enumerate() {
        let idem = (p * p).distance(p);
        let adj = p.distance(&p.adjoint());
        if idem > projection_slack(p, tol) || adj > projection_slack(p, tol) {
            return Err(Error::InvalidProjection { index, idempotency: idem, self_adjointness: adj });
        }
        idempotency.push(idem);
        self_adjointness.push(adj);
        ranks.push(projection_rank(p)?);
    }
    let weight_residual = s.weight_residual();
    let limit = tol.rank_rel_tol * libm::sqrt(s.ambient_dim.max(1) as f64);
    let weights_consistent = weight_residual.map(|r| r <= limit && s.weights.as_ref().unwrap().iter().all(|&a| a > 0.0));
    Ok(ProjectionReport { idempotency, self_adjointness, ranks, weight_residual, weights_consistent })
}

/// Singular values of a projection are 0 or 1; count those above one half.
fn projection_rank(p: &ComplexMatrix) -> Result<usize> {
    if p.rows() == 0 {
        return Ok(0);
    }
    Ok(svd(p)?.singular_values.iter().filter(|&&x| x > 0.5).count())
}

/// Column-orthonormal `Γ_i` with `Γ_i Γ_i* = P_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEmbeddings {
    pub isometries: Vec<ComplexMatrix>,
}

impl SubspaceEmbeddings {
    /// Worst `max(‖Γ*Γ − I‖, ‖ΓΓ* − P‖)` over the system.
    pub fn defect(&self, s: &ProjectionSystem) -> f64 {
        self.isometries
            .iter()
            .zip(&s.projections)
            .map(|(g, p)| {
                let gram = (&g.adjoint() * g).distance(&ComplexMatrix::identity(g.cols()));
                gram.max((g * &g.adjoint()).distance(p))
            })
            .fold(0.0, f64::max)
    }
}

/// Left singular vectors of each `P_i` with singular value above one half.
pub fn embeddings(s: &ProjectionSystem) -> Result<SubspaceEmbeddings> {
    let mut isometries = Vec::with_capacity(s.len());
    for p in &s.projections {
        if p.rows() == 0 {
            isometries.push(ComplexMatrix::zeros(0, 0));
            continue;
        }
        let d = svd(p)?;
        let cols: Vec<Vec<C64>> = d
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.5)
            .map(|(k, _)| d.u.column(k))
            .collect();
        isometries.push(ComplexMatrix::from_columns(p.rows(), &cols));
    }
    Ok(SubspaceEmbeddings { isometries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub residual: f64,
    /// Rank of the vectorized projections; below `n` the weights are not unique.
    pub rank: usize,
    pub dependent: bool,
}

/// Real least squares for `Σ α_i P_i = I`.
pub fn solve_weights(s: &ProjectionSystem, tol: &TolerancePolicy) -> Result<WeightSolution> {
    let d = s.ambient_dim;
    let n = s.len();
    // Real and imaginary parts of every entry, stacked.
    let mut a = ComplexMatrix::zeros(2 * d * d, n);
    let mut b = alloc::vec![c(0.0, 0.0); 2 * d * d];
    for (k, p) in s.projections.iter().enumerate() {
        for r in 0..d {
            for col in 0..d {
                let e = 2 * (r * d + col);
                a[(e, k)] = c(p[(r, col)].re, 0.0);
                a[(e + 1, k)] = c(p[(r, col)].im, 0.0);
            }
        }
    }
    for r in 0..d {
        b[2 * (r * d + r)] = c(1.0, 0.0);
    }
    let (x, rank) = least_squares(&a, &b, tol)?;
    let weights: Vec<f64> = x.iter().map(|z| z.re).collect();
    let fitted = s.clone().with_weights(weights.clone())?;
    let residual = fitted.weight_residual().unwrap();
    if residual > tol.rank_rel_tol * libm::sqrt(d.max(1) as f64) {
        return Err(Error::Infeasible { residual });
    }
    if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, &w)| w <= tol.rank_rel_tol) {
        return Err(Error::InfeasibleSign { index, weight });
    }
    Ok(WeightSolution { weights, residual, rank, dependent: rank < n })
}

/// Image of a star representation under `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctorImage {
    /// Projections, with weights `α_i / χ_0` when the input is orthoscalar.
    pub system: ProjectionSystem,
    /// The scalars `α_i` of `T(γ_i)* T(γ_i) = α_i I`.
    pub leaf_scales: Vec<f64>,
}

fn require_star(t: &Representation) -> Result<usize> {
    star_leaf_count(t.quiver()).ok_or_else(|| Error::UnsupportedShape("expected a star quiver".into()))
}

/// `F(T)`: `P_i = Γ_i Γ_i*` with `Γ_i = T(γ_i) / √α_i`.
pub fn functor_f(t: &Representation, tol: &TolerancePolicy) -> Result<FunctorImage> {
    let n = require_star(t)?;
    let d0 = t.dim(VertexId(0));
    let mut projections = Vec::with_capacity(n);
    let mut leaf_scales = Vec::with_capacity(n);
    for i in 1..=n as u32 {
        let arrow = t.block(ArrowId(i));
        let di = arrow.cols();
        if di == 0 {
            projections.push(ComplexMatrix::zeros(d0, d0));
            leaf_scales.push(1.0);
            continue;
        }
        let gram = &arrow.adjoint() * arrow;
        let alpha = gram.trace().re / di as f64;
        if alpha <= tol.rank_rel_tol || gram.distance_to_scalar(c(alpha, 0.0)) > tol.rank_rel_tol * (1.0 + alpha) {
            return Err(Error::NotInK { leaf: VertexId(i) });
        }
        let gamma = arrow.scale_real(1.0 / libm::sqrt(alpha));
        projections.push((&gamma * &gamma.adjoint()).hermitian_part());
        leaf_scales.push(alpha);
    }
    let mut weights = None;
    if let Ok(report) = t.orthoscalar_check(tol) {
        if report.is_orthoscalar {
            let chi0 = report.vertices.iter().find(|v| v.vertex == VertexId(0)).map(|v| v.chi);
            if let Some(chi0) = chi0 {
                weights = Some(leaf_scales.iter().map(|a| a / chi0).collect());
            }
        }
    }
    Ok(FunctorImage { system: ProjectionSystem::new(d0, projections, weights)?, leaf_scales })
}

/// `G(S)` with `T(γ_i) = √α_i Γ_i` for the attached weights: orthoscalar with
/// central character 1 and leaf characters `α_i`.
pub fn functor_g(s: &ProjectionSystem, tol: &TolerancePolicy) -> Result<Representation> {
    let weights = s.weights.clone().ok_or_else(|| Error::invalid("functor G needs weights"))?;
    validate_system(s, tol)?;
    functor_g_scaled(s, &weights)
}

/// `G` with explicit leaf scales, inverting [`functor_f`] up to unitary
/// equivalence when fed its `leaf_scales`.
pub fn functor_g_scaled(s: &ProjectionSystem, scales: &[f64]) -> Result<Representation> {
    if scales.len() != s.len() {
        return Err(Error::invalid("one scale per projection is required"));
    }
    if let Some((index, &weight)) = scales.iter().enumerate().find(|(_, &x)| x.is_nan() || x <= 0.0) {
        return Err(Error::InfeasibleSign { index, weight });
    }
    let emb = embeddings(s)?;
    let q = star_quiver(s.len())?;
    let mut dims = BTreeMap::new();
    let mut blocks = BTreeMap::new();
    dims.insert(VertexId(0), s.ambient_dim);
    for (k, g) in emb.isometries.iter().enumerate() {
        let i = k as u32 + 1;
        dims.insert(VertexId(i), g.cols());
        let block = if g.rows() == s.ambient_dim { g.scale_real(libm::sqrt(scales[k])) } else { ComplexMatrix::zeros(s.ambient_dim, 0) };
        blocks.insert(ArrowId(i), block);
    }
    Representation::new(q, dims, blocks)
}

/// Basis of `{C_0 : C_0 P_i = P̃_i C_0 P_i for all i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceHomSpace {
    pub basis: Vec<ComplexMatrix>,
}

impl SubspaceHomSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// `Σ_i ‖(I − P̃_i) C_0 P_i‖_F²`, square-rooted.
pub fn subspace_morphism_residual(c0: &ComplexMatrix, s: &ProjectionSystem, target: &ProjectionSystem) -> f64 {
    let mut acc = 0.0;
    for (p, pt) in s.projections.iter().zip(&target.projections) {
        let r = (c0 * p).distance(&(&(pt * c0) * p));
        acc += r * r;
    }
    libm::sqrt(acc)
}

pub fn hom_space_p(s: &ProjectionSystem, target: &ProjectionSystem, tol: &TolerancePolicy) -> Result<SubspaceHomSpace> {
    if s.len() != target.len() {
        return Err(Error::invalid("systems have different numbers of subspaces"));
    }
    let (d, dt) = (s.ambient_dim, target.ambient_dim);
    let unknowns = dt * d;
    if unknowns == 0 {
        return Ok(SubspaceHomSpace { basis: Vec::new() });
    }
    // vec(L X R) in row-major order: coefficient of X[k,l] in row (r,c) is L[r,k] R[l,c].
    let mut system = ComplexMatrix::zeros(s.len() * unknowns, unknowns);
    for (idx, (p, pt)) in s.projections.iter().zip(&target.projections).enumerate() {
        let left = &ComplexMatrix::identity(dt) - pt;
        for r in 0..dt {
            for col in 0..d {
                let row = idx * unknowns + r * d + col;
                for k in 0..dt {
                    if left[(r, k)] == c(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..d {
                        system[(row, k * d + l)] = left[(r, k)] * p[(l, col)];
                    }
                }
            }
        }
    }
    let basis = nullspace_scaled(&system, 1.0, tol)?
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(dt, d, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceHomSpace { basis })
}

/// Lifts `C_0 ∈ Hom(S, S̃)` to the morphism `G(S) → G(S̃)` with leaf
/// components `C_i = √(α_i/α̃_i) Γ̃_i* C_0 Γ_i`.
pub fn transport_morphism(
    c0: &ComplexMatrix,
    s: &ProjectionSystem,
    target: &ProjectionSystem,
    tol: &TolerancePolicy,
) -> Result<Morphism> {
    if s.len() != target.len() {
        return Err(Error::invalid("systems have different numbers of subspaces"));
    }
    if c0.shape() != (target.ambient_dim, s.ambient_dim) {
        return Err(Error::invalid("C_0 has the wrong shape"));
    }
    let alpha = s.weights.as_ref().ok_or_else(|| Error::invalid("source system needs weights"))?;
    let alpha_t = target.weights.as_ref().ok_or_else(|| Error::invalid("target system needs weights"))?;
    let residual = subspace_morphism_residual(c0, s, target);
    if residual > tol.rank_rel_tol * (1.0 + c0.frobenius_norm()) * libm::sqrt(s.len() as f64) {
        return Err(Error::NotAMorphism { residual });
    }
    let g = embeddings(s)?;
    let gt = embeddings(target)?;
    let mut out = Morphism::default();
    out.insert(VertexId(0), c0.clone());
    for k in 0..s.len() {
        let (gi, gti) = (&g.isometries[k], &gt.isometries[k]);
        let ci = if gi.cols() == 0 || gti.cols() == 0 {
            ComplexMatrix::zeros(gti.cols(), gi.cols())
        } else {
            (&(&gti.adjoint() * c0) * gi).scale_real(libm::sqrt(alpha[k] / alpha_t[k]))
        };
        out.insert(VertexId(k as u32 + 1), ci);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem2Report {
    /// `dim End_*(G(S))`: one exactly when `S` is indecomposable among
    /// orthoscalar systems.
    pub orthoscalar_end_dim: usize,
    /// `dim End(S)` among all systems of subspaces.
    pub subspace_end_dim: usize,
}

impl Theorem2Report {
    pub fn indecomposable(&self) -> bool {
        self.orthoscalar_end_dim == 1
    }

    pub fn schur(&self) -> bool {
        self.subspace_end_dim == 1
    }

    /// Indecomposable implies Schur; vacuous otherwise.
    pub fn holds(&self) -> bool {
        !self.indecomposable() || self.schur()
    }
}

/// Compares the two endomorphism dimensions for an orthoscalar system.
/// Missing weights are solved for first.
pub fn theorem2_verify(s: &ProjectionSystem, tol: &TolerancePolicy) -> Result<Theorem2Report> {
    let s = match s.weights {
        Some(_) => s.clone(),
        None => s.clone().with_weights(solve_weights(s, tol)?.weights)?,
    };
    let t = functor_g(&s, tol)?;
    let orthoscalar_end_dim = end_space(&t, Category::Star, tol)?.dimension();
    let subspace_end_dim = hom_space_p(&s, &s, tol)?.dimension();
    Ok(Theorem2Report { orthoscalar_end_dim, subspace_end_dim })
}

/// Plain morphism spaces of star representations, as counted by [`hom_space`],
/// for comparison with [`hom_space_p`] on their images.
pub fn star_hom_dimension(t: &Representation, target: &Representation, tol: &TolerancePolicy) -> Result<usize> {
    Ok(hom_space(t, target, Category::Plain, tol)?.dimension())
}

/// Relative residual of `C_0 T(γ_i) = T̃(γ_i) C_i` over all leaves.
pub fn transport_residual(m: &Morphism, t: &Representation, target: &Representation) -> Result<f64> {
    Ok(intertwining_residual(m, t, target, Category::Plain)? / (1.0 + m.norm()))
}
