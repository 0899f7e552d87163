//! Intertwiner spaces in the plain category (`C_h T_α = T̃_α C_t`) and in the
//! `*`-category (additionally `C_t T_α* = T̃_α* C_h`), endomorphism algebras,
//! Schur tests and unitary equivalence.
//!
//! A hom space is the nullspace of one stacked homogeneous system in all
//! entries of all vertex matrices `C_v`; the basis is orthonormal for the
//! entrywise inner product.

mod decompose;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use decompose::{decompose, DecompositionResult};

use crate::error::{Error, Result};
use crate::linalg::{c, nearest_isometry, nullspace, svd, ComplexMatrix, TolerancePolicy, C64};
use crate::quiver::VertexId;
use crate::random::{complex_gaussian, rng_from_seed, SeededRng};
use crate::representation::Representation;

/// Retry budget for randomized witnesses.
pub const MAX_RESAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Representations of the quiver over plain vector spaces.
    Plain,
    /// Hilbert-space representations with adjoint-compatible morphisms.
    Star,
}

/// A family of vertex matrices `C_v : T(v) → T̃(v)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Morphism {
    components: BTreeMap<VertexId, ComplexMatrix>,
}

impl Morphism {
    pub fn new(components: BTreeMap<VertexId, ComplexMatrix>) -> Self {
        Self { components }
    }

    pub fn get(&self, v: VertexId) -> Option<&ComplexMatrix> {
        self.components.get(&v)
    }

    pub fn insert(&mut self, v: VertexId, m: ComplexMatrix) {
        self.components.insert(v, m);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &ComplexMatrix)> {
        self.components.iter()
    }

    pub fn identity(t: &Representation) -> Self {
        Self::scalar(t, c(1.0, 0.0))
    }

    pub fn scalar(t: &Representation, value: C64) -> Self {
        Self { components: t.dims().iter().map(|(&v, &d)| (v, ComplexMatrix::scalar(d, value))).collect() }
    }

    /// Vertexwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self { components: self.components.iter().map(|(&v, m)| (v, m.adjoint())).collect() }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.components.values().map(|m| { let n = m.frobenius_norm(); n * n }).sum::<f64>())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { components: self.components.iter().map(|(&v, m)| (v, m.scale(s))).collect() }
    }

    /// Vertexwise sum; both families must cover the same vertices.
    pub fn add(&self, other: &Self) -> Self {
        Self { components: self.components.iter().map(|(&v, m)| (v, m + &other.components[&v])).collect() }
    }

    /// Vertexwise composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { components: self.components.iter().map(|(&v, m)| (v, m * &other.components[&v])).collect() }
    }

    /// `Some(c)` when every component is `c·I` up to `slack · ‖C‖`.
    pub fn scalar_value(&self, slack: f64) -> Option<C64> {
        let total: usize = self.components.values().map(|m| m.rows()).sum();
        if total == 0 {
            return None;
        }
        let trace: C64 = self.components.values().map(|m| m.trace()).sum();
        let value = trace / total as f64;
        let limit = slack * self.norm().max(value.norm());
        let ok = self.components.values().all(|m| m.is_square() && m.distance_to_scalar(value) <= limit);
        ok.then_some(value)
    }

    /// Sum of `b_k · E_k`.
    pub fn combination(basis: &[Morphism], coeffs: &[C64]) -> Self {
        let mut out = basis[0].scale(coeffs[0]);
        for (b, &k) in basis.iter().zip(coeffs).skip(1) {
            out = out.add(&b.scale(k));
        }
        out
    }
}

/// Residual of the defining equations of `category` for `C: T → T̃`:
/// the Frobenius norm of all stacked equation defects.
pub fn intertwining_residual(
    morphism: &Morphism,
    source: &Representation,
    target: &Representation,
    category: Category,
) -> Result<f64> {
    if source.quiver() != target.quiver() {
        return Err(Error::invalid("representations live on different quivers"));
    }
    let mut acc = 0.0;
    for a in source.quiver().arrows() {
        let ch = morphism.get(a.head).ok_or_else(|| Error::invalid("missing vertex component"))?;
        let ct = morphism.get(a.tail).ok_or_else(|| Error::invalid("missing vertex component"))?;
        if ch.shape() != (target.dim(a.head), source.dim(a.head))
            || ct.shape() != (target.dim(a.tail), source.dim(a.tail))
        {
            return Err(Error::invalid("morphism component has the wrong shape"));
        }
        let t = source.block(a.id);
        let tt = target.block(a.id);
        let r = (ch * t).distance(&(tt * ct));
        acc += r * r;
        if category == Category::Star {
            let r = (ct * &t.adjoint()).distance(&(&tt.adjoint() * ch));
            acc += r * r;
        }
    }
    Ok(libm::sqrt(acc))
}

/// Membership slack for a unit-scale morphism between `source` and `target`.
pub(crate) fn membership_slack(source: &Representation, target: &Representation, tol: &TolerancePolicy) -> f64 {
    let scale: f64 = source.blocks().values().chain(target.blocks().values()).map(|b| b.frobenius_norm()).sum();
    tol.rank_rel_tol * (1.0 + scale)
}

#[derive(Debug, Clone)]
pub struct HomSpace {
    pub category: Category,
    pub source: Representation,
    pub target: Representation,
    pub basis: Vec<Morphism>,
}

impl HomSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// A random element `Σ z_k E_k` with complex Gaussian coefficients.
    pub fn sample(&self, rng: &mut SeededRng) -> Option<Morphism> {
        if self.basis.is_empty() {
            return None;
        }
        let coeffs: Vec<C64> = (0..self.basis.len()).map(|_| complex_gaussian(rng)).collect();
        Some(Morphism::combination(&self.basis, &coeffs))
    }

    /// Largest defining-equation residual over the basis.
    pub fn worst_residual(&self) -> f64 {
        self.basis
            .iter()
            .map(|b| intertwining_residual(b, &self.source, &self.target, self.category).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

/// Column offsets of each vertex block of unknowns, in quiver order.
struct UnknownLayout {
    offsets: BTreeMap<VertexId, (usize, usize, usize)>,
    total: usize,
}

impl UnknownLayout {
    fn new(source: &Representation, target: &Representation) -> Self {
        let mut offsets = BTreeMap::new();
        let mut total = 0;
        for v in source.quiver().vertices() {
            let (rows, cols) = (target.dim(v.id), source.dim(v.id));
            offsets.insert(v.id, (total, rows, cols));
            total += rows * cols;
        }
        Self { offsets, total }
    }

    /// Column index of `C_v[r, s]`.
    fn index(&self, v: VertexId, r: usize, s: usize) -> usize {
        let (off, _, cols) = self.offsets[&v];
        off + r * cols + s
    }

    fn unpack(&self, x: &[C64]) -> Morphism {
        let mut m = Morphism::default();
        for (&v, &(off, rows, cols)) in &self.offsets {
            m.insert(v, ComplexMatrix::from_fn(rows, cols, |r, s| x[off + r * cols + s]));
        }
        m
    }
}

/// Builds the stacked linear system whose nullspace is `Hom(T, T̃)`.
fn intertwiner_system(source: &Representation, target: &Representation, category: Category) -> (ComplexMatrix, UnknownLayout) {
    let layout = UnknownLayout::new(source, target);
    let mut rows: Vec<Vec<(usize, C64)>> = Vec::new();
    for a in source.quiver().arrows() {
        let (h, t) = (a.head, a.tail);
        let tb = source.block(a.id);
        let ttb = target.block(a.id);
        // C_h T − T̃ C_t = 0, entries (r, s) ∈ d̃(h) × d(t)
        for r in 0..target.dim(h) {
            for s in 0..source.dim(t) {
                let mut row = Vec::new();
                for k in 0..source.dim(h) {
                    row.push((layout.index(h, r, k), tb[(k, s)]));
                }
                for k in 0..target.dim(t) {
                    row.push((layout.index(t, k, s), -ttb[(r, k)]));
                }
                rows.push(row);
            }
        }
        if category == Category::Star {
            // C_t T* − T̃* C_h = 0, entries (r, s) ∈ d̃(t) × d(h)
            for r in 0..target.dim(t) {
                for s in 0..source.dim(h) {
                    let mut row = Vec::new();
                    for k in 0..source.dim(t) {
                        row.push((layout.index(t, r, k), tb[(s, k)].conj()));
                    }
                    for k in 0..target.dim(h) {
                        row.push((layout.index(h, k, s), -ttb[(k, r)].conj()));
                    }
                    rows.push(row);
                }
            }
        }
    }
    let mut m = ComplexMatrix::zeros(rows.len(), layout.total);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            m[(i, j)] += v;
        }
    }
    (m, layout)
}

pub fn hom_space(
    source: &Representation,
    target: &Representation,
    category: Category,
    tol: &TolerancePolicy,
) -> Result<HomSpace> {
    if source.quiver() != target.quiver() {
        return Err(Error::invalid("representations live on different quivers"));
    }
    let (system, layout) = intertwiner_system(source, target, category);
    let basis = if layout.total == 0 {
        Vec::new()
    } else {
        nullspace(&system, tol)?.iter().map(|v| layout.unpack(v)).collect()
    };
    Ok(HomSpace { category, source: source.clone(), target: target.clone(), basis })
}

pub fn end_space(t: &Representation, category: Category, tol: &TolerancePolicy) -> Result<HomSpace> {
    hom_space(t, t, category, tol)
}

/// Whether `End(T)` in `category` is one-dimensional. A one-dimensional
/// space spanned by a non-scalar family is reported as a numerical failure.
pub fn is_schur(t: &Representation, category: Category, tol: &TolerancePolicy) -> Result<bool> {
    let end = end_space(t, category, tol)?;
    schur_from_end(&end, tol)
}

pub(crate) fn schur_from_end(end: &HomSpace, tol: &TolerancePolicy) -> Result<bool> {
    if end.dimension() != 1 {
        return Ok(false);
    }
    match end.basis[0].scalar_value(tol.scalar_tol()) {
        Some(_) => Ok(true),
        None => Err(Error::NumericalDegeneracy(
            "one-dimensional endomorphism space is not spanned by a scalar family".into(),
        )),
    }
}

/// In the `*`-category the endomorphism algebra of an indecomposable object
/// is semisimple and local, hence `C`; indecomposable there means Schur.
pub fn is_indecomposable_star(t: &Representation, tol: &TolerancePolicy) -> Result<bool> {
    is_schur(t, Category::Star, tol)
}

/// Vertexwise adjoint of a `*`-morphism `T → T̃`, checked to lie in
/// `Hom_*(T̃, T)`.
pub fn adjoint(
    morphism: &Morphism,
    source: &Representation,
    target: &Representation,
    tol: &TolerancePolicy,
) -> Result<Morphism> {
    let adj = morphism.adjoint();
    let residual = intertwining_residual(&adj, target, source, Category::Star)?;
    let slack = membership_slack(source, target, tol) * (1.0 + morphism.norm());
    if residual > slack {
        return Err(Error::InconsistentInput(alloc::format!(
            "adjoint misses Hom_*(target, source) by {residual:e}; input was not a *-morphism"
        )));
    }
    Ok(adj)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    /// A vertexwise unitary witness `U` with `U_h T_α U_t* = T̃_α`.
    Equivalent { witness: Morphism, residual: f64 },
    NotEquivalent { reason: &'static str },
    /// An invertible `*`-morphism was found but its unitary polar factor
    /// failed verification.
    EquivalentWithoutWitness { residual: f64 },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        !matches!(self, Equivalence::NotEquivalent { .. })
    }
}

fn invertible_everywhere(m: &Morphism, tol: &TolerancePolicy) -> Result<bool> {
    for (_, block) in m.iter() {
        if block.rows() != block.cols() {
            return Ok(false);
        }
        if block.rows() == 0 {
            continue;
        }
        let s = svd(block)?;
        let smin = *s.singular_values.last().unwrap();
        if smin <= tol.rank_rel_tol * s.sigma_max() || s.sigma_max() == 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Relative Eq.-6 residual `max_α ‖U_h T_α − T̃_α U_t‖ / (1 + ‖T‖)`.
pub fn unitary_witness_residual(witness: &Morphism, source: &Representation, target: &Representation) -> Result<f64> {
    let scale: f64 = source.blocks().values().map(|b| b.frobenius_norm()).sum();
    Ok(intertwining_residual(witness, source, target, Category::Plain)? / (1.0 + scale))
}

/// Decides unitary equivalence in the `*`-category and produces a witness.
pub fn are_equivalent_star(
    source: &Representation,
    target: &Representation,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<Equivalence> {
    if source.quiver() != target.quiver() {
        return Err(Error::invalid("representations live on different quivers"));
    }
    if source.dims() != target.dims() {
        return Ok(Equivalence::NotEquivalent { reason: "dimension vectors differ" });
    }
    if source.total_dim() == 0 {
        return Ok(Equivalence::Equivalent { witness: Morphism::identity(source), residual: 0.0 });
    }
    // Characters are unitary invariants; compare when both are orthoscalar.
    if let (Ok(a), Ok(b)) = (source.orthoscalar_check(tol), target.orthoscalar_check(tol)) {
        if let (Some(ca), Some(cb)) = (a.character(), b.character()) {
            let differs = ca.iter().any(|(v, x)| (x - cb[v]).abs() > tol.scalar_tol() * (1.0 + x.abs()));
            if differs {
                return Ok(Equivalence::NotEquivalent { reason: "characters differ" });
            }
        }
    }
    let forward = hom_space(source, target, Category::Star, tol)?;
    let backward = hom_space(target, source, Category::Star, tol)?;
    let end = end_space(source, Category::Star, tol)?;
    if forward.dimension() == 0
        || forward.dimension() != backward.dimension()
        || forward.dimension() != end.dimension()
    {
        return Ok(Equivalence::NotEquivalent { reason: "hom space dimensions are asymmetric" });
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_RESAMPLES {
        let candidate = forward.sample(&mut rng).expect("nonempty basis");
        if !invertible_everywhere(&candidate, tol)? {
            continue;
        }
        let mut witness = Morphism::default();
        for (&v, block) in candidate.iter() {
            let u = if block.rows() == 0 { block.clone() } else { nearest_isometry(block)? };
            witness.insert(v, u);
        }
        let residual = unitary_witness_residual(&witness, source, target)?;
        if residual <= tol.rank_rel_tol {
            return Ok(Equivalence::Equivalent { witness, residual });
        }
        return Ok(Equivalence::EquivalentWithoutWitness { residual });
    }
    Ok(Equivalence::NotEquivalent { reason: "no invertible *-morphism found" })
}
