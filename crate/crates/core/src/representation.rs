//! Representations as block complex matrices.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, TolerancePolicy};
use crate::morphism::Morphism;
use crate::quiver::{ArrowId, Character, DimensionVector, Parity, Quiver, VertexId};
use crate::random::{gaussian_matrix, rng_from_seed};

/// A space `C^{d(i)}` per vertex and a `d(head) × d(tail)` block per arrow.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    quiver: Quiver,
    dims: DimensionVector,
    blocks: BTreeMap<ArrowId, ComplexMatrix>,
}

/// Per-vertex outcome of the orthoscalarity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexResidual {
    pub vertex: VertexId,
    /// `trace G / d` for the vertex Gram matrix `G`.
    pub chi: f64,
    /// `‖G − χ I‖_F / (1 + χ)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoscalarReport {
    pub is_orthoscalar: bool,
    pub threshold: f64,
    pub worst_residual: f64,
    /// Support vertices only, in quiver order.
    pub vertices: Vec<VertexResidual>,
}

impl OrthoscalarReport {
    /// The character on the support, when the representation is orthoscalar.
    pub fn character(&self) -> Option<Character> {
        self.is_orthoscalar.then(|| self.vertices.iter().map(|v| (v.vertex, v.chi)).collect())
    }

    /// Fitted χ values even when the test fails.
    pub fn fitted(&self) -> Character {
        self.vertices.iter().map(|v| (v.vertex, v.chi)).collect()
    }
}

impl Representation {
    pub fn new(quiver: Quiver, dims: DimensionVector, blocks: BTreeMap<ArrowId, ComplexMatrix>) -> Result<Self> {
        for v in quiver.vertices() {
            if !dims.contains_key(&v.id) {
                return Err(Error::invalid(format!("dimension missing at vertex {}", v.id.0)));
            }
        }
        if dims.len() != quiver.vertices().len() {
            return Err(Error::invalid("dimension vector names unknown vertices"));
        }
        for a in quiver.arrows() {
            let block = blocks
                .get(&a.id)
                .ok_or_else(|| Error::invalid(format!("block missing for arrow {}", a.id.0)))?;
            let expect = (dims[&a.head], dims[&a.tail]);
            if block.shape() != expect {
                return Err(Error::invalid(format!(
                    "arrow {} block is {}x{}, expected {}x{}",
                    a.id.0,
                    block.rows(),
                    block.cols(),
                    expect.0,
                    expect.1
                )));
            }
            if !block.is_finite() {
                return Err(Error::invalid(format!("arrow {} block has non-finite entries", a.id.0)));
            }
        }
        if blocks.len() != quiver.arrows().len() {
            return Err(Error::invalid("blocks given for unknown arrows"));
        }
        Ok(Self { quiver, dims, blocks })
    }

    pub fn zero(quiver: Quiver, dims: DimensionVector) -> Result<Self> {
        let blocks = quiver
            .arrows()
            .iter()
            .map(|a| {
                let r = dims.get(&a.head).copied().unwrap_or(0);
                let c = dims.get(&a.tail).copied().unwrap_or(0);
                (a.id, ComplexMatrix::zeros(r, c))
            })
            .collect();
        Self::new(quiver, dims, blocks)
    }

    /// Independent standard complex Gaussian entries, deterministic per seed.
    pub fn random(quiver: &Quiver, dims: &DimensionVector, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut blocks = BTreeMap::new();
        for a in quiver.arrows() {
            let r = dims.get(&a.head).copied().unwrap_or(0);
            let c = dims.get(&a.tail).copied().unwrap_or(0);
            blocks.insert(a.id, gaussian_matrix(r, c, &mut rng));
        }
        Self::new(quiver.clone(), dims.clone(), blocks)
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn dim(&self, v: VertexId) -> usize {
        self.dims.get(&v).copied().unwrap_or(0)
    }

    pub fn block(&self, a: ArrowId) -> &ComplexMatrix {
        &self.blocks[&a]
    }

    pub fn blocks(&self) -> &BTreeMap<ArrowId, ComplexMatrix> {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn support(&self) -> BTreeSet<VertexId> {
        self.dims.iter().filter(|(_, &d)| d != 0).map(|(&v, _)| v).collect()
    }

    pub fn is_faithful(&self) -> bool {
        self.dims.values().all(|&d| d != 0)
    }

    fn require_matrix_form(&self) -> Result<()> {
        self.quiver.require_separated_single()
    }

    /// The block matrix with odd vertices as block rows and even vertices as
    /// block columns; positions without an arrow are zero blocks.
    pub fn assemble_total(&self) -> Result<ComplexMatrix> {
        self.require_matrix_form()?;
        let odd = self.quiver.odd_vertices();
        let even = self.quiver.even_vertices();
        let rows = odd.iter().map(|&v| self.dim(v)).sum();
        let cols = even.iter().map(|&v| self.dim(v)).sum();
        let mut total = ComplexMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for &i in &odd {
            let mut c0 = 0;
            for &j in &even {
                if let Some(a) = self.quiver.arrow_between(j, i) {
                    total.set_block(r0, c0, &self.blocks[&a.id]);
                }
                c0 += self.dim(j);
            }
            r0 += self.dim(i);
        }
        Ok(total)
    }

    /// `T_i→ : ⊕_k T(j_k) → T(i)` for an odd vertex `i`.
    pub fn row_strip(&self, i: VertexId) -> Result<ComplexMatrix> {
        self.require_matrix_form()?;
        if self.quiver.parity(i) != Some(Parity::Odd) {
            return Err(Error::invalid(format!("vertex {} is not odd", i.0)));
        }
        let even = self.quiver.even_vertices();
        let di = self.dim(i);
        let parts: Vec<ComplexMatrix> = even
            .iter()
            .map(|&j| match self.quiver.arrow_between(j, i) {
                Some(a) => self.blocks[&a.id].clone(),
                None => ComplexMatrix::zeros(di, self.dim(j)),
            })
            .collect();
        Ok(ComplexMatrix::hstack(di, &parts.iter().collect::<Vec<_>>()))
    }

    /// `T_j↓ : T(j) → ⊕_l T(i_l)` for an even vertex `j`.
    pub fn column_strip(&self, j: VertexId) -> Result<ComplexMatrix> {
        self.require_matrix_form()?;
        if self.quiver.parity(j) != Some(Parity::Even) {
            return Err(Error::invalid(format!("vertex {} is not even", j.0)));
        }
        let odd = self.quiver.odd_vertices();
        let dj = self.dim(j);
        let parts: Vec<ComplexMatrix> = odd
            .iter()
            .map(|&i| match self.quiver.arrow_between(j, i) {
                Some(a) => self.blocks[&a.id].clone(),
                None => ComplexMatrix::zeros(self.dim(i), dj),
            })
            .collect();
        Ok(ComplexMatrix::vstack(dj, &parts.iter().collect::<Vec<_>>()))
    }

    /// `Σ_{h(α)=v} T_α T_α* + Σ_{t(α)=v} T_α* T_α`. On a separated quiver
    /// this is the row-strip Gram at odd vertices and the column-strip Gram
    /// at even ones; on a loop it is `TT* + T*T`.
    pub fn vertex_gram(&self, v: VertexId) -> ComplexMatrix {
        let d = self.dim(v);
        let mut g = ComplexMatrix::zeros(d, d);
        for a in self.quiver.arrows() {
            let t = &self.blocks[&a.id];
            if a.head == v {
                g = &g + &(t * &t.adjoint());
            }
            if a.tail == v {
                g = &g + &(&t.adjoint() * t);
            }
        }
        g
    }

    /// Fits `G_v ≈ χ_v I` at every support vertex and reports the worst
    /// relative residual. Supported on separated single quivers and on the
    /// single loop.
    pub fn orthoscalar_check(&self, tol: &TolerancePolicy) -> Result<OrthoscalarReport> {
        let shape = self.quiver.structure();
        if !(shape.is_single_loop || (shape.is_separated && shape.is_single)) {
            return Err(Error::UnsupportedShape(
                "orthoscalarity is defined for separated single quivers and the single loop".into(),
            ));
        }
        let threshold = tol.rank_rel_tol;
        let mut vertices = Vec::new();
        let mut worst: f64 = 0.0;
        let mut positive = true;
        for v in self.quiver.vertices() {
            let d = self.dim(v.id);
            if d == 0 {
                continue;
            }
            let g = self.vertex_gram(v.id);
            let chi = g.trace().re / d as f64;
            let residual = g.distance_to_scalar(crate::linalg::c(chi, 0.0)) / (1.0 + chi.abs());
            positive &= chi > threshold;
            worst = worst.max(residual);
            vertices.push(VertexResidual { vertex: v.id, chi, residual });
        }
        Ok(OrthoscalarReport { is_orthoscalar: positive && worst <= threshold, threshold, worst_residual: worst, vertices })
    }

    /// Orthogonal direct sum: dimensions add, blocks become block diagonal.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.quiver != other.quiver {
            return Err(Error::invalid("direct sum needs representations of the same quiver"));
        }
        let dims = self.dims.iter().map(|(&v, &d)| (v, d + other.dim(v))).collect();
        let blocks = self
            .blocks
            .iter()
            .map(|(&a, b)| (a, ComplexMatrix::block_diag(&[b, &other.blocks[&a]])))
            .collect();
        Self::new(self.quiver.clone(), dims, blocks)
    }

    /// Direct sum of a nonempty list.
    pub fn direct_sum_all(parts: &[Self]) -> Result<Self> {
        let (first, rest) = parts.split_first().ok_or_else(|| Error::invalid("empty direct sum"))?;
        rest.iter().try_fold(first.clone(), |acc, p| acc.direct_sum(p))
    }

    /// Blockwise `U_{h(α)} T_α V_{t(α)}*` for per-vertex matrices `U`.
    pub fn conjugate(&self, unitaries: &Morphism) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for a in self.quiver.arrows() {
            let uh = unitaries.get(a.head).ok_or_else(|| Error::invalid("missing vertex matrix"))?;
            let ut = unitaries.get(a.tail).ok_or_else(|| Error::invalid("missing vertex matrix"))?;
            if uh.cols() != self.dim(a.head) || ut.cols() != self.dim(a.tail) {
                return Err(Error::invalid("vertex matrix shape mismatch"));
            }
            blocks.insert(a.id, &(uh * &self.blocks[&a.id]) * &ut.adjoint());
        }
        let dims = self
            .quiver
            .vertices()
            .iter()
            .map(|v| (v.id, unitaries.get(v.id).map_or(0, |m| m.rows())))
            .collect();
        Self::new(self.quiver.clone(), dims, blocks)
    }

    /// Replaces one block, keeping the shape.
    pub fn with_block(&self, a: ArrowId, block: ComplexMatrix) -> Result<Self> {
        let mut blocks = self.blocks.clone();
        blocks.insert(a, block);
        Self::new(self.quiver.clone(), self.dims.clone(), blocks)
    }

    /// Multiplies every block by a positive real.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            quiver: self.quiver.clone(),
            dims: self.dims.clone(),
            blocks: self.blocks.iter().map(|(&a, b)| (a, b.scale_real(s))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::quiver::{balance_check, star_quiver};
    use crate::random::{random_unitary, rng_from_seed};
    use proptest::prelude::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn dims_of(pairs: &[(u32, usize)]) -> DimensionVector {
        pairs.iter().map(|&(v, d)| (VertexId(v), d)).collect()
    }

    /// Columns `√(2/3)·v_k` with `v_k` unit vectors at 120°.
    pub(crate) fn equiangular() -> Representation {
        let q = star_quiver(3).unwrap();
        let s = (2.0f64 / 3.0).sqrt();
        let mut blocks = BTreeMap::new();
        for k in 0..3 {
            let th = 2.0 * core::f64::consts::PI * k as f64 / 3.0;
            blocks.insert(
                ArrowId(k + 1),
                ComplexMatrix::from_real_rows(&[&[s * th.cos()], &[s * th.sin()]]),
            );
        }
        Representation::new(q, dims_of(&[(0, 2), (1, 1), (2, 1), (3, 1)]), blocks).unwrap()
    }

    fn a2(value: f64) -> Representation {
        let mut blocks = BTreeMap::new();
        blocks.insert(ArrowId(0), ComplexMatrix::from_real_rows(&[&[value]]));
        Representation::new(Quiver::a2(), dims_of(&[(0, 1), (1, 1)]), blocks).unwrap()
    }

    #[test]
    fn block_shapes_are_validated() {
        let mut blocks = BTreeMap::new();
        blocks.insert(ArrowId(0), ComplexMatrix::zeros(2, 1));
        let err = Representation::new(Quiver::a2(), dims_of(&[(0, 1), (1, 1)]), blocks).unwrap_err();
        assert_eq!(err.code(), "invalid-input");
    }

    #[test]
    fn total_matrix_examples() {
        let t = a2(0.5).assemble_total().unwrap();
        assert_eq!(t, ComplexMatrix::from_real_rows(&[&[0.5]]));

        let q = star_quiver(2).unwrap();
        let mut blocks = BTreeMap::new();
        blocks.insert(ArrowId(1), ComplexMatrix::from_real_rows(&[&[1.0]]));
        blocks.insert(ArrowId(2), ComplexMatrix::from_real_rows(&[&[1.0]]));
        let r = Representation::new(q, dims_of(&[(0, 1), (1, 1), (2, 1)]), blocks).unwrap();
        assert_eq!(r.assemble_total().unwrap(), ComplexMatrix::from_real_rows(&[&[1.0, 1.0]]));

        let e = equiangular();
        let t = e.assemble_total().unwrap();
        assert_eq!(t.shape(), (2, 3));
        for k in 0..3u32 {
            assert_eq!(t.block(0, k as usize, 2, 1), *e.block(ArrowId(k + 1)));
        }
    }

    #[test]
    fn loop_has_no_matrix_form() {
        let mut blocks = BTreeMap::new();
        blocks.insert(ArrowId(0), ComplexMatrix::identity(2));
        let r = Representation::new(Quiver::loop_quiver(), dims_of(&[(0, 2)]), blocks).unwrap();
        assert_eq!(r.assemble_total().unwrap_err().code(), "unsupported-shape");
    }

    #[test]
    fn strips() {
        let r = a2(3.0);
        assert_eq!(r.row_strip(VertexId(1)).unwrap(), ComplexMatrix::from_real_rows(&[&[3.0]]));
        assert_eq!(r.row_strip(VertexId(0)).unwrap_err().code(), "invalid-input");
        assert_eq!(r.column_strip(VertexId(1)).unwrap_err().code(), "invalid-input");

        let q = star_quiver(2).unwrap();
        let r = Representation::random(&q, &dims_of(&[(0, 2), (1, 1), (2, 3)]), 5).unwrap();
        let col = r.column_strip(VertexId(1)).unwrap();
        assert_eq!(col.shape(), (2, 1));
        assert_eq!(col, *r.block(ArrowId(1)));
    }

    #[test]
    fn row_strips_stack_to_total() {
        // Two odd and three even vertices, not every pair joined.
        use crate::quiver::{Arrow, Vertex};
        let q = Quiver::new(
            alloc::vec![
                Vertex { id: VertexId(10), parity: Parity::Odd },
                Vertex { id: VertexId(1), parity: Parity::Even },
                Vertex { id: VertexId(11), parity: Parity::Odd },
                Vertex { id: VertexId(2), parity: Parity::Even },
                Vertex { id: VertexId(3), parity: Parity::Even },
            ],
            alloc::vec![
                Arrow { id: ArrowId(0), tail: VertexId(1), head: VertexId(10) },
                Arrow { id: ArrowId(1), tail: VertexId(2), head: VertexId(10) },
                Arrow { id: ArrowId(2), tail: VertexId(2), head: VertexId(11) },
                Arrow { id: ArrowId(3), tail: VertexId(3), head: VertexId(11) },
            ],
        )
        .unwrap();
        let r = Representation::random(&q, &dims_of(&[(10, 2), (11, 1), (1, 2), (2, 1), (3, 3)]), 9).unwrap();
        let rows: Vec<_> = [10, 11].iter().map(|&i| r.row_strip(VertexId(i)).unwrap()).collect();
        let stacked = ComplexMatrix::vstack(6, &rows.iter().collect::<Vec<_>>());
        assert_eq!(stacked, r.assemble_total().unwrap());
        let cols: Vec<_> = [1, 2, 3].iter().map(|&j| r.column_strip(VertexId(j)).unwrap()).collect();
        assert_eq!(ComplexMatrix::hstack(3, &cols.iter().collect::<Vec<_>>()), r.assemble_total().unwrap());
    }

    #[test]
    fn remark_loop_is_orthoscalar() {
        let mut blocks = BTreeMap::new();
        blocks.insert(ArrowId(0), ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, -1.0]]));
        let r = Representation::new(Quiver::loop_quiver(), dims_of(&[(0, 2)]), blocks).unwrap();
        let rep = r.orthoscalar_check(&tol()).unwrap();
        assert!(rep.is_orthoscalar);
        assert_eq!(rep.worst_residual, 0.0);
        assert_eq!(rep.character().unwrap()[&VertexId(0)], 3.0);
    }

    #[test]
    fn a2_character() {
        let rep = a2(2.0).orthoscalar_check(&tol()).unwrap();
        assert!(rep.is_orthoscalar);
        let chi = rep.character().unwrap();
        assert_eq!(chi[&VertexId(0)], 4.0);
        assert_eq!(chi[&VertexId(1)], 4.0);
    }

    #[test]
    fn equiangular_character() {
        let rep = equiangular().orthoscalar_check(&tol()).unwrap();
        assert!(rep.is_orthoscalar, "{rep:?}");
        let chi = rep.character().unwrap();
        assert!((chi[&VertexId(0)] - 1.0).abs() < 1e-14);
        for k in 1..=3 {
            assert!((chi[&VertexId(k)] - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn non_orthoscalar_detected() {
        let q = star_quiver(2).unwrap();
        let r = Representation::random(&q, &dims_of(&[(0, 2), (1, 1), (2, 1)]), 1).unwrap();
        assert!(!r.orthoscalar_check(&tol()).unwrap().is_orthoscalar);
        let z = Representation::zero(Quiver::a2(), dims_of(&[(0, 1), (1, 1)])).unwrap();
        assert!(!z.orthoscalar_check(&tol()).unwrap().is_orthoscalar);
    }

    #[test]
    fn parallel_arrows_unsupported() {
        use crate::quiver::{Arrow, Vertex};
        let q = Quiver::new(
            alloc::vec![
                Vertex { id: VertexId(0), parity: Parity::Even },
                Vertex { id: VertexId(1), parity: Parity::Odd },
            ],
            alloc::vec![
                Arrow { id: ArrowId(0), tail: VertexId(0), head: VertexId(1) },
                Arrow { id: ArrowId(1), tail: VertexId(0), head: VertexId(1) },
            ],
        )
        .unwrap();
        let r = Representation::random(&q, &dims_of(&[(0, 1), (1, 1)]), 0).unwrap();
        assert_eq!(r.orthoscalar_check(&tol()).unwrap_err().code(), "unsupported-shape");
    }

    #[test]
    fn direct_sums() {
        let z = Representation::zero(Quiver::a2(), dims_of(&[(0, 0), (1, 0)])).unwrap();
        assert_eq!(a2(1.5).direct_sum(&z).unwrap(), a2(1.5));

        let s = a2(1.0).direct_sum(&a2(1.0)).unwrap();
        assert_eq!(s.block(ArrowId(0)), &ComplexMatrix::identity(2));

        let e = equiangular();
        let ee = e.direct_sum(&e).unwrap();
        let rep = ee.orthoscalar_check(&tol()).unwrap();
        assert!(rep.is_orthoscalar);
        let single = e.orthoscalar_check(&tol()).unwrap().character().unwrap();
        for (v, x) in rep.character().unwrap() {
            assert!((x - single[&v]).abs() < 1e-14);
        }

        let other = Representation::zero(star_quiver(2).unwrap(), dims_of(&[(0, 0), (1, 0), (2, 0)])).unwrap();
        assert_eq!(e.direct_sum(&other).unwrap_err().code(), "invalid-input");
    }

    #[test]
    fn support_and_faithfulness() {
        assert!(a2(1.0).is_faithful());
        let r = Representation::zero(Quiver::a2(), dims_of(&[(0, 0), (1, 2)])).unwrap();
        assert!(!r.is_faithful());
        assert_eq!(r.support().into_iter().collect::<Vec<_>>(), alloc::vec![VertexId(1)]);
        let z = Representation::zero(Quiver::a2(), dims_of(&[(0, 0), (1, 0)])).unwrap();
        assert!(z.support().is_empty());
    }

    #[test]
    fn random_is_seeded() {
        let q = star_quiver(3).unwrap();
        let d = dims_of(&[(0, 2), (1, 1), (2, 2), (3, 1)]);
        let a = Representation::random(&q, &d, 42).unwrap();
        let b = Representation::random(&q, &d, 42).unwrap();
        let c2 = Representation::random(&q, &d, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c2);
        assert_eq!(a.block(ArrowId(2)).shape(), (2, 2));
    }

    proptest! {
        #[test]
        fn unitary_conjugation_preserves_report(seed in 0u64..500) {
            let e = equiangular();
            let mut rng = rng_from_seed(seed);
            let mut fam = Morphism::default();
            for v in e.quiver().vertices() {
                fam.insert(v.id, random_unitary(e.dim(v.id), &mut rng));
            }
            let moved = e.conjugate(&fam).unwrap();
            let before = e.orthoscalar_check(&tol()).unwrap();
            let after = moved.orthoscalar_check(&tol()).unwrap();
            prop_assert!(after.is_orthoscalar);
            prop_assert!((after.worst_residual - before.worst_residual).abs() <= 1e-10);
            for (x, y) in before.vertices.iter().zip(&after.vertices) {
                prop_assert!((x.chi - y.chi).abs() <= 1e-10);
            }
        }

        #[test]
        fn orthoscalar_implies_balance(scale in 0.1f64..10.0, seed in 0u64..100) {
            let e = equiangular().scaled(scale);
            let mut rng = rng_from_seed(seed);
            let mut fam = Morphism::default();
            for v in e.quiver().vertices() {
                fam.insert(v.id, random_unitary(e.dim(v.id), &mut rng));
            }
            let e = e.conjugate(&fam).unwrap();
            let rep = e.orthoscalar_check(&tol()).unwrap();
            prop_assert!(rep.is_orthoscalar);
            prop_assert!(balance_check(e.quiver(), e.dims(), &rep.character().unwrap(), &tol()).unwrap());
        }

        #[test]
        fn total_matrix_is_linear(a in -3.0f64..3.0, seed in 0u64..100) {
            let q = star_quiver(3).unwrap();
            let d = dims_of(&[(0, 2), (1, 1), (2, 2), (3, 1)]);
            let x = Representation::random(&q, &d, seed).unwrap();
            let y = Representation::random(&q, &d, seed + 1000).unwrap();
            let combo = Representation::new(
                q.clone(),
                d.clone(),
                x.blocks().iter().map(|(&k, b)| (k, &b.scale(c(a, 0.0)) + y.block(k))).collect(),
            )
            .unwrap();
            let lhs = combo.assemble_total().unwrap();
            let rhs = &x.assemble_total().unwrap().scale(c(a, 0.0)) + &y.assemble_total().unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
