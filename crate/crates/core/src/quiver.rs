//! Quivers with an explicit even/odd vertex partition.
//!
//! A quiver is *separated* when every arrow runs from an even vertex to an
//! odd one, and *single* when no two arrows share both endpoints. The vertex
//! order given at construction fixes the block layout of representations:
//! odd vertices index block rows, even vertices index block columns.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub parity: Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrow {
    pub id: ArrowId,
    pub tail: VertexId,
    pub head: VertexId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub is_separated: bool,
    pub is_single: bool,
    pub is_single_loop: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quiver {
    vertices: Vec<Vertex>,
    arrows: Vec<Arrow>,
}

/// Dimension per vertex. Missing vertices read as zero.
pub type DimensionVector = BTreeMap<VertexId, usize>;

/// Positive scalar per support vertex.
pub type Character = BTreeMap<VertexId, f64>;

impl Quiver {
    /// Validates id uniqueness and arrow endpoints.
    pub fn new(vertices: Vec<Vertex>, arrows: Vec<Arrow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.id) {
                return Err(Error::invalid(format!("duplicate vertex id {}", v.id.0)));
            }
        }
        let mut seen_arrows = BTreeSet::new();
        for a in &arrows {
            if !seen_arrows.insert(a.id) {
                return Err(Error::invalid(format!("duplicate arrow id {}", a.id.0)));
            }
            for end in [a.tail, a.head] {
                if !seen.contains(&end) {
                    return Err(Error::invalid(format!(
                        "arrow {} has dangling endpoint {}",
                        a.id.0, end.0
                    )));
                }
            }
        }
        Ok(Self { vertices, arrows })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn arrow(&self, id: ArrowId) -> Option<&Arrow> {
        self.arrows.iter().find(|a| a.id == id)
    }

    pub fn parity(&self, id: VertexId) -> Option<Parity> {
        self.vertex(id).map(|v| v.parity)
    }

    /// Odd vertices in declaration order (block rows).
    pub fn odd_vertices(&self) -> Vec<VertexId> {
        self.vertices.iter().filter(|v| v.parity == Parity::Odd).map(|v| v.id).collect()
    }

    /// Even vertices in declaration order (block columns).
    pub fn even_vertices(&self) -> Vec<VertexId> {
        self.vertices.iter().filter(|v| v.parity == Parity::Even).map(|v| v.id).collect()
    }

    /// The arrow `tail → head`, if exactly one exists.
    pub fn arrow_between(&self, tail: VertexId, head: VertexId) -> Option<&Arrow> {
        let mut it = self.arrows.iter().filter(|a| a.tail == tail && a.head == head);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    pub fn structure(&self) -> StructureReport {
        let is_separated = self.arrows.iter().all(|a| {
            self.parity(a.tail) == Some(Parity::Even) && self.parity(a.head) == Some(Parity::Odd)
        });
        let mut pairs = BTreeSet::new();
        let is_single = self.arrows.iter().all(|a| pairs.insert((a.tail, a.head)));
        let is_single_loop =
            self.vertices.len() == 1 && self.arrows.len() == 1 && self.arrows[0].tail == self.arrows[0].head;
        StructureReport { is_separated, is_single, is_single_loop }
    }

    pub fn require_separated_single(&self) -> Result<()> {
        let s = self.structure();
        if !s.is_separated {
            return Err(Error::UnsupportedShape("quiver is not separated".into()));
        }
        if !s.is_single {
            return Err(Error::UnsupportedShape("quiver has parallel arrows".into()));
        }
        Ok(())
    }

    /// Single vertex carrying one loop; its parity is irrelevant.
    pub fn loop_quiver() -> Self {
        Self {
            vertices: alloc::vec![Vertex { id: VertexId(0), parity: Parity::Odd }],
            arrows: alloc::vec![Arrow { id: ArrowId(0), tail: VertexId(0), head: VertexId(0) }],
        }
    }

    /// One even vertex `0` with an arrow into one odd vertex `1`.
    pub fn a2() -> Self {
        Self {
            vertices: alloc::vec![
                Vertex { id: VertexId(0), parity: Parity::Even },
                Vertex { id: VertexId(1), parity: Parity::Odd },
            ],
            arrows: alloc::vec![Arrow { id: ArrowId(0), tail: VertexId(0), head: VertexId(1) }],
        }
    }

    /// Sum of `d·χ` over the given parity. Errors when χ is missing on the support.
    fn weighted_total(&self, parity: Parity, dims: &DimensionVector, chi: &Character) -> Result<f64> {
        let mut total = 0.0;
        for v in self.vertices.iter().filter(|v| v.parity == parity) {
            let d = dims.get(&v.id).copied().unwrap_or(0);
            if d == 0 {
                continue;
            }
            let x = *chi
                .get(&v.id)
                .ok_or_else(|| Error::invalid(format!("character missing at vertex {}", v.id.0)))?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!("character at vertex {} is not positive", v.id.0)));
            }
            total += d as f64 * x;
        }
        Ok(total)
    }

    /// `(Σ_odd d·χ, Σ_even d·χ)` over the support.
    pub fn balance_totals(&self, dims: &DimensionVector, chi: &Character) -> Result<(f64, f64)> {
        if !self.structure().is_separated {
            return Err(Error::invalid("balance identity needs a separated quiver"));
        }
        Ok((self.weighted_total(Parity::Odd, dims, chi)?, self.weighted_total(Parity::Even, dims, chi)?))
    }
}

/// One odd centre `0` and `n` even leaves `1..=n`, arrow `i` running leaf `i`
/// into the centre.
pub fn star_quiver(n: usize) -> Result<Quiver> {
    if n == 0 {
        return Err(Error::invalid("star quiver needs at least one leaf"));
    }
    let mut vertices = alloc::vec![Vertex { id: VertexId(0), parity: Parity::Odd }];
    let mut arrows = Vec::with_capacity(n);
    for i in 1..=n as u32 {
        vertices.push(Vertex { id: VertexId(i), parity: Parity::Even });
        arrows.push(Arrow { id: ArrowId(i), tail: VertexId(i), head: VertexId(0) });
    }
    Quiver::new(vertices, arrows)
}

/// Whether `q` has the shape produced by [`star_quiver`], returning `n`.
pub fn star_leaf_count(q: &Quiver) -> Option<usize> {
    let n = q.arrows().len();
    if n == 0 || q.vertices().len() != n + 1 {
        return None;
    }
    let center = VertexId(0);
    if q.parity(center) != Some(Parity::Odd) {
        return None;
    }
    for i in 1..=n as u32 {
        let a = q.arrow(ArrowId(i))?;
        if a.tail != VertexId(i) || a.head != center || q.parity(VertexId(i)) != Some(Parity::Even) {
            return None;
        }
    }
    Some(n)
}

/// Quiver with every arrow `α: j → i` paired with a reverse arrow `α*: i → j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledQuiver {
    pub quiver: Quiver,
    /// `(original, partner)` pairs.
    pub pairs: Vec<(ArrowId, ArrowId)>,
}

impl DoubledQuiver {
    /// The involution `α ↦ α*`, `α* ↦ α`.
    pub fn involution(&self, arrow: ArrowId) -> Option<ArrowId> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == arrow {
                Some(b)
            } else if b == arrow {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Drops the added partners, recovering the original quiver.
    pub fn restrict_to_original(&self) -> Quiver {
        let keep: BTreeSet<ArrowId> = self.pairs.iter().map(|p| p.0).collect();
        Quiver {
            vertices: self.quiver.vertices.clone(),
            arrows: self.quiver.arrows.iter().filter(|a| keep.contains(&a.id)).copied().collect(),
        }
    }
}

pub fn double_quiver(q: &Quiver) -> DoubledQuiver {
    let next = q.arrows.iter().map(|a| a.id.0 + 1).max().unwrap_or(0);
    let mut arrows = q.arrows.clone();
    let mut pairs = Vec::with_capacity(q.arrows.len());
    for (k, a) in q.arrows.iter().enumerate() {
        let partner = ArrowId(next + k as u32);
        arrows.push(Arrow { id: partner, tail: a.head, head: a.tail });
        pairs.push((a.id, partner));
    }
    DoubledQuiver { quiver: Quiver { vertices: q.vertices.clone(), arrows }, pairs }
}

/// True iff `|Σ_odd dχ − Σ_even dχ| ≤ residual_abs_tol · (1 + Σ_odd dχ)`.
pub fn balance_check(
    q: &Quiver,
    dims: &DimensionVector,
    chi: &Character,
    tol: &crate::linalg::TolerancePolicy,
) -> Result<bool> {
    let (odd, even) = q.balance_totals(dims, chi)?;
    Ok((odd - even).abs() <= tol.residual_abs_tol * (1.0 + odd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TolerancePolicy;
    use proptest::prelude::*;

    fn dims(pairs: &[(u32, usize)]) -> DimensionVector {
        pairs.iter().map(|&(v, d)| (VertexId(v), d)).collect()
    }

    fn chi(pairs: &[(u32, f64)]) -> Character {
        pairs.iter().map(|&(v, x)| (VertexId(v), x)).collect()
    }

    #[test]
    fn a2_is_separated_single() {
        let s = Quiver::a2().structure();
        assert!(s.is_separated && s.is_single && !s.is_single_loop);
    }

    #[test]
    fn loop_is_not_separated() {
        let s = Quiver::loop_quiver().structure();
        assert!(!s.is_separated);
        assert!(s.is_single_loop);
    }

    #[test]
    fn parallel_arrows_are_not_single() {
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
        let s = q.structure();
        assert!(s.is_separated && !s.is_single);
        assert!(q.arrow_between(VertexId(0), VertexId(1)).is_none());
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let err = Quiver::new(
            alloc::vec![Vertex { id: VertexId(0), parity: Parity::Even }],
            alloc::vec![Arrow { id: ArrowId(0), tail: VertexId(0), head: VertexId(7) }],
        )
        .unwrap_err();
        assert_eq!(err.code(), "invalid-input");
    }

    #[test]
    fn star_quivers() {
        assert_eq!(star_quiver(0).unwrap_err().code(), "invalid-input");
        let s1 = star_quiver(1).unwrap();
        assert_eq!(s1.vertices().len(), 2);
        assert_eq!(s1.arrows().len(), 1);
        let s3 = star_quiver(3).unwrap();
        assert_eq!(s3.vertices().len(), 4);
        assert!(s3.arrows().iter().all(|a| a.head == VertexId(0)));
        assert_eq!(star_leaf_count(&s3), Some(3));
        assert_eq!(star_leaf_count(&Quiver::loop_quiver()), None);
    }

    #[test]
    fn doubling() {
        let d = double_quiver(&Quiver::a2());
        assert_eq!(d.quiver.arrows().len(), 2);
        let (a, b) = d.pairs[0];
        let fwd = d.quiver.arrow(a).unwrap();
        let back = d.quiver.arrow(b).unwrap();
        assert_eq!((fwd.tail, fwd.head), (back.head, back.tail));

        assert_eq!(double_quiver(&star_quiver(3).unwrap()).quiver.arrows().len(), 6);

        let l = double_quiver(&Quiver::loop_quiver());
        assert_eq!(l.quiver.arrows().len(), 2);
        assert!(l.quiver.arrows().iter().all(|a| a.tail == VertexId(0) && a.head == VertexId(0)));
    }

    #[test]
    fn balance_examples() {
        let tol = TolerancePolicy::default();
        let s3 = star_quiver(3).unwrap();
        let d = dims(&[(0, 2), (1, 1), (2, 1), (3, 1)]);
        let x = chi(&[(0, 1.0), (1, 2.0 / 3.0), (2, 2.0 / 3.0), (3, 2.0 / 3.0)]);
        assert!(balance_check(&s3, &d, &x, &tol).unwrap());

        assert!(balance_check(&Quiver::a2(), &dims(&[(0, 1), (1, 1)]), &chi(&[(0, 1.0), (1, 1.0)]), &tol).unwrap());

        let d = dims(&[(0, 1), (1, 1), (2, 1), (3, 1)]);
        let x = chi(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        assert!(!balance_check(&s3, &d, &x, &tol).unwrap());

        assert_eq!(
            balance_check(&Quiver::loop_quiver(), &dims(&[(0, 1)]), &chi(&[(0, 1.0)]), &tol).unwrap_err().code(),
            "invalid-input"
        );
    }

    proptest! {
        #[test]
        fn doubling_is_an_involution(n in 1usize..7) {
            let q = star_quiver(n).unwrap();
            let d = double_quiver(&q);
            prop_assert_eq!(d.restrict_to_original(), q);
            for a in d.quiver.arrows() {
                let partner = d.involution(a.id).unwrap();
                prop_assert_eq!(d.involution(partner), Some(a.id));
            }
        }

        #[test]
        fn star_quiver_is_separated_single(n in 1usize..40) {
            let s = star_quiver(n).unwrap().structure();
            prop_assert!(s.is_separated && s.is_single);
        }

        #[test]
        fn balance_symmetric_and_scale_invariant(
            leaves in proptest::collection::vec((1usize..5, 0.1f64..3.0), 1..6),
            center in 1usize..6,
            scale in 0.01f64..100.0,
            skew in prop_oneof![Just(1.0f64), Just(1.5f64), Just(0.5f64)],
        ) {
            let tol = TolerancePolicy::default();
            let n = leaves.len();
            let star = star_quiver(n).unwrap();
            // same underlying graph with the parities exchanged and arrows reversed
            let mut vertices = alloc::vec![Vertex { id: VertexId(0), parity: Parity::Even }];
            let mut arrows = Vec::new();
            for i in 1..=n as u32 {
                vertices.push(Vertex { id: VertexId(i), parity: Parity::Odd });
                arrows.push(Arrow { id: ArrowId(i), tail: VertexId(0), head: VertexId(i) });
            }
            let mirrored = Quiver::new(vertices, arrows).unwrap();

            let mut d = dims(&[(0, center)]);
            let mut x = chi(&[]);
            let mut total = 0.0;
            for (k, &(dim, w)) in leaves.iter().enumerate() {
                d.insert(VertexId(k as u32 + 1), dim);
                x.insert(VertexId(k as u32 + 1), w);
                total += dim as f64 * w;
            }
            x.insert(VertexId(0), skew * total / center as f64);
            let expected = skew == 1.0;
            prop_assert_eq!(balance_check(&star, &d, &x, &tol).unwrap(), expected);
            prop_assert_eq!(balance_check(&mirrored, &d, &x, &tol).unwrap(), expected);
            let scaled: Character = x.iter().map(|(&k, &v)| (k, v * scale)).collect();
            prop_assert_eq!(balance_check(&star, &d, &scaled, &tol).unwrap(), expected);
        }
    }
}
