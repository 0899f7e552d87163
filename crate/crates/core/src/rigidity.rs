//! Rescaling rigidity: if `diag(a) Z = W diag(b)` with positive scalings and
//! `Z`, `W` share row and column lengths, then `Z = W`.
//!
//! [`lemma1_certify`] replays the inductive argument entry by entry and
//! records every matched pair of scalars; [`theorem1_trace`] runs the
//! polar/diagonalization pipeline that reduces an endomorphism of an
//! orthoscalar representation to such an instance.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, PreconditionFailure, Result};
use crate::linalg::{c, hermitian_eig, polar_left, polar_right, svd, ComplexMatrix, TolerancePolicy, C64};
use crate::morphism::{end_space, intertwining_residual, Category, Morphism};
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::random::{complex_gaussian, rng_from_seed};
use crate::representation::Representation;

#[derive(Debug, Clone, PartialEq)]
pub struct RescalingInstance {
    pub z: ComplexMatrix,
    pub w: ComplexMatrix,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl RescalingInstance {
    /// Shape and positivity checks only; see [`check_instance`] for the rest.
    pub fn new(z: ComplexMatrix, w: ComplexMatrix, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if z.shape() != w.shape() {
            return Err(Error::invalid("Z and W must have the same shape"));
        }
        if a.len() != z.rows() || b.len() != z.cols() {
            return Err(Error::invalid("scalings must match the row and column counts"));
        }
        if a.iter().chain(&b).any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::invalid("scalings must be positive and finite"));
        }
        if !z.is_finite() || !w.is_finite() {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(Self { z, w, a, b })
    }

    pub fn rows(&self) -> usize {
        self.z.rows()
    }

    pub fn cols(&self) -> usize {
        self.z.cols()
    }

    /// Entries at or below this magnitude count as zero.
    pub fn entry_cutoff(&self, tol: &TolerancePolicy) -> f64 {
        tol.rank_rel_tol * self.z.max_abs().max(self.w.max_abs())
    }

    fn active(&self, i: usize, j: usize, cutoff: f64) -> bool {
        self.z[(i, j)].norm() > cutoff || self.w[(i, j)].norm() > cutoff
    }

    /// Number of positions where `Z` or `W` is nonzero.
    pub fn nonzero_count(&self, tol: &TolerancePolicy) -> usize {
        let cut = self.entry_cutoff(tol);
        (0..self.rows()).flat_map(|i| (0..self.cols()).map(move |j| (i, j))).filter(|&(i, j)| self.active(i, j, cut)).count()
    }

    /// `‖diag(a) Z − W diag(b)‖_F`.
    pub fn relation_residual(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let d = (self.z[(i, j)] * self.a[i] - self.w[(i, j)] * self.b[j]).norm();
                acc += d * d;
            }
        }
        libm::sqrt(acc)
    }
}

fn row_norm(m: &ComplexMatrix, i: usize) -> f64 {
    libm::sqrt((0..m.cols()).map(|j| m[(i, j)].norm_sqr()).sum())
}

fn col_norm(m: &ComplexMatrix, j: usize) -> f64 {
    libm::sqrt((0..m.rows()).map(|i| m[(i, j)].norm_sqr()).sum())
}

/// Verifies the hypotheses of the rescaling lemma.
pub fn check_instance(inst: &RescalingInstance, tol: &TolerancePolicy) -> Result<()> {
    let cut = inst.entry_cutoff(tol);
    for (name, m) in [('Z', &inst.z), ('W', &inst.w)] {
        for i in 0..m.rows() {
            if (0..m.cols()).all(|j| m[(i, j)].norm() <= cut) {
                return Err(Error::Precondition(PreconditionFailure::ZeroLine { matrix: name, row: true, index: i }));
            }
        }
        for j in 0..m.cols() {
            if (0..m.rows()).all(|i| m[(i, j)].norm() <= cut) {
                return Err(Error::Precondition(PreconditionFailure::ZeroLine { matrix: name, row: false, index: j }));
            }
        }
    }
    let rows: Vec<(f64, f64)> = (0..inst.rows()).map(|i| (row_norm(&inst.z, i), row_norm(&inst.w, i))).collect();
    let cols: Vec<(f64, f64)> = (0..inst.cols()).map(|j| (col_norm(&inst.z, j), col_norm(&inst.w, j))).collect();
    let longest = rows.iter().chain(&cols).map(|&(x, y)| x.max(y)).fold(0.0, f64::max);
    let slack = tol.rank_rel_tol * (1.0 + longest);
    for (is_row, lines) in [(true, &rows), (false, &cols)] {
        for (index, &(x, y)) in lines.iter().enumerate() {
            let deviation = (x - y).abs();
            if deviation > slack {
                return Err(Error::Precondition(PreconditionFailure::Lengths { row: is_row, index, deviation }));
            }
        }
    }
    let scale = inst.a.iter().cloned().fold(0.0, f64::max) * inst.z.frobenius_norm();
    let residual = inst.relation_residual();
    if residual > tol.rank_rel_tol * (1.0 + scale) {
        return Err(Error::Precondition(PreconditionFailure::Relation { residual }));
    }
    Ok(())
}

/// Which case of the induction justified a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    SingleRow,
    SingleColumn,
    OnePerLine,
    Extremal,
}

impl StepRule {
    pub fn name(&self) -> &'static str {
        match self {
            StepRule::SingleRow => "single-row",
            StepRule::SingleColumn => "single-column",
            StepRule::OnePerLine => "one-per-line",
            StepRule::Extremal => "extremal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateStep {
    pub row: usize,
    pub col: usize,
    pub row_scalar: f64,
    pub col_scalar: f64,
    pub z: C64,
    pub w: C64,
    pub rule: StepRule,
    /// `(m, n, K)` of the active instance before this step.
    pub triple: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityCertificate {
    pub steps: Vec<CertificateStep>,
    pub z_equals_w: bool,
    pub max_deviation: f64,
    pub scalar_tolerance: f64,
}

impl RigidityCertificate {
    /// Zeroes every recorded position of `inst` and reports whether nothing
    /// nonzero is left.
    pub fn replay(&self, inst: &RescalingInstance, tol: &TolerancePolicy) -> bool {
        let cut = inst.entry_cutoff(tol);
        let mut z = inst.z.clone();
        let mut w = inst.w.clone();
        for s in &self.steps {
            z[(s.row, s.col)] = C64::new(0.0, 0.0);
            w[(s.row, s.col)] = C64::new(0.0, 0.0);
        }
        z.max_abs() <= cut && w.max_abs() <= cut
    }
}

/// Replays the induction on a validated instance.
pub fn lemma1_certify(inst: &RescalingInstance, tol: &TolerancePolicy) -> Result<RigidityCertificate> {
    check_instance(inst, tol)?;
    let cut = inst.entry_cutoff(tol);
    let scalar_tol = tol.scalar_tol();
    let (m, n) = inst.z.shape();
    let mut live = alloc::vec![alloc::vec![false; n]; m];
    for (i, row) in live.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = inst.active(i, j, cut);
        }
    }
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.sort_by(|&x, &y| inst.a[x].total_cmp(&inst.a[y]).then(x.cmp(&y)));
    cols.sort_by(|&x, &y| inst.b[x].total_cmp(&inst.b[y]).then(x.cmp(&y)));

    let mut steps = Vec::new();
    loop {
        rows.retain(|&i| live[i].iter().any(|&x| x));
        cols.retain(|&j| live.iter().any(|r| r[j]));
        if rows.is_empty() {
            break;
        }
        let k: usize = rows.iter().map(|&i| cols.iter().filter(|&&j| live[i][j]).count()).sum();
        let (am, an) = (rows.len(), cols.len());
        let rule = if am == 1 {
            StepRule::SingleRow
        } else if an == 1 {
            StepRule::SingleColumn
        } else if k == am.max(an) {
            StepRule::OnePerLine
        } else {
            StepRule::Extremal
        };
        // With m ≤ n the smallest a meets its first nonzero column in b-order;
        // otherwise argue on the transpose.
        let (i, j) = if am <= an {
            let i = rows[0];
            (i, *cols.iter().find(|&&j| live[i][j]).expect("live row"))
        } else {
            let j = cols[0];
            (*rows.iter().find(|&&i| live[i][j]).expect("live column"), j)
        };
        let (ai, bj) = (inst.a[i], inst.b[j]);
        if (ai - bj).abs() > scalar_tol * ai.max(bj) {
            return Err(Error::RigidityViolation { row: i, col: j, row_scalar: ai, col_scalar: bj });
        }
        steps.push(CertificateStep {
            row: i,
            col: j,
            row_scalar: ai,
            col_scalar: bj,
            z: inst.z[(i, j)],
            w: inst.w[(i, j)],
            rule,
            triple: (am, an, k),
        });
        live[i][j] = false;
    }

    let mut max_deviation: f64 = 0.0;
    let mut worst = (0, 0);
    for i in 0..m {
        for j in 0..n {
            let d = (inst.z[(i, j)] - inst.w[(i, j)]).norm();
            if d > max_deviation {
                max_deviation = d;
                worst = (i, j);
            }
        }
    }
    let z_equals_w = max_deviation <= scalar_tol * (1.0 + inst.z.max_abs());
    if !z_equals_w {
        let (i, j) = worst;
        return Err(Error::RigidityViolation { row: i, col: j, row_scalar: inst.a[i], col_scalar: inst.b[j] });
    }
    Ok(RigidityCertificate { steps, z_equals_w, max_deviation, scalar_tolerance: scalar_tol })
}

/// A valid instance: random support without zero lines, `Z = W`, and scalings
/// constant on each connected component of the bipartite support graph.
pub fn random_valid_instance(m: usize, n: usize, density: f64, seed: u64) -> Result<RescalingInstance> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("instance needs at least one row and one column"));
    }
    let mut rng = rng_from_seed(seed);
    let mut support = alloc::vec![alloc::vec![false; n]; m];
    for row in support.iter_mut() {
        for x in row.iter_mut() {
            *x = rng.random::<f64>() < density;
        }
    }
    for (i, row) in support.iter_mut().enumerate() {
        if !row.iter().any(|&x| x) {
            row[if i < n { i } else { rng.random_range(0..n) }] = true;
        }
    }
    for j in 0..n {
        if !support.iter().any(|r| r[j]) {
            let i = if j < m { j } else { rng.random_range(0..m) };
            support[i][j] = true;
        }
    }

    // Union-find over rows 0..m and columns m..m+n.
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (i, row) in support.iter().enumerate() {
        for (j, &on) in row.iter().enumerate() {
            if on {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
                parent[ri] = rj;
            }
        }
    }
    let mut scale = BTreeMap::new();
    let mut value = |root: usize, rng: &mut crate::random::SeededRng| *scale.entry(root).or_insert_with(|| 0.5 + 2.5 * rng.random::<f64>());
    let a: Vec<f64> = (0..m).map(|i| { let r = find(&mut parent, i); value(r, &mut rng) }).collect();
    let b: Vec<f64> = (0..n).map(|j| { let r = find(&mut parent, m + j); value(r, &mut rng) }).collect();
    let z = ComplexMatrix::from_fn(m, n, |i, j| if support[i][j] { complex_gaussian(&mut rng) } else { c(0.0, 0.0) });
    RescalingInstance::new(z.clone(), z, a, b)
}

/// One stage of the trace with its relative residual.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    /// Scalar added to every component to make the endomorphism invertible.
    pub shift: f64,
    pub stages: Vec<StageRecord>,
    pub lemma: RigidityCertificate,
    /// Common scalar of the unitary factors, if they are scalar.
    pub unitary_scalar: Option<C64>,
    /// Common scalar of the positive factors, if they are scalar.
    pub positive_scalar: Option<C64>,
    /// The original endomorphism equals this scalar times the identity.
    pub verdict: Option<C64>,
}

impl TraceReport {
    pub fn max_residual(&self) -> f64 {
        self.stages.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn is_scalar(&self) -> bool {
        self.verdict.is_some()
    }
}

fn total_scale(t: &Representation) -> f64 {
    1.0 + t.blocks().values().map(|b| b.frobenius_norm()).sum::<f64>()
}

fn block_diagonal(vs: &[VertexId], m: &Morphism) -> ComplexMatrix {
    let parts: Vec<&ComplexMatrix> = vs.iter().map(|v| m.get(*v).expect("vertex")).collect();
    ComplexMatrix::block_diag(&parts)
}

fn check_stage(stages: &mut Vec<StageRecord>, stage: &'static str, residual: f64, limit: f64) -> Result<()> {
    stages.push(StageRecord { stage, residual });
    if residual > limit || !residual.is_finite() {
        return Err(Error::StageFailure { stage, residual });
    }
    Ok(())
}

/// Replays the scalar-endomorphism argument for `c: T → T` in the plain
/// category, where `T` is orthoscalar on a separated single quiver.
pub fn theorem1_trace(t: &Representation, endo: &Morphism, tol: &TolerancePolicy) -> Result<TraceReport> {
    let q = t.quiver();
    q.require_separated_single()?;
    let report = t.orthoscalar_check(tol)?;
    if !report.is_orthoscalar {
        return Err(Error::invalid("representation is not orthoscalar"));
    }
    let limit = tol.rank_rel_tol;
    let scale = total_scale(t);
    let mut stages = Vec::new();

    let rel = |m: &Morphism| -> Result<f64> { Ok(intertwining_residual(m, t, t, Category::Plain)? / (scale * (1.0 + m.norm()))) };
    check_stage(&mut stages, "endomorphism", rel(endo)?, limit)?;

    // Shift to invertibility.
    let mut invertible = true;
    for (_, m) in endo.iter() {
        if m.rows() == 0 {
            continue;
        }
        let s = svd(m)?;
        let smin = *s.singular_values.last().unwrap();
        if s.sigma_max() == 0.0 || smin <= tol.scalar_tol() * s.sigma_max() {
            invertible = false;
        }
    }
    let shift = if invertible { 0.0 } else { 1.0 + endo.iter().map(|(_, m)| m.frobenius_norm()).fold(0.0, f64::max) };
    let shifted = endo.add(&Morphism::scalar(t, c(shift, 0.0)));
    check_stage(&mut stages, "shift", rel(&shifted)?, limit)?;

    let odd = q.odd_vertices();
    let even = q.even_vertices();
    let mut unitary = Morphism::default();
    let mut positive = Morphism::default();
    let mut rotate = Morphism::default();
    let mut diag = Morphism::default();
    let mut polar_res: f64 = 0.0;
    let mut eig_res: f64 = 0.0;
    for v in q.vertices() {
        let m = shifted.get(v.id).expect("vertex");
        if m.rows() == 0 {
            for target in [&mut unitary, &mut positive, &mut rotate, &mut diag] {
                target.insert(v.id, m.clone());
            }
            continue;
        }
        let is_odd = odd.contains(&v.id);
        // A = XU at odd vertices, B = VY at even ones.
        let (p, u) = if is_odd {
            let pl = polar_left(m, tol)?;
            polar_res = polar_res.max((&pl.positive * &pl.unitary).distance(m) / m.frobenius_norm());
            (pl.positive, pl.unitary)
        } else {
            let pr = polar_right(m, tol)?;
            polar_res = polar_res.max((&pr.unitary * &pr.positive).distance(m) / m.frobenius_norm());
            (pr.positive, pr.unitary)
        };
        let e = hermitian_eig(&p.hermitian_part(), tol)?;
        eig_res = eig_res.max(e.reconstruct().distance(&p) / p.frobenius_norm());
        // X = U1* X̃ U1 and Y = V1 Ỹ V1*.
        let r = if is_odd { e.unitary() } else { e.basis.clone() };
        diag.insert(v.id, ComplexMatrix::diagonal_real(&e.values));
        rotate.insert(v.id, r);
        unitary.insert(v.id, u);
        positive.insert(v.id, p);
    }
    check_stage(&mut stages, "polar", polar_res, limit)?;
    check_stage(&mut stages, "diagonalize", eig_res, limit)?;

    let total = t.assemble_total()?;
    let u = block_diagonal(&odd, &unitary);
    let v = block_diagonal(&even, &unitary);
    let u1 = block_diagonal(&odd, &rotate);
    let v1 = block_diagonal(&even, &rotate);
    let z = &(&(&u1 * &u) * &total) * &v1;
    let w = &(&(&u1 * &total) * &v) * &v1;
    let diag_values = |vs: &[VertexId]| -> Vec<f64> {
        vs.iter().flat_map(|x| { let d = diag.get(*x).unwrap(); (0..d.rows()).map(move |k| d[(k, k)].re) }).collect()
    };
    let inst = RescalingInstance::new(z, w, diag_values(&odd), diag_values(&even))?;
    let amax = inst.a.iter().chain(&inst.b).cloned().fold(0.0, f64::max);
    check_stage(&mut stages, "reduction", inst.relation_residual() / (scale * (1.0 + amax)), limit)?;
    let lemma = match lemma1_certify(&inst, tol) {
        Ok(cert) => cert,
        Err(Error::Precondition(p)) => {
            let residual = match p {
                PreconditionFailure::Lengths { deviation, .. } => deviation,
                PreconditionFailure::Relation { residual } => residual,
                PreconditionFailure::ZeroLine { .. } => f64::INFINITY,
            };
            return Err(Error::StageFailure { stage: "lemma-instance", residual });
        }
        Err(e) => return Err(e),
    };
    check_stage(&mut stages, "lemma", lemma.max_deviation / (1.0 + inst.z.max_abs()), tol.scalar_tol())?;
    check_stage(&mut stages, "unitary-intertwines", rel(&unitary)?, limit)?;

    let unitary_scalar = unitary.scalar_value(tol.scalar_tol());
    let mut positive_scalar = None;
    let mut verdict = None;
    if let Some(us) = unitary_scalar {
        check_stage(&mut stages, "positive-intertwines", rel(&positive)?, limit)?;
        positive_scalar = positive.scalar_value(tol.scalar_tol());
        if let Some(ps) = positive_scalar {
            verdict = Some(ps * us - shift);
            let back = Morphism::scalar(t, ps * us - shift);
            let d = endo.add(&back.scale(c(-1.0, 0.0))).norm() / (1.0 + endo.norm());
            check_stage(&mut stages, "verdict", d, tol.scalar_tol())?;
        }
    }
    Ok(TraceReport { shift, stages, lemma, unitary_scalar, positive_scalar, verdict })
}

/// Draws `C` from the plain endomorphism space and traces it.
pub fn theorem1_trace_sampled(t: &Representation, seed: u64, tol: &TolerancePolicy) -> Result<TraceReport> {
    let end = end_space(t, Category::Plain, tol)?;
    let mut rng = rng_from_seed(seed);
    let endo = end.sample(&mut rng).ok_or_else(|| Error::invalid("endomorphism space is empty"))?;
    theorem1_trace(t, &endo, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Remark6Report {
    pub representation: Representation,
    pub gram: ComplexMatrix,
    pub gram_is_3i: bool,
    pub endomorphism: ComplexMatrix,
    pub at: ComplexMatrix,
    pub ta: ComplexMatrix,
    pub commutes: bool,
    pub plain_end_dim: usize,
    pub star_end_dim: usize,
    pub endomorphism_invertible: bool,
    pub endomorphism_scalar: bool,
}

impl Remark6Report {
    /// The loop carries a non-scalar invertible plain endomorphism while
    /// being `*`-indecomposable.
    pub fn holds(&self) -> bool {
        self.gram_is_3i
            && self.commutes
            && self.plain_end_dim == 2
            && self.star_end_dim == 1
            && self.endomorphism_invertible
            && !self.endomorphism_scalar
    }
}

/// The loop `T = [[1, 1], [0, −1]]`, orthoscalar with `TT* + T*T = 3I`, and
/// the plain endomorphism `A = [[3, 1], [0, 1]]`.
pub fn remark6_demo(tol: &TolerancePolicy) -> Result<Remark6Report> {
    let tm = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, -1.0]]);
    let a = ComplexMatrix::from_real_rows(&[&[3.0, 1.0], &[0.0, 1.0]]);
    let mut blocks = BTreeMap::new();
    blocks.insert(ArrowId(0), tm.clone());
    let dims = [(VertexId(0), 2)].into_iter().collect();
    let t = Representation::new(Quiver::loop_quiver(), dims, blocks)?;
    let gram = t.vertex_gram(VertexId(0));
    let at = &a * &tm;
    let ta = &tm * &a;
    let plain = end_space(&t, Category::Plain, tol)?;
    let star = end_space(&t, Category::Star, tol)?;
    let s = svd(&a)?;
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    Ok(Remark6Report {
        gram_is_3i: gram == ComplexMatrix::scalar(2, c(3.0, 0.0)),
        commutes: at == ta,
        plain_end_dim: plain.dimension(),
        star_end_dim: star.dimension(),
        endomorphism_invertible: det.norm() > 0.0 && *s.singular_values.last().unwrap() > tol.rank_rel_tol * s.sigma_max(),
        endomorphism_scalar: a.distance_to_scalar(a.trace() / 2.0) == 0.0,
        representation: t,
        gram,
        endomorphism: a,
        at,
        ta,
    })
}
