//! Orthoscalar representations with prescribed dimensions and character,
//! found by alternating polar normalization: every row strip is replaced by
//! `√χ_i` times its nearest co-isometry, then every column strip by `√χ_j`
//! times its nearest isometry, until both families of Gram identities hold.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c, nearest_isometry, ComplexMatrix, TolerancePolicy};
use crate::quiver::{balance_check, star_quiver, ArrowId, Character, DimensionVector, Parity, Quiver, VertexId};
use crate::representation::Representation;
use crate::subspace::{functor_f, ProjectionSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub max_iterations: usize,
    pub residual_target: f64,
    pub seed: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, residual_target: 1e-9, seed: 0 }
    }
}

impl SynthesisOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.residual_target > 0.0 && self.residual_target.is_finite()) {
            return Err(Error::invalid("synthesis bounds must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisOutcome<T = Representation> {
    Converged { output: T, residual: f64, iterations: usize },
    NonConvergence { best_residual: f64, iterations: usize },
}

impl<T> SynthesisOutcome<T> {
    pub fn converged(self) -> Option<T> {
        match self {
            SynthesisOutcome::Converged { output, .. } => Some(output),
            SynthesisOutcome::NonConvergence { .. } => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, SynthesisOutcome::Converged { .. })
    }

    /// Final residual on success, best residual otherwise.
    pub fn residual(&self) -> f64 {
        match self {
            SynthesisOutcome::Converged { residual, .. } => *residual,
            SynthesisOutcome::NonConvergence { best_residual, .. } => *best_residual,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            SynthesisOutcome::Converged { iterations, .. } | SynthesisOutcome::NonConvergence { iterations, .. } => {
                *iterations
            }
        }
    }
}

/// `max_v ‖G_v − χ_v I‖_F / χ_v` over vertices of positive dimension.
pub fn character_residual(t: &Representation, chi: &Character) -> f64 {
    t.quiver()
        .vertices()
        .iter()
        .filter(|v| t.dim(v.id) > 0)
        .map(|v| {
            let x = chi[&v.id];
            t.vertex_gram(v.id).distance_to_scalar(c(x, 0.0)) / x
        })
        .fold(0.0, f64::max)
}

struct Strip {
    vertex: VertexId,
    scale: f64,
    arrows: Vec<ArrowId>,
}

fn strips(q: &Quiver, dims: &DimensionVector, chi: &Character, parity: Parity) -> Vec<Strip> {
    q.vertices()
        .iter()
        .filter(|v| v.parity == parity && dims[&v.id] > 0)
        .map(|v| Strip {
            vertex: v.id,
            scale: libm::sqrt(chi[&v.id]),
            arrows: q
                .arrows()
                .iter()
                .filter(|a| if parity == Parity::Odd { a.head == v.id } else { a.tail == v.id })
                .map(|a| a.id)
                .collect(),
        })
        .collect()
}

fn check_inputs(q: &Quiver, dims: &DimensionVector, chi: &Character, tol: &TolerancePolicy) -> Result<()> {
    q.require_separated_single()?;
    for v in q.vertices() {
        let d = *dims.get(&v.id).ok_or_else(|| Error::invalid(format!("no dimension for vertex {}", v.id.0)))?;
        if d == 0 {
            continue;
        }
        let x = *chi.get(&v.id).ok_or_else(|| Error::invalid(format!("no character value for vertex {}", v.id.0)))?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("character at vertex {} must be positive", v.id.0)));
        }
    }
    if !balance_check(q, dims, chi, tol)? {
        let (odd_total, even_total) = q.balance_totals(dims, chi)?;
        return Err(Error::InfeasibleBalance { odd_total, even_total });
    }
    for v in q.vertices() {
        let d = dims[&v.id];
        if d == 0 {
            continue;
        }
        let neighbours: usize = q
            .arrows()
            .iter()
            .filter_map(|a| if a.head == v.id { Some(a.tail) } else if a.tail == v.id { Some(a.head) } else { None })
            .map(|u| dims[&u])
            .sum();
        if d > neighbours {
            return Err(Error::InfeasibleDims { vertex: v.id });
        }
    }
    Ok(())
}

/// Searches for an orthoscalar representation with dimensions `dims` and
/// character `chi` on a separated single quiver.
pub fn synthesize(
    q: &Quiver,
    dims: &DimensionVector,
    chi: &Character,
    opts: &SynthesisOptions,
    tol: &TolerancePolicy,
) -> Result<SynthesisOutcome> {
    opts.validate()?;
    check_inputs(q, dims, chi, tol)?;
    let rows = strips(q, dims, chi, Parity::Odd);
    let cols = strips(q, dims, chi, Parity::Even);
    let mut t = Representation::random(q, dims, opts.seed)?;
    let mut blocks: BTreeMap<ArrowId, ComplexMatrix> = t.blocks().clone();
    let mut best = f64::INFINITY;

    for iteration in 1..=opts.max_iterations {
        for s in &rows {
            let parts: Vec<&ComplexMatrix> = s.arrows.iter().map(|a| &blocks[a]).collect();
            let strip = ComplexMatrix::hstack(dims[&s.vertex], &parts);
            let fixed = nearest_isometry(&strip)?.scale_real(s.scale);
            let mut c0 = 0;
            for a in &s.arrows {
                let w = blocks[a].cols();
                blocks.insert(*a, fixed.block(0, c0, fixed.rows(), w));
                c0 += w;
            }
        }
        for s in &cols {
            let parts: Vec<&ComplexMatrix> = s.arrows.iter().map(|a| &blocks[a]).collect();
            let strip = ComplexMatrix::vstack(dims[&s.vertex], &parts);
            let fixed = nearest_isometry(&strip)?.scale_real(s.scale);
            let mut r0 = 0;
            for a in &s.arrows {
                let h = blocks[a].rows();
                blocks.insert(*a, fixed.block(r0, 0, h, fixed.cols()));
                r0 += h;
            }
        }
        t = Representation::new(q.clone(), dims.clone(), blocks.clone())?;
        let residual = character_residual(&t, chi);
        best = best.min(residual);
        if residual <= opts.residual_target {
            return Ok(SynthesisOutcome::Converged { output: t, residual, iterations: iteration });
        }
    }
    Ok(SynthesisOutcome::NonConvergence { best_residual: best, iterations: opts.max_iterations })
}

/// Uniform character: `χ_0 = 1` at the centre and `ambient / Σ leaf_dims` at
/// every leaf.
pub fn uniform_leaf_character(ambient_dim: usize, leaf_dims: &[usize]) -> Result<Vec<f64>> {
    let total: usize = leaf_dims.iter().sum();
    if total == 0 {
        return Err(Error::invalid("leaf dimensions sum to zero"));
    }
    Ok(alloc::vec![ambient_dim as f64 / total as f64; leaf_dims.len()])
}

/// A system of `leaf_dims.len()` subspaces of `C^ambient_dim` with weights
/// `Σ α_i P_i = I`, obtained by synthesizing a star representation and
/// applying `F`. With `leaf_chi = None` the weights are uniform.
pub fn synthesize_projection_system(
    ambient_dim: usize,
    leaf_dims: &[usize],
    leaf_chi: Option<&[f64]>,
    opts: &SynthesisOptions,
    tol: &TolerancePolicy,
) -> Result<SynthesisOutcome<ProjectionSystem>> {
    let n = leaf_dims.len();
    let q = star_quiver(n)?;
    let leaf_chi = match leaf_chi {
        Some(x) if x.len() == n => x.to_vec(),
        Some(_) => return Err(Error::invalid("one character value per leaf is required")),
        None => uniform_leaf_character(ambient_dim, leaf_dims)?,
    };
    let mut dims = DimensionVector::new();
    let mut chi = Character::new();
    dims.insert(VertexId(0), ambient_dim);
    chi.insert(VertexId(0), 1.0);
    for (k, (&d, &x)) in leaf_dims.iter().zip(&leaf_chi).enumerate() {
        dims.insert(VertexId(k as u32 + 1), d);
        chi.insert(VertexId(k as u32 + 1), x);
    }
    Ok(match synthesize(&q, &dims, &chi, opts, tol)? {
        SynthesisOutcome::Converged { output, residual, iterations } => {
            let image = functor_f(&output, tol)?;
            let system = ProjectionSystem::new(ambient_dim, image.system.projections, Some(leaf_chi))?;
            SynthesisOutcome::Converged { output: system, residual, iterations }
        }
        SynthesisOutcome::NonConvergence { best_residual, iterations } => {
            SynthesisOutcome::NonConvergence { best_residual, iterations }
        }
    })
}
