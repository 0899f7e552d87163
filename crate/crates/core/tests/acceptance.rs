use std::time::{Duration, Instant};

use orthoscalar_core::morphism::{are_equivalent_star, decompose, end_space, is_schur, Category, Equivalence};
use orthoscalar_core::rigidity::{check_instance, lemma1_certify, random_valid_instance, remark6_demo, RescalingInstance};
use orthoscalar_core::subspace::{
    functor_f, functor_g_scaled, hom_space_p, star_hom_dimension, theorem2_verify,
};
use orthoscalar_core::synthesis::{synthesize, synthesize_projection_system, SynthesisOptions, SynthesisOutcome};
use orthoscalar_core::{
    star_quiver, Character, ComplexMatrix, DimensionVector, Error, Representation,
    TolerancePolicy, VertexId, C64,
};

/// One feasible star datum: centre dimension, leaf dimensions, uniform leaf χ.
#[derive(Clone, Copy)]
struct StarData {
    center: usize,
    leaves: &'static [usize],
}

impl StarData {
    fn dims(&self) -> DimensionVector {
        let mut d = DimensionVector::new();
        d.insert(VertexId(0), self.center);
        for (i, &x) in self.leaves.iter().enumerate() {
            d.insert(VertexId(i as u32 + 1), x);
        }
        d
    }

    fn chi(&self) -> Character {
        let leaf = self.center as f64 / self.leaves.iter().sum::<usize>() as f64;
        let mut c = Character::new();
        c.insert(VertexId(0), 1.0);
        for i in 0..self.leaves.len() {
            c.insert(VertexId(i as u32 + 1), leaf);
        }
        c
    }
}

const STAR_DATA: &[StarData] = &[
    StarData { center: 2, leaves: &[1, 1, 1] },
    StarData { center: 2, leaves: &[1, 1, 1, 1] },
    StarData { center: 3, leaves: &[1, 1, 1, 1] },
    StarData { center: 2, leaves: &[1, 1, 1, 1, 1] },
    StarData { center: 3, leaves: &[1, 1, 1, 1, 1] },
    StarData { center: 4, leaves: &[1, 1, 1, 1, 1] },
    StarData { center: 3, leaves: &[2, 2, 2, 2] },
    StarData { center: 4, leaves: &[2, 2, 2] },
    StarData { center: 1, leaves: &[1, 1] },
    StarData { center: 2, leaves: &[1, 1] },
];

#[derive(Default)]
struct Run {
    tol: TolerancePolicy,
    produced: Vec<Representation>,
    skipped: usize,
    attempted: usize,
}

impl Run {
    fn synthesize(&mut self, data: StarData, seed: u64) -> Option<Representation> {
        let q = star_quiver(data.leaves.len()).unwrap();
        self.attempted += 1;
        match synthesize(&q, &data.dims(), &data.chi(), &SynthesisOptions::with_seed(seed), &self.tol).unwrap() {
            SynthesisOutcome::Converged { output, .. } => {
                self.produced.push(output.clone());
                Some(output)
            }
            SynthesisOutcome::NonConvergence { .. } => {
                self.skipped += 1;
                None
            }
        }
    }

    fn record(&mut self, t: &Representation) {
        self.produced.push(t.clone());
    }
}

struct Verdict {
    results: Vec<(usize, bool)>,
}

impl Verdict {
    fn report(&mut self, n: usize, ok: bool, elapsed: Duration, limit: Option<Duration>, detail: String) {
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let pass = ok && in_time;
        let time = match limit {
            Some(l) => format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!("{} criterion {n}: {detail}; {time}", if pass { "PASS" } else { "FAIL" });
        self.results.push((n, pass));
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn loop_endomorphism_in_span(r: &orthoscalar_core::rigidity::Remark6Report, tol: &TolerancePolicy) -> bool {
    let end = end_space(&r.representation, Category::Plain, tol).unwrap();
    let a = &r.endomorphism;
    let basis: Vec<&ComplexMatrix> = end.basis.iter().map(|m| m.get(VertexId(0)).unwrap()).collect();
    // Least squares over the two-element basis via its Gram matrix.
    let inner = |x: &ComplexMatrix, y: &ComplexMatrix| -> C64 {
        x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| p.conj() * q).sum()
    };
    let g = [
        [inner(basis[0], basis[0]), inner(basis[0], basis[1])],
        [inner(basis[1], basis[0]), inner(basis[1], basis[1])],
    ];
    let rhs = [inner(basis[0], a), inner(basis[1], a)];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let c0 = (rhs[0] * g[1][1] - g[0][1] * rhs[1]) / det;
    let c1 = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) / det;
    let fit = &basis[0].scale(c0) + &basis[1].scale(c1);
    fit.distance(a) <= 1e-10 * (1.0 + a.frobenius_norm())
}

fn criterion1(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let r = remark6_demo(&run.tol).unwrap();
    let gram_residual = r.gram.distance(&ComplexMatrix::scalar(2, C64::new(3.0, 0.0)));
    let in_span = loop_endomorphism_in_span(&r, &run.tol);
    let ok = gram_residual == 0.0 && r.plain_end_dim == 2 && r.star_end_dim == 1 && r.commutes && in_span;
    v.report(
        1,
        ok,
        start.elapsed(),
        secs(1),
        format!(
            "TT*+T*T-3I residual {gram_residual:e}, plain End dim {}, [[3,1],[0,1]] in span: {in_span}, star End dim {}",
            r.plain_end_dim, r.star_end_dim
        ),
    );
}

fn criterion2(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let (mut tested, mut star_schur, mut violations, mut seed) = (0usize, 0usize, 0usize, 0u64);
    let skipped_before = run.skipped;
    while tested < 60 {
        let data = STAR_DATA[seed as usize % STAR_DATA.len()];
        if let Some(t) = run.synthesize(data, seed) {
            tested += 1;
            let star = end_space(&t, Category::Star, &run.tol).unwrap().dimension();
            if star == 1 {
                star_schur += 1;
                let plain = end_space(&t, Category::Plain, &run.tol).unwrap().dimension();
                if plain != 1 {
                    violations += 1;
                }
            }
        }
        seed += 1;
    }
    let skipped = run.skipped - skipped_before;
    v.report(
        2,
        violations == 0,
        start.elapsed(),
        secs(60),
        format!(
            "{tested} representations, {star_schur} with star End dim 1, {violations} violations, {skipped} non-convergent draws skipped"
        ),
    );
}

fn corrupt(inst: &RescalingInstance, kind: usize) -> RescalingInstance {
    let mut z = inst.z.clone();
    let mut w = inst.w.clone();
    let mut a = inst.a.clone();
    let b = inst.b.clone();
    match kind {
        0 => {
            for j in 0..z.cols() {
                z[(0, j)] = C64::new(0.0, 0.0);
                w[(0, j)] = C64::new(0.0, 0.0);
            }
        }
        1 => {
            w = w.scale_real(2.0);
            a.iter_mut().for_each(|x| *x *= 2.0);
        }
        _ => a[0] *= 1.5,
    }
    RescalingInstance::new(z, w, a, b).unwrap()
}

fn criterion3(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let (mut certified, mut worst_dev, mut worst_scalar, mut count_ok) = (0usize, 0.0f64, 0.0f64, true);
    for k in 0..100u64 {
        let m = 1 + (k as usize % 8);
        let n = 1 + ((k as usize * 5 + 3) % 8);
        let density = 0.25 + 0.5 * ((k % 7) as f64 / 6.0);
        let inst = random_valid_instance(m, n, density, 1000 + k).unwrap();
        let Ok(cert) = lemma1_certify(&inst, &run.tol) else { continue };
        worst_dev = worst_dev.max(cert.max_deviation);
        for s in &cert.steps {
            worst_scalar = worst_scalar.max((s.row_scalar - s.col_scalar).abs() / s.row_scalar.max(s.col_scalar));
        }
        count_ok &= cert.steps.len() == inst.nonzero_count(&run.tol);
        if cert.z_equals_w && cert.replay(&inst, &run.tol) {
            certified += 1;
        }
    }
    let expected = ["precondition-zero-line", "precondition-lengths", "precondition-relation"];
    let mut rejected = 0usize;
    for k in 0..10u64 {
        let base = random_valid_instance(3 + k as usize % 4, 4 + k as usize % 3, 0.6, 5000 + k).unwrap();
        let kind = k as usize % 3;
        let bad = corrupt(&base, kind);
        let matched = match check_instance(&bad, &run.tol) {
            Err(e @ Error::Precondition(_)) => e.code() == expected[kind],
            _ => false,
        };
        rejected += matched as usize;
    }
    let ok = certified == 100 && worst_dev <= 1e-10 && worst_scalar <= 1e-7 && count_ok && rejected == 10;
    v.report(
        3,
        ok,
        start.elapsed(),
        secs(10),
        format!(
            "{certified}/100 certified, max|Z-W| {worst_dev:e}, max scalar deviation {worst_scalar:e}, step count = K: {count_ok}, {rejected}/10 invalid rejected with the right code"
        ),
    );
}

fn criterion4(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let (mut pairs, mut equal_dims, mut worst_witness, mut seed) = (0usize, 0usize, 0.0f64, 100u64);
    let mut equivalence_ok = true;
    while pairs < 20 {
        let data = STAR_DATA[seed as usize % STAR_DATA.len()];
        let (Some(t), Some(other)) = (run.synthesize(data, seed), run.synthesize(data, seed + 7919)) else {
            seed += 1;
            continue;
        };
        let target = match pairs % 3 {
            0 => other,
            1 => t.clone(),
            _ => t.direct_sum(&other).unwrap(),
        };
        let t = if pairs % 3 == 2 { t.direct_sum(&t).unwrap() } else { t };
        run.record(&target);
        run.record(&t);
        let ft = functor_f(&t, &run.tol).unwrap();
        let ftt = functor_f(&target, &run.tol).unwrap();
        let q_dim = star_hom_dimension(&t, &target, &run.tol).unwrap();
        let p_dim = hom_space_p(&ft.system, &ftt.system, &run.tol).unwrap().dimension();
        equal_dims += (q_dim == p_dim) as usize;
        let back = functor_g_scaled(&ft.system, &ft.leaf_scales).unwrap();
        match are_equivalent_star(&t, &back, seed, &run.tol).unwrap() {
            Equivalence::Equivalent { residual, .. } => worst_witness = worst_witness.max(residual),
            _ => equivalence_ok = false,
        }
        pairs += 1;
        seed += 1;
    }
    let ok = equal_dims == 20 && equivalence_ok && worst_witness <= 1e-8;
    v.report(
        4,
        ok,
        start.elapsed(),
        secs(30),
        format!(
            "{equal_dims}/20 pairs with equal Hom dimensions, G(F(T)) equivalent to T: {equivalence_ok}, worst witness residual {worst_witness:e}"
        ),
    );
}

fn criterion5(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let (mut systems, mut indecomposable, mut violations, mut skipped, mut seed) = (0usize, 0usize, 0usize, 0usize, 0u64);
    while systems < 30 {
        let data = STAR_DATA[seed as usize % STAR_DATA.len()];
        let outcome =
            synthesize_projection_system(data.center, data.leaves, None, &SynthesisOptions::with_seed(seed), &run.tol)
                .unwrap();
        seed += 1;
        let Some(s) = outcome.converged() else {
            skipped += 1;
            continue;
        };
        let weights_positive = s.weights.as_ref().is_some_and(|w| w.iter().all(|&x| x > 0.0));
        let r = theorem2_verify(&s, &run.tol).unwrap();
        indecomposable += r.indecomposable() as usize;
        violations += (!r.holds() || !weights_positive) as usize;
        systems += 1;
    }
    v.report(
        5,
        violations == 0,
        start.elapsed(),
        secs(30),
        format!("{systems} systems, {indecomposable} indecomposable, {violations} violations, {skipped} non-convergent draws skipped"),
    );
}

fn criterion7(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let families: [&[StarData]; 2] = [
        &[
            StarData { center: 2, leaves: &[1, 1, 1] },
            StarData { center: 1, leaves: &[1, 1, 1] },
        ],
        &[
            StarData { center: 2, leaves: &[1, 1, 1, 1] },
            StarData { center: 3, leaves: &[1, 1, 1, 1] },
            StarData { center: 1, leaves: &[1, 1, 1, 1] },
        ],
    ];
    let (mut exact, mut worst, mut degenerate, mut equivalent) = (0usize, 0.0f64, 0usize, 0usize);
    let mut seed = 300u64;
    for case in 0..20usize {
        let k = 2 + case % 3;
        let family = families[case % 2];
        let mut parts = Vec::new();
        while parts.len() < k {
            let data = family[(seed as usize) % family.len()];
            if let Some(t) = run.synthesize(data, seed) {
                if is_schur(&t, Category::Star, &run.tol).unwrap() {
                    parts.push(t);
                }
            }
            seed += 1;
        }
        let sum = Representation::direct_sum_all(&parts).unwrap();
        match decompose(&sum, seed, &run.tol) {
            Ok(d) => {
                exact += (d.summands.len() == k) as usize;
                let back = d.reassembled().unwrap();
                if let Equivalence::Equivalent { residual, .. } = are_equivalent_star(&sum, &back, seed, &run.tol).unwrap() {
                    equivalent += 1;
                    worst = worst.max(residual);
                }
            }
            Err(Error::NumericalDegeneracy(_)) => degenerate += 1,
            Err(e) => panic!("decompose: {e}"),
        }
    }
    let ok = exact == 20 && equivalent == 20 && worst <= 1e-8 && degenerate == 0;
    v.report(
        7,
        ok,
        start.elapsed(),
        None,
        format!(
            "{exact}/20 with exactly k summands, {equivalent}/20 reassembled star-equivalent, worst residual {worst:e}, {degenerate} degenerate"
        ),
    );
}

fn criterion8(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let targets = [
        ("A2", StarData { center: 1, leaves: &[1] }),
        ("star(3) d=(2;1,1,1)", StarData { center: 2, leaves: &[1, 1, 1] }),
        ("star(4) d=(2;1,1,1,1)", StarData { center: 2, leaves: &[1, 1, 1, 1] }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, data) in targets {
        let q = star_quiver(data.leaves.len()).unwrap();
        let mut converged = 0usize;
        let mut failed = Vec::new();
        for seed in 0..20u64 {
            let opts = SynthesisOptions { max_iterations: 10_000, residual_target: 1e-9, seed };
            match synthesize(&q, &data.dims(), &data.chi(), &opts, &run.tol).unwrap() {
                SynthesisOutcome::Converged { output, residual, .. } if residual <= 1e-9 => {
                    converged += 1;
                    run.record(&output);
                }
                other => failed.push((seed, other.residual())),
            }
        }
        ok &= converged * 100 >= 95 * 20;
        let mut part = format!("{name} {converged}/20");
        for (seed, r) in failed {
            part.push_str(&format!(" [seed {seed} did not converge, best residual {r:e}]"));
        }
        parts.push(part);
    }
    v.report(8, ok, start.elapsed(), None, parts.join(", "));
}

fn criterion6(v: &mut Verdict, run: &mut Run) {
    let start = Instant::now();
    let (mut checked, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
    for t in &run.produced {
        let report = t.orthoscalar_check(&run.tol).unwrap();
        let Some(chi) = report.character() else { continue };
        let (odd, even) = t.quiver().balance_totals(t.dims(), &chi).unwrap();
        let gap = (odd - even).abs() / (1.0 + odd);
        worst = worst.max(gap);
        checked += 1;
        violations += (gap > 1e-9) as usize;
    }
    v.report(
        6,
        violations == 0 && checked > 0,
        start.elapsed(),
        None,
        format!(
            "{checked} orthoscalar representations checked ({} synthesis draws, {} skipped), worst relative gap {worst:e}",
            run.attempted, run.skipped
        ),
    );
}

fn main() {
    let mut run = Run::default();
    let mut v = Verdict { results: Vec::new() };
    criterion1(&mut v, &mut run);
    criterion2(&mut v, &mut run);
    criterion3(&mut v, &mut run);
    criterion4(&mut v, &mut run);
    criterion5(&mut v, &mut run);
    criterion7(&mut v, &mut run);
    criterion8(&mut v, &mut run);
    criterion6(&mut v, &mut run);
    let failed: Vec<usize> = v.results.iter().filter(|(_, p)| !p).map(|(n, _)| *n).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
