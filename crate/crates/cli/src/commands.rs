use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use orthoscalar_core::morphism::{
    are_equivalent_star, decompose, end_space, hom_space, is_schur, Category, Equivalence, HomSpace,
};
use orthoscalar_core::quiver::balance_check;
use orthoscalar_core::rigidity::{lemma1_certify, remark6_demo, theorem1_trace_sampled, RescalingInstance};
use orthoscalar_core::subspace::{functor_f, functor_g, solve_weights, validate_system, ProjectionSystem};
use orthoscalar_core::synthesis::{synthesize, SynthesisOptions, SynthesisOutcome};
use orthoscalar_core::{Character, DimensionVector, Error, Quiver, Representation, TolerancePolicy, VertexId};
use serde_json::json;

use crate::document::{
    certificate_to_wire, complex_to_wire, matrix_to_wire, parse, projection_system_to_wire, representation_to_wire,
    serialize, Document, DocumentError,
};
use crate::report::{Outcome, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Doc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CategoryArg {
    Plain,
    Star,
}

impl From<CategoryArg> for Category {
    fn from(c: CategoryArg) -> Self {
        match c {
            CategoryArg::Plain => Category::Plain,
            CategoryArg::Star => Category::Star,
        }
    }
}

/// Orthoscalar quiver representations: checks, intertwiners, certificates.
#[derive(Debug, Parser)]
#[command(name = "orthoscalar", version, about)]
pub struct Cli {
    /// Relative rank tolerance (rank_rel_tol).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `text` for a readable report, `doc` for a report document.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write the produced artifact (representation, system, certificate) here.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the representation orthoscalar?
    Check { file: PathBuf },
    /// Fitted character and its residuals.
    Character { file: PathBuf },
    /// Dimension of the morphism space between two representations.
    Hom {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = CategoryArg::Plain)]
        category: CategoryArg,
    },
    /// Dimension of the endomorphism algebra.
    End {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CategoryArg::Plain)]
        category: CategoryArg,
    },
    /// Is the endomorphism algebra one-dimensional?
    Schur {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CategoryArg::Plain)]
        category: CategoryArg,
    },
    /// Split into orthogonal indecomposable summands.
    Decompose { file: PathBuf },
    /// Unitary equivalence with a witness.
    Equiv { source: PathBuf, target: PathBuf },
    /// Star representation to projection system.
    ToProjections { file: PathBuf },
    /// Projection system to star representation (weights are solved if absent).
    FromProjections { file: PathBuf },
    /// Positive weights with sum of weighted projections equal to the identity.
    Weights { file: PathBuf },
    /// Orthoscalar representation for a quiver, dimensions and character.
    Synthesize {
        /// Quiver document.
        file: PathBuf,
        /// Dimensions as `vertex:dim,...`.
        #[arg(long)]
        dims: String,
        /// Character as `vertex:value,...`; values may be fractions like `2/3`.
        #[arg(long)]
        chi: String,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-9)]
        target: f64,
    },
    /// Certify the rescaling lemma on an instance.
    Lemma1 { file: PathBuf },
    /// Trace the scalar-endomorphism argument on a sampled endomorphism.
    TraceTheorem1 { file: PathBuf },
    /// The loop counterexample on non-separated quivers.
    DemoRemark6,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Character { .. } => "character",
            Command::Hom { .. } => "hom",
            Command::End { .. } => "end",
            Command::Schur { .. } => "schur",
            Command::Decompose { .. } => "decompose",
            Command::Equiv { .. } => "equiv",
            Command::ToProjections { .. } => "to-projections",
            Command::FromProjections { .. } => "from-projections",
            Command::Weights { .. } => "weights",
            Command::Synthesize { .. } => "synthesize",
            Command::Lemma1 { .. } => "lemma1",
            Command::TraceTheorem1 { .. } => "trace-theorem1",
            Command::DemoRemark6 => "demo-remark6",
        }
    }
}

/// What a command printed and how it wants to exit.
#[derive(Debug)]
pub struct RunOutput {
    pub stdout: String,
    pub report: Report,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

enum Failure {
    Document(DocumentError),
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::Document(e)
    }
}

struct Context<'a> {
    name: &'static str,
    tol: TolerancePolicy,
    seed: u64,
    output: Option<&'a Path>,
}

impl Context<'_> {
    fn report(&self, outcome: Outcome) -> Report {
        Report::new(self.name, outcome, &self.tol, self.seed)
    }

    fn emit(&self, doc: Document) -> Result<Option<String>, Failure> {
        match self.output {
            Some(path) => {
                std::fs::write(path, serialize(&doc))
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                Ok(Some(format!("wrote {} document to {}", doc.kind(), path.display())))
            }
            None => Ok(None),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Document, Failure> {
    Ok(parse(&read_text(path)?)?)
}

fn wrong_kind(path: &Path, want: &str, got: &Document) -> Failure {
    Failure::Usage(format!("{} holds a {} document, expected {want}", path.display(), got.kind()))
}

fn load_representation(path: &Path) -> Result<Representation, Failure> {
    match load(path)? {
        Document::Representation(t) => Ok(t),
        other => Err(wrong_kind(path, "representation", &other)),
    }
}

fn load_system(path: &Path) -> Result<ProjectionSystem, Failure> {
    match load(path)? {
        Document::ProjectionSystem(s) => Ok(s),
        other => Err(wrong_kind(path, "projection-system", &other)),
    }
}

fn load_quiver(path: &Path) -> Result<Quiver, Failure> {
    match load(path)? {
        Document::Quiver(q) => Ok(q),
        Document::Representation(t) => Ok(t.quiver().clone()),
        other => Err(wrong_kind(path, "quiver", &other)),
    }
}

fn load_instance(path: &Path) -> Result<RescalingInstance, Failure> {
    match load(path)? {
        Document::RescalingInstance(i) => Ok(i),
        other => Err(wrong_kind(path, "rescaling-instance", &other)),
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            n / d
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("bad number {s:?}"))
    }
}

fn parse_assignments<T>(spec: &str, value: impl Fn(&str) -> Result<T, String>) -> Result<BTreeMap<VertexId, T>, String> {
    let mut out = BTreeMap::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (v, x) = item.split_once(':').ok_or_else(|| format!("expected vertex:value, got {item:?}"))?;
        let v: u32 = v.trim().parse().map_err(|_| format!("bad vertex id {v:?}"))?;
        out.insert(VertexId(v), value(x)?);
    }
    Ok(out)
}

fn character_json(chi: &Character) -> serde_json::Value {
    json!(chi.iter().map(|(v, x)| (v.0.to_string(), *x)).collect::<BTreeMap<_, _>>())
}

fn hom_summary(h: &HomSpace) -> serde_json::Value {
    json!({ "dimension": h.dimension(), "worst_basis_residual": h.worst_residual() })
}

fn tolerance(cli: &Cli) -> Result<TolerancePolicy, Failure> {
    match cli.tol {
        None => Ok(TolerancePolicy::default()),
        Some(t) => Ok(TolerancePolicy::new(t, TolerancePolicy::default().residual_abs_tol)?),
    }
}

fn execute(cli: &Cli, ctx: &Context) -> Result<Report, Failure> {
    let tol = &ctx.tol;
    let seed = ctx.seed;
    Ok(match &cli.command {
        Command::Check { file } => {
            let t = load_representation(file)?;
            let r = t.orthoscalar_check(tol)?;
            let mut report = ctx.report(Outcome::holds_if(r.is_orthoscalar)).line(format!(
                "worst relative residual {:e} (threshold {:e})",
                r.worst_residual, r.threshold
            ));
            let mut balance = None;
            if let Some(chi) = r.character() {
                report = report.line(format!("character {:?}", chi.values().collect::<Vec<_>>()));
                if t.quiver().structure().is_separated {
                    let (odd, even) = t.quiver().balance_totals(t.dims(), &chi)?;
                    let ok = balance_check(t.quiver(), t.dims(), &chi, tol)?;
                    report = report.line(format!("balance: odd {odd} even {even} ({})", if ok { "ok" } else { "violated" }));
                    balance = Some(json!({ "odd_total": odd, "even_total": even, "holds": ok }));
                }
            }
            report.details(json!({
                "is_orthoscalar": r.is_orthoscalar,
                "worst_residual": r.worst_residual,
                "threshold": r.threshold,
                "vertices": r.vertices.iter().map(|v| json!({"vertex": v.vertex.0, "chi": v.chi, "residual": v.residual})).collect::<Vec<_>>(),
                "balance": balance,
            }))
        }
        Command::Character { file } => {
            let t = load_representation(file)?;
            let r = t.orthoscalar_check(tol)?;
            let fitted = r.fitted();
            let mut report = ctx.report(Outcome::holds_if(r.is_orthoscalar));
            for v in &r.vertices {
                report = report.line(format!("vertex {}: chi = {} (residual {:e})", v.vertex.0, v.chi, v.residual));
            }
            report.details(json!({ "character": character_json(&fitted), "is_orthoscalar": r.is_orthoscalar }))
        }
        Command::Hom { source, target, category } => {
            let (a, b) = (load_representation(source)?, load_representation(target)?);
            let h = hom_space(&a, &b, (*category).into(), tol)?;
            ctx.report(Outcome::Holds).line(format!("dim Hom = {}", h.dimension())).details(hom_summary(&h))
        }
        Command::End { file, category } => {
            let t = load_representation(file)?;
            let h = end_space(&t, (*category).into(), tol)?;
            ctx.report(Outcome::Holds).line(format!("dim End = {}", h.dimension())).details(hom_summary(&h))
        }
        Command::Schur { file, category } => {
            let t = load_representation(file)?;
            let h = end_space(&t, (*category).into(), tol)?;
            let schur = is_schur(&t, (*category).into(), tol)?;
            ctx.report(Outcome::holds_if(schur))
                .line(format!("dim End = {}; {}", h.dimension(), if schur { "Schur" } else { "not Schur" }))
                .details(json!({ "end_dimension": h.dimension(), "is_schur": schur }))
        }
        Command::Decompose { file } => {
            let t = load_representation(file)?;
            let d = decompose(&t, seed, tol)?;
            let ortho = d.orthogonality_defect(&t);
            let block = d.block_diagonal_defect(&t)?;
            let mut report = ctx
                .report(Outcome::Holds)
                .line(format!("{} summands", d.summands.len()))
                .line(format!("orthogonality defect {ortho:e}, block-diagonal defect {block:e}"));
            for (k, s) in d.summands.iter().enumerate() {
                report = report.line(format!("summand {k}: dims {:?}", s.dims().values().collect::<Vec<_>>()));
            }
            report.details(json!({
                "summands": d.summands.iter().map(representation_to_wire).collect::<Vec<_>>(),
                "orthogonality_defect": ortho,
                "block_diagonal_defect": block,
            }))
        }
        Command::Equiv { source, target } => {
            let (a, b) = (load_representation(source)?, load_representation(target)?);
            match are_equivalent_star(&a, &b, seed, tol)? {
                Equivalence::Equivalent { witness, residual } => ctx
                    .report(Outcome::Holds)
                    .line(format!("unitarily equivalent; witness residual {residual:e}"))
                    .details(json!({
                        "equivalent": true,
                        "residual": residual,
                        "witness": witness.iter().map(|(v, m)| (v.0.to_string(), matrix_to_wire(m))).collect::<BTreeMap<_, _>>(),
                    })),
                Equivalence::NotEquivalent { reason } => ctx
                    .report(Outcome::Fails)
                    .line(format!("not equivalent: {reason}"))
                    .details(json!({ "equivalent": false, "reason": reason })),
                Equivalence::EquivalentWithoutWitness { residual } => ctx
                    .report(Outcome::Degenerate)
                    .line(format!("invertible *-morphism found, but its unitary factor misses by {residual:e}"))
                    .details(json!({ "equivalent": true, "residual": residual })),
            }
        }
        Command::ToProjections { file } => {
            let t = load_representation(file)?;
            let img = functor_f(&t, tol)?;
            let mut report = ctx
                .report(Outcome::Holds)
                .line(format!("{} projections on C^{}", img.system.len(), img.system.ambient_dim))
                .line(format!("leaf scales {:?}", img.leaf_scales));
            if let Some(w) = &img.system.weights {
                report = report.line(format!("weights {w:?}"));
            }
            let details = json!({ "system": projection_system_to_wire(&img.system), "leaf_scales": img.leaf_scales });
            if let Some(line) = ctx.emit(Document::ProjectionSystem(img.system))? {
                report = report.line(line);
            }
            report.details(details)
        }
        Command::FromProjections { file } => {
            let s = load_system(file)?;
            let s = match s.weights {
                Some(_) => s,
                None => {
                    let w = solve_weights(&s, tol)?;
                    s.with_weights(w.weights)?
                }
            };
            let t = functor_g(&s, tol)?;
            let mut report = ctx
                .report(Outcome::Holds)
                .line(format!("star representation with dims {:?}", t.dims().values().collect::<Vec<_>>()));
            let details = json!({ "representation": representation_to_wire(&t) });
            if let Some(line) = ctx.emit(Document::Representation(t))? {
                report = report.line(line);
            }
            report.details(details)
        }
        Command::Weights { file } => {
            let s = load_system(file)?;
            let v = validate_system(&s, tol)?;
            let w = solve_weights(&s, tol)?;
            let mut report = ctx
                .report(Outcome::Holds)
                .line(format!("weights {:?}", w.weights))
                .line(format!("residual {:e}, subspace dims {:?}", w.residual, v.ranks));
            if w.dependent {
                report = report.line("projections are linearly dependent; weights are not unique");
            }
            report.details(json!({
                "weights": w.weights,
                "residual": w.residual,
                "rank": w.rank,
                "dependent": w.dependent,
                "subspace_dims": v.ranks,
            }))
        }
        Command::Synthesize { file, dims, chi, max_iterations, target } => {
            let q = load_quiver(file)?;
            let dims: DimensionVector =
                parse_assignments(dims, |x| x.trim().parse::<usize>().map_err(|_| format!("bad dimension {x:?}")))
                    .map_err(Failure::Usage)?;
            let chi: Character = parse_assignments(chi, parse_number).map_err(Failure::Usage)?;
            let opts = SynthesisOptions { max_iterations: *max_iterations, residual_target: *target, seed };
            match synthesize(&q, &dims, &chi, &opts, tol)? {
                SynthesisOutcome::Converged { output, residual, iterations } => {
                    let mut report = ctx
                        .report(Outcome::Holds)
                        .line(format!("converged after {iterations} iterations, residual {residual:e}"));
                    let details = json!({
                        "converged": true,
                        "residual": residual,
                        "iterations": iterations,
                        "representation": representation_to_wire(&output),
                    });
                    if let Some(line) = ctx.emit(Document::Representation(output))? {
                        report = report.line(line);
                    }
                    report.details(details)
                }
                SynthesisOutcome::NonConvergence { best_residual, iterations } => ctx
                    .report(Outcome::Degenerate)
                    .line(format!("no convergence in {iterations} iterations; best residual {best_residual:e}"))
                    .details(json!({ "converged": false, "best_residual": best_residual, "iterations": iterations })),
            }
        }
        Command::Lemma1 { file } => {
            let inst = load_instance(file)?;
            let cert = lemma1_certify(&inst, tol)?;
            let mut report = ctx
                .report(Outcome::holds_if(cert.z_equals_w))
                .line(format!("{} steps; max |Z - W| = {:e}", cert.steps.len(), cert.max_deviation));
            for s in &cert.steps {
                report = report.line(format!(
                    "({}, {}) {}: a = {}, b = {}",
                    s.row, s.col, s.rule.name(), s.row_scalar, s.col_scalar
                ));
            }
            let details = json!({ "certificate": certificate_to_wire(&cert) });
            if let Some(line) = ctx.emit(Document::Certificate(cert))? {
                report = report.line(line);
            }
            report.details(details)
        }
        Command::TraceTheorem1 { file } => {
            let t = load_representation(file)?;
            let r = theorem1_trace_sampled(&t, seed, tol)?;
            let mut report = ctx.report(Outcome::holds_if(r.is_scalar())).line(format!("shift {}", r.shift));
            for s in &r.stages {
                report = report.line(format!("{}: residual {:e}", s.stage, s.residual));
            }
            report = report.line(match r.verdict {
                Some(v) => format!("endomorphism is scalar: {} + {}i", v.re, v.im),
                None => "endomorphism is not scalar".to_string(),
            });
            report.details(json!({
                "shift": r.shift,
                "stages": r.stages.iter().map(|s| json!({"stage": s.stage, "residual": s.residual})).collect::<Vec<_>>(),
                "lemma_steps": r.lemma.steps.len(),
                "verdict": r.verdict.map(complex_to_wire),
                "max_residual": r.max_residual(),
            }))
        }
        Command::DemoRemark6 => {
            let r = remark6_demo(tol)?;
            ctx.report(Outcome::holds_if(r.holds()))
                .line(format!("T = {:?}", matrix_to_wire(r.representation.block(orthoscalar_core::ArrowId(0)))))
                .line(format!("TT* + T*T = 3I: {}", r.gram_is_3i))
                .line(format!("AT = TA for A = [[3,1],[0,1]]: {}", r.commutes))
                .line(format!("plain End dimension {}", r.plain_end_dim))
                .line(format!("star End dimension {}", r.star_end_dim))
                .line(format!("A invertible: {}, A scalar: {}", r.endomorphism_invertible, r.endomorphism_scalar))
                .details(json!({
                    "T": matrix_to_wire(r.representation.block(orthoscalar_core::ArrowId(0))),
                    "gram": matrix_to_wire(&r.gram),
                    "A": matrix_to_wire(&r.endomorphism),
                    "AT": matrix_to_wire(&r.at),
                    "TA": matrix_to_wire(&r.ta),
                    "plain_end_dim": r.plain_end_dim,
                    "star_end_dim": r.star_end_dim,
                    "A_invertible": r.endomorphism_invertible,
                    "A_scalar": r.endomorphism_scalar,
                }))
        }
    })
}

/// Runs one command and renders its report.
pub fn run(cli: &Cli) -> RunOutput {
    let name = cli.command.name();
    let fallback = TolerancePolicy::default();
    let result = tolerance(cli).and_then(|tol| {
        let ctx = Context { name, tol, seed: cli.seed, output: cli.output.as_deref() };
        execute(cli, &ctx)
    });
    let tol = tolerance(cli).unwrap_or(fallback);
    let report = result.unwrap_or_else(|failure| {
        let (outcome, code, message) = match failure {
            Failure::Document(e) => (Outcome::InvalidInput, e.code(), e.to_string()),
            Failure::Core(e) => (Outcome::of_error(&e), e.code(), e.to_string()),
            Failure::Usage(m) => (Outcome::InvalidInput, "invalid-input", m),
        };
        Report::new(name, outcome, &tol, cli.seed)
            .line(format!("error ({code}): {message}"))
            .details(json!({ "error": code, "message": message }))
    });
    let stdout = match cli.format {
        OutputFormat::Text => report.render_text(),
        OutputFormat::Doc => serialize(&Document::Report(report.clone())),
    };
    RunOutput { stdout, report }
}
