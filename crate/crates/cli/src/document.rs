//! Versioned JSON documents for every artifact the toolkit reads or writes.
//!
//! A document is `{"kind": …, "version": 1, "payload": …}`. Complex numbers
//! are `[re, im]` pairs, matrices are row-major nested arrays, and every float
//! is written with 17 significant digits so that parsing gives back the same
//! bits.

use std::collections::BTreeMap;
use std::io;

use orthoscalar_core::rigidity::{CertificateStep, RescalingInstance, RigidityCertificate, StepRule};
use orthoscalar_core::subspace::ProjectionSystem;
use orthoscalar_core::{Arrow, ArrowId, ComplexMatrix, Parity, Quiver, Representation, Vertex, VertexId, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::report::Report;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported document version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("invalid {kind} payload: {message}")]
    Content { kind: &'static str, message: String },
}

impl DocumentError {
    pub fn code(&self) -> &'static str {
        match self {
            DocumentError::Parse { .. } => "parse-error",
            DocumentError::Version { .. } => "version-error",
            DocumentError::Content { .. } => "invalid-input",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Quiver(Quiver),
    Representation(Representation),
    ProjectionSystem(ProjectionSystem),
    RescalingInstance(RescalingInstance),
    Certificate(RigidityCertificate),
    Report(Report),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Quiver(_) => "quiver",
            Document::Representation(_) => "representation",
            Document::ProjectionSystem(_) => "projection-system",
            Document::RescalingInstance(_) => "rescaling-instance",
            Document::Certificate(_) => "certificate",
            Document::Report(_) => "report",
        }
    }
}

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ParityWire {
    Even,
    Odd,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexWire {
    id: u32,
    parity: ParityWire,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrowWire {
    id: u32,
    tail: u32,
    head: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverWire {
    vertices: Vec<VertexWire>,
    arrows: Vec<ArrowWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationWire {
    quiver: QuiverWire,
    dims: BTreeMap<u32, usize>,
    blocks: BTreeMap<u32, Matrix>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSystemWire {
    ambient_dim: usize,
    projections: Vec<Matrix>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescalingInstanceWire {
    z: Matrix,
    w: Matrix,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepWire {
    row: usize,
    col: usize,
    row_scalar: f64,
    col_scalar: f64,
    z: Complex,
    w: Complex,
    rule: String,
    triple: [usize; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateWire {
    steps: Vec<StepWire>,
    z_equals_w: bool,
    max_deviation: f64,
    scalar_tolerance: f64,
}

pub fn complex_to_wire(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> Matrix {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| complex_to_wire(m[(i, j)])).collect()).collect()
}

fn matrix_from_wire(w: &Matrix, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, String> {
    if w.len() != rows || w.iter().any(|r| r.len() != cols) {
        return Err(format!("{what} must be {rows}×{cols}"));
    }
    let data = w.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::from_vec(rows, cols, data).map_err(|e| format!("{what}: {e}"))
}

pub fn quiver_to_wire(q: &Quiver) -> QuiverWire {
    QuiverWire {
        vertices: q
            .vertices()
            .iter()
            .map(|v| VertexWire {
                id: v.id.0,
                parity: match v.parity {
                    Parity::Even => ParityWire::Even,
                    Parity::Odd => ParityWire::Odd,
                },
            })
            .collect(),
        arrows: q.arrows().iter().map(|a| ArrowWire { id: a.id.0, tail: a.tail.0, head: a.head.0 }).collect(),
    }
}

fn quiver_from_wire(w: QuiverWire) -> Result<Quiver, String> {
    let vertices = w
        .vertices
        .into_iter()
        .map(|v| Vertex {
            id: VertexId(v.id),
            parity: match v.parity {
                ParityWire::Even => Parity::Even,
                ParityWire::Odd => Parity::Odd,
            },
        })
        .collect();
    let arrows =
        w.arrows.into_iter().map(|a| Arrow { id: ArrowId(a.id), tail: VertexId(a.tail), head: VertexId(a.head) }).collect();
    Quiver::new(vertices, arrows).map_err(|e| e.to_string())
}

pub fn representation_to_wire(t: &Representation) -> RepresentationWire {
    RepresentationWire {
        quiver: quiver_to_wire(t.quiver()),
        dims: t.dims().iter().map(|(v, &d)| (v.0, d)).collect(),
        blocks: t.blocks().iter().map(|(a, m)| (a.0, matrix_to_wire(m))).collect(),
    }
}

fn representation_from_wire(w: RepresentationWire) -> Result<Representation, String> {
    let q = quiver_from_wire(w.quiver)?;
    let dims: BTreeMap<VertexId, usize> = w.dims.into_iter().map(|(v, d)| (VertexId(v), d)).collect();
    let mut blocks = BTreeMap::new();
    for (id, m) in &w.blocks {
        let a = q.arrow(ArrowId(*id)).ok_or_else(|| format!("block for unknown arrow {id}"))?;
        let rows = *dims.get(&a.head).ok_or_else(|| format!("no dimension for vertex {}", a.head.0))?;
        let cols = *dims.get(&a.tail).ok_or_else(|| format!("no dimension for vertex {}", a.tail.0))?;
        blocks.insert(ArrowId(*id), matrix_from_wire(m, rows, cols, &format!("block {id}"))?);
    }
    Representation::new(q, dims, blocks).map_err(|e| e.to_string())
}

pub fn projection_system_to_wire(s: &ProjectionSystem) -> ProjectionSystemWire {
    ProjectionSystemWire {
        ambient_dim: s.ambient_dim,
        projections: s.projections.iter().map(matrix_to_wire).collect(),
        weights: s.weights.clone(),
    }
}

fn projection_system_from_wire(w: ProjectionSystemWire) -> Result<ProjectionSystem, String> {
    let d = w.ambient_dim;
    let ps = w
        .projections
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from_wire(m, d, d, &format!("projection {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    ProjectionSystem::new(d, ps, w.weights).map_err(|e| e.to_string())
}

pub fn instance_to_wire(inst: &RescalingInstance) -> RescalingInstanceWire {
    RescalingInstanceWire { z: matrix_to_wire(&inst.z), w: matrix_to_wire(&inst.w), a: inst.a.clone(), b: inst.b.clone() }
}

fn instance_from_wire(w: RescalingInstanceWire) -> Result<RescalingInstance, String> {
    let (m, n) = (w.a.len(), w.b.len());
    let z = matrix_from_wire(&w.z, m, n, "Z")?;
    let wm = matrix_from_wire(&w.w, m, n, "W")?;
    RescalingInstance::new(z, wm, w.a, w.b).map_err(|e| e.to_string())
}

pub fn certificate_to_wire(c: &RigidityCertificate) -> CertificateWire {
    CertificateWire {
        steps: c
            .steps
            .iter()
            .map(|s| StepWire {
                row: s.row,
                col: s.col,
                row_scalar: s.row_scalar,
                col_scalar: s.col_scalar,
                z: complex_to_wire(s.z),
                w: complex_to_wire(s.w),
                rule: s.rule.name().to_string(),
                triple: [s.triple.0, s.triple.1, s.triple.2],
            })
            .collect(),
        z_equals_w: c.z_equals_w,
        max_deviation: c.max_deviation,
        scalar_tolerance: c.scalar_tolerance,
    }
}

fn rule_from_name(name: &str) -> Result<StepRule, String> {
    [StepRule::SingleRow, StepRule::SingleColumn, StepRule::OnePerLine, StepRule::Extremal]
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| format!("unknown step rule {name:?}"))
}

fn certificate_from_wire(w: CertificateWire) -> Result<RigidityCertificate, String> {
    let steps = w
        .steps
        .into_iter()
        .map(|s| {
            Ok(CertificateStep {
                row: s.row,
                col: s.col,
                row_scalar: s.row_scalar,
                col_scalar: s.col_scalar,
                z: C64::new(s.z[0], s.z[1]),
                w: C64::new(s.w[0], s.w[1]),
                rule: rule_from_name(&s.rule)?,
                triple: (s.triple[0], s.triple[1], s.triple[2]),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(RigidityCertificate {
        steps,
        z_equals_w: w.z_equals_w,
        max_deviation: w.max_deviation,
        scalar_tolerance: w.scalar_tolerance,
    })
}

#[derive(Serialize)]
struct Envelope<'a, P: Serialize> {
    kind: &'a str,
    version: u32,
    payload: P,
}

#[derive(Deserialize)]
struct Header {
    kind: String,
    version: u32,
    #[allow(dead_code)]
    payload: serde::de::IgnoredAny,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Typed<P> {
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    version: u32,
    payload: P,
}

/// JSON layout: objects and top-level arrays are indented, arrays nested in
/// arrays stay on one line, floats use `{:.16e}`.
#[derive(Default)]
struct DocFormatter {
    indent: usize,
    /// One entry per open container: whether it is laid out on one line.
    compact: Vec<bool>,
    has_value: Vec<bool>,
    parent_is_array: Vec<bool>,
}

impl DocFormatter {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }

    fn open<W: ?Sized + io::Write>(&mut self, w: &mut W, is_array: bool, bracket: &[u8]) -> io::Result<()> {
        let inside_compact = self.compact.last().copied().unwrap_or(false);
        let inside_array = self.parent_is_array.last().copied().unwrap_or(false);
        self.compact.push(inside_compact || (is_array && inside_array));
        self.has_value.push(false);
        self.parent_is_array.push(is_array);
        self.indent += 1;
        w.write_all(bracket)
    }

    fn close<W: ?Sized + io::Write>(&mut self, w: &mut W, bracket: &[u8]) -> io::Result<()> {
        self.indent -= 1;
        self.parent_is_array.pop();
        let compact = self.compact.pop().unwrap_or(false);
        let had = self.has_value.pop().unwrap_or(false);
        if !compact && had {
            self.newline(w)?;
        }
        w.write_all(bracket)
    }

    fn item<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if let Some(h) = self.has_value.last_mut() {
            *h = true;
        }
        if self.compact.last().copied().unwrap_or(false) {
            if !first {
                w.write_all(b", ")?;
            }
            Ok(())
        } else {
            if !first {
                w.write_all(b",")?;
            }
            self.newline(w)
        }
    }
}

impl Formatter for DocFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.open(writer, true, b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.item(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.open(writer, false, b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.item(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Ok(())
    }
}

/// Serializes any value with the document float layout.
pub fn to_text<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, DocFormatter::default());
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

fn envelope<P: Serialize>(kind: &str, payload: P) -> String {
    to_text(&Envelope { kind, version: FORMAT_VERSION, payload })
}

pub fn serialize(doc: &Document) -> String {
    let kind = doc.kind();
    match doc {
        Document::Quiver(q) => envelope(kind, quiver_to_wire(q)),
        Document::Representation(t) => envelope(kind, representation_to_wire(t)),
        Document::ProjectionSystem(s) => envelope(kind, projection_system_to_wire(s)),
        Document::RescalingInstance(i) => envelope(kind, instance_to_wire(i)),
        Document::Certificate(c) => envelope(kind, certificate_to_wire(c)),
        Document::Report(r) => envelope(kind, r),
    }
}

fn json_error(e: serde_json::Error) -> DocumentError {
    DocumentError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

fn typed<P: DeserializeOwned>(text: &str) -> Result<P, DocumentError> {
    serde_json::from_str::<Typed<P>>(text).map(|t| t.payload).map_err(json_error)
}

fn content(kind: &'static str) -> impl Fn(String) -> DocumentError {
    move |message| DocumentError::Content { kind, message }
}

pub fn parse(text: &str) -> Result<Document, DocumentError> {
    let header: Header = serde_json::from_str(text).map_err(json_error)?;
    if header.version != FORMAT_VERSION {
        return Err(DocumentError::Version { found: header.version });
    }
    Ok(match header.kind.as_str() {
        "quiver" => Document::Quiver(quiver_from_wire(typed(text)?).map_err(content("quiver"))?),
        "representation" => {
            Document::Representation(representation_from_wire(typed(text)?).map_err(content("representation"))?)
        }
        "projection-system" => Document::ProjectionSystem(
            projection_system_from_wire(typed(text)?).map_err(content("projection-system"))?,
        ),
        "rescaling-instance" => {
            Document::RescalingInstance(instance_from_wire(typed(text)?).map_err(content("rescaling-instance"))?)
        }
        "certificate" => Document::Certificate(certificate_from_wire(typed(text)?).map_err(content("certificate"))?),
        "report" => Document::Report(typed(text)?),
        other => {
            return Err(DocumentError::Parse { line: 1, column: 1, message: format!("unknown document kind {other:?}") })
        }
    })
}
