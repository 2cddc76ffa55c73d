//! JSON instance and certificate files.
//!
//! Instances carry `"version": "1"`, 2x2 matrices are row-major 4-arrays and
//! every integer fits in 64 bits. Unknown fields are rejected. Certificates
//! store big integers as decimal strings and are bound to their instance by
//! the SHA-256 of the canonical (sorted keys, no whitespace) instance text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::instance::Instance;
use crate::jsj::{BoundaryComponent, Edge, EdgeEnd, JsjGraph, JsjViolation, Piece, PieceKind};
use crate::lattice::{hnf, Gluing, Lattice, Slope, Vector};
use crate::phi::{Circle, CircleRef, PhiEdge, PhiGraph, PhiVertex, PhiVertexKind, PhiViolation};
use crate::semicover::{
    ConstantInput, ConstantSheet, CoverCertificate, CoverGraphSpec, CoverVertexKind, EdgeRecord, EndRecord,
    EndShape, ExtraEdge, ExtraEnd, ExtraVertex, SpaceSpec, VertexRecord,
};

pub const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, col: usize, message: String },
    /// A name that does not resolve, with where it was used.
    Reference { name: String, at: String },
    Invariant(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, col, message } => write!(f, "syntax error at {line}:{col}: {message}"),
            ParseError::Reference { name, at } => write!(f, "unresolved reference {name} in {at}"),
            ParseError::Invariant(d) => write!(f, "invariant violated: {d}"),
        }
    }
}

impl std::error::Error for ParseError {}

fn syntax(e: serde_json::Error) -> Vec<ParseError> {
    vec![ParseError::Syntax { line: e.line(), col: e.column(), message: e.to_string() }]
}

// ---- raw instance format ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: String,
    jsj: RawJsj,
    phi: RawPhi,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cover_graph: Option<RawCover>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constants: Option<RawConstants>,
    subgroup: RawSubgroup,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubgroup {
    infinite_index: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJsj {
    is_sol: bool,
    trivial_decomposition: bool,
    pieces: Vec<RawPiece>,
    edges: Vec<RawEdge>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPieceKind {
    SeifertFibered,
    HyperbolicFiniteVolume,
    HyperbolicHigherGenus,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    id: String,
    genus: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    id: String,
    kind: RawPieceKind,
    boundary: Vec<RawBoundary>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    fiber_slopes: BTreeMap<String, [i64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    degeneracy_slopes: BTreeMap<String, [i64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdgeEnd {
    piece: String,
    boundary: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    end_a: RawEdgeEnd,
    end_b: RawEdgeEnd,
    gluing: [i64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhi {
    vertices: Vec<RawPhiVertex>,
    edges: Vec<RawPhiEdge>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPhiKind {
    SeifertVirtuallyFibered,
    SeifertPartiallyFibered,
    HypVirtuallyFibered,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhiVertex {
    id: String,
    piece: String,
    kind: RawPhiKind,
    circles: Vec<RawCircle>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircle {
    id: String,
    torus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seifert_intersection: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cusp_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    core: Option<[i64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircleRef {
    vertex: String,
    circle: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhiEdge {
    id: String,
    end_a: RawCircleRef,
    end_b: RawCircleRef,
    jsj_edge: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    vertices: Vec<RawExtraVertex>,
    edges: Vec<RawExtraEdge>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawExtraKind {
    HypGeometricallyFinite,
    SeifertCircleBundle,
    SeifertPartiallyFibered,
    FiniteCover,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtraVertex {
    id: String,
    piece: String,
    kind: RawExtraKind,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtraEnd {
    vertex: String,
    torus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circle: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawSpace {
    /// Generators as the columns of a row-major 2x2 matrix.
    Torus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lattice: Option<[i64; 4]>,
    },
    Cylinder {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core: Option<[i64; 2]>,
    },
    Plane {
        interior: bool,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtraEdge {
    id: String,
    jsj_edge: String,
    end_a: RawExtraEnd,
    end_b: RawExtraEnd,
    space: RawSpace,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    vertex: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    circle: BTreeMap<String, BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extra_factor: Option<u64>,
}

// ---- conversion ----

struct Collect(Vec<ParseError>);

impl Collect {
    fn invariant(&mut self, d: impl Into<String>) {
        self.0.push(ParseError::Invariant(d.into()));
    }

    fn reference(&mut self, name: &str, at: impl Into<String>) {
        self.0.push(ParseError::Reference { name: name.into(), at: at.into() });
    }

    fn slope(&mut self, s: [i64; 2], at: &str) -> Option<Slope> {
        match Slope::new(s[0], s[1]) {
            Ok(x) => Some(x),
            Err(e) => {
                self.invariant(format!("{at}: slope ({}, {}) {e}", s[0], s[1]));
                None
            }
        }
    }
}

fn vec2(v: [i64; 2]) -> Vector {
    Vector::new(v[0], v[1])
}

fn from_raw(raw: RawInstance) -> Result<Instance, Vec<ParseError>> {
    let mut c = Collect(Vec::new());
    if raw.version != VERSION {
        c.invariant(format!("unsupported version {:?}, expected \"{VERSION}\"", raw.version));
    }

    let mut pieces = Vec::new();
    for p in raw.jsj.pieces {
        let mut fiber_slopes = BTreeMap::new();
        for (t, s) in p.fiber_slopes {
            if let Some(s) = c.slope(s, &format!("fiber slope of {}/{t}", p.id)) {
                fiber_slopes.insert(t, s);
            }
        }
        let mut degeneracy_slopes = BTreeMap::new();
        for (t, s) in p.degeneracy_slopes {
            if let Some(s) = c.slope(s, &format!("degeneracy slope of {}/{t}", p.id)) {
                degeneracy_slopes.insert(t, s);
            }
        }
        pieces.push(Piece {
            id: p.id,
            kind: match p.kind {
                RawPieceKind::SeifertFibered => PieceKind::SeifertFibered,
                RawPieceKind::HyperbolicFiniteVolume => PieceKind::HyperbolicFiniteVolume,
                RawPieceKind::HyperbolicHigherGenus => PieceKind::HyperbolicHigherGenus,
            },
            boundary: p.boundary.into_iter().map(|b| BoundaryComponent { id: b.id, genus: b.genus }).collect(),
            fiber_slopes,
            degeneracy_slopes,
        });
    }
    let mut edges = Vec::new();
    for e in raw.jsj.edges {
        let m = e.gluing;
        let gluing = match Gluing::new([[m[0], m[1]], [m[2], m[3]]]) {
            Ok(g) => g,
            Err(err) => {
                c.invariant(format!("gluing of {}: {err}", e.id));
                Gluing::identity()
            }
        };
        edges.push(Edge {
            id: e.id,
            end_a: EdgeEnd { piece: e.end_a.piece, boundary: e.end_a.boundary },
            end_b: EdgeEnd { piece: e.end_b.piece, boundary: e.end_b.boundary },
            gluing,
        });
    }
    let jsj = JsjGraph {
        pieces,
        edges,
        is_sol: raw.jsj.is_sol,
        trivial_decomposition: raw.jsj.trivial_decomposition,
    };

    let phi = PhiGraph {
        vertices: raw
            .phi
            .vertices
            .into_iter()
            .map(|v| PhiVertex {
                id: v.id,
                piece: v.piece,
                kind: match v.kind {
                    RawPhiKind::SeifertVirtuallyFibered => PhiVertexKind::SeifertVirtuallyFibered,
                    RawPhiKind::SeifertPartiallyFibered => PhiVertexKind::SeifertPartiallyFibered,
                    RawPhiKind::HypVirtuallyFibered => PhiVertexKind::HypVirtuallyFibered,
                },
                circles: v
                    .circles
                    .into_iter()
                    .map(|k| Circle {
                        id: k.id,
                        torus: k.torus,
                        seifert_intersection: k.seifert_intersection,
                        cusp_degree: k.cusp_degree,
                        core: k.core.map(vec2),
                    })
                    .collect(),
            })
            .collect(),
        edges: raw
            .phi
            .edges
            .into_iter()
            .map(|e| PhiEdge {
                id: e.id,
                end_a: CircleRef { vertex: e.end_a.vertex, circle: e.end_a.circle },
                end_b: CircleRef { vertex: e.end_b.vertex, circle: e.end_b.circle },
                jsj_edge: e.jsj_edge,
            })
            .collect(),
    };

    let mut cover = CoverGraphSpec::default();
    if let Some(rc) = raw.cover_graph {
        for v in rc.vertices {
            cover.vertices.push(ExtraVertex {
                id: v.id,
                piece: v.piece,
                kind: match v.kind {
                    RawExtraKind::HypGeometricallyFinite => CoverVertexKind::HypGeometricallyFinite,
                    RawExtraKind::SeifertCircleBundle => CoverVertexKind::SeifertCircleBundle,
                    RawExtraKind::SeifertPartiallyFibered => CoverVertexKind::SeifertPartiallyFibered,
                    RawExtraKind::FiniteCover => CoverVertexKind::FiniteCover,
                },
            });
        }
        for e in rc.edges {
            let space = match e.space {
                RawSpace::Torus { lattice: None } => SpaceSpec::Torus { lattice: None },
                RawSpace::Torus { lattice: Some(m) } => {
                    match hnf(&[Vector::new(m[0], m[2]), Vector::new(m[1], m[3])]) {
                        Ok(l) => SpaceSpec::Torus { lattice: Some(l) },
                        Err(err) => {
                            c.invariant(format!("torus subgroup of {}: {err}", e.id));
                            SpaceSpec::Torus { lattice: None }
                        }
                    }
                }
                RawSpace::Cylinder { core } => {
                    if core.is_some_and(|k| k == [0, 0]) {
                        c.invariant(format!("cylinder {} has a zero core", e.id));
                    }
                    SpaceSpec::Cylinder { core: core.map(vec2) }
                }
                RawSpace::Plane { interior } => SpaceSpec::Plane { interior },
            };
            let end = |x: RawExtraEnd| ExtraEnd { vertex: x.vertex, torus: x.torus, circle: x.circle };
            cover.edges.push(ExtraEdge {
                id: e.id,
                jsj_edge: e.jsj_edge,
                end_a: end(e.end_a),
                end_b: end(e.end_b),
                space,
            });
        }
    }
    let rc = raw.constants.unwrap_or_default();
    let constants = ConstantInput { vertex: rc.vertex, circle: rc.circle, extra_factor: rc.extra_factor };

    let inst = Instance { jsj, phi, cover, constants, infinite_index: raw.subgroup.infinite_index };
    check_references(&inst, &mut c);
    if c.0.is_empty() {
        check_invariants(&inst, &mut c);
    }
    if c.0.is_empty() {
        Ok(inst)
    } else {
        Err(c.0)
    }
}

fn check_references(inst: &Instance, c: &mut Collect) {
    let jsj = &inst.jsj;
    let torus_of = |piece: &str, t: &str| jsj.piece(piece).is_some_and(|p| p.boundary(t).is_some());
    for p in &jsj.pieces {
        for t in p.fiber_slopes.keys().chain(p.degeneracy_slopes.keys()) {
            if p.boundary(t).is_none() {
                c.reference(&format!("{}/{t}", p.id), format!("slopes of piece {}", p.id));
            }
        }
    }
    for e in &jsj.edges {
        for end in [&e.end_a, &e.end_b] {
            if jsj.piece(&end.piece).is_none() {
                c.reference(&end.piece, format!("decomposition edge {}", e.id));
            } else if !torus_of(&end.piece, &end.boundary) {
                c.reference(&format!("{}/{}", end.piece, end.boundary), format!("decomposition edge {}", e.id));
            }
        }
    }
    for v in &inst.phi.vertices {
        if jsj.piece(&v.piece).is_none() {
            c.reference(&v.piece, format!("surface vertex {}", v.id));
            continue;
        }
        for k in &v.circles {
            if !torus_of(&v.piece, &k.torus) {
                c.reference(&format!("{}/{}", v.piece, k.torus), format!("circle {}/{}", v.id, k.id));
            }
        }
    }
    for e in &inst.phi.edges {
        for end in [&e.end_a, &e.end_b] {
            if inst.phi.circle(end).is_none() {
                c.reference(&format!("{}/{}", end.vertex, end.circle), format!("surface edge {}", e.id));
            }
        }
        if jsj.edge(&e.jsj_edge).is_none() {
            c.reference(&e.jsj_edge, format!("surface edge {}", e.id));
        }
    }
    let mut vertices: BTreeSet<&str> = inst.phi.vertices.iter().map(|v| v.id.as_str()).collect();
    for v in &inst.cover.vertices {
        if jsj.piece(&v.piece).is_none() {
            c.reference(&v.piece, format!("cover vertex {}", v.id));
        }
        vertices.insert(&v.id);
    }
    let piece_of = |id: &str| {
        inst.phi
            .vertex(id)
            .map(|v| v.piece.as_str())
            .or_else(|| inst.cover.vertices.iter().find(|v| v.id == id).map(|v| v.piece.as_str()))
    };
    for e in &inst.cover.edges {
        if jsj.edge(&e.jsj_edge).is_none() {
            c.reference(&e.jsj_edge, format!("cover edge {}", e.id));
        }
        for end in [&e.end_a, &e.end_b] {
            let Some(piece) = piece_of(&end.vertex) else {
                c.reference(&end.vertex, format!("cover edge {}", e.id));
                continue;
            };
            if !torus_of(piece, &end.torus) {
                c.reference(&format!("{piece}/{}", end.torus), format!("cover edge {}", e.id));
            }
            if let Some(k) = &end.circle {
                if inst.phi.circle(&CircleRef::new(&end.vertex, k)).is_none() {
                    c.reference(&format!("{}/{k}", end.vertex), format!("cover edge {}", e.id));
                }
            }
        }
    }
    for v in inst.constants.vertex.keys() {
        if !vertices.contains(v.as_str()) {
            c.reference(v, "constants");
        }
    }
    for (v, m) in &inst.constants.circle {
        for k in m.keys() {
            if inst.phi.circle(&CircleRef::new(v, k)).is_none() {
                c.reference(&format!("{v}/{k}"), "constants");
            }
        }
    }
}

fn check_invariants(inst: &Instance, c: &mut Collect) {
    for v in inst.jsj.validate() {
        match v {
            JsjViolation::UnknownEnd(..) => {}
            v => c.invariant(v.to_string()),
        }
    }
    for v in inst.phi.validate_against(&inst.jsj) {
        match v {
            PhiViolation::UnknownPiece(..)
            | PhiViolation::UnknownTorus(..)
            | PhiViolation::UnknownEnd(..)
            | PhiViolation::UnknownJsjEdge(..) => {}
            v => c.invariant(v.to_string()),
        }
    }
    let mut ids: BTreeSet<&str> = inst.phi.vertices.iter().map(|v| v.id.as_str()).collect();
    for v in &inst.cover.vertices {
        if !ids.insert(&v.id) {
            c.invariant(format!("duplicate vertex id {} in the cover graph", v.id));
        }
    }
    let mut ids: BTreeSet<&str> = inst.phi.edges.iter().map(|e| e.id.as_str()).collect();
    for e in &inst.cover.edges {
        if !ids.insert(&e.id) {
            c.invariant(format!("duplicate edge id {} in the cover graph", e.id));
        }
    }
    for (what, x) in inst
        .constants
        .vertex
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .chain(inst.constants.circle.iter().flat_map(|(v, m)| m.iter().map(move |(k, x)| (format!("{v}/{k}"), *x))))
        .chain(inst.constants.extra_factor.map(|x| ("extra_factor".to_string(), x)))
    {
        if x == 0 {
            c.invariant(format!("constant {what} is zero"));
        }
    }
}

/// Parses and validates an instance file. All errors found are returned.
pub fn parse_instance(text: &str) -> Result<Instance, Vec<ParseError>> {
    let raw: RawInstance = serde_json::from_str(text).map_err(syntax)?;
    from_raw(raw)
}

fn slope2(s: &Slope) -> [i64; 2] {
    [s.p(), s.q()]
}

fn vec_i64(v: &Vector) -> [i64; 2] {
    v.to_i64_pair().map(|(x, y)| [x, y]).expect("instance vectors fit in 64 bits")
}

fn to_raw(inst: &Instance) -> RawInstance {
    let jsj = &inst.jsj;
    RawInstance {
        version: VERSION.into(),
        jsj: RawJsj {
            is_sol: jsj.is_sol,
            trivial_decomposition: jsj.trivial_decomposition,
            pieces: jsj
                .pieces
                .iter()
                .map(|p| RawPiece {
                    id: p.id.clone(),
                    kind: match p.kind {
                        PieceKind::SeifertFibered => RawPieceKind::SeifertFibered,
                        PieceKind::HyperbolicFiniteVolume => RawPieceKind::HyperbolicFiniteVolume,
                        PieceKind::HyperbolicHigherGenus => RawPieceKind::HyperbolicHigherGenus,
                    },
                    boundary: p.boundary.iter().map(|b| RawBoundary { id: b.id.clone(), genus: b.genus }).collect(),
                    fiber_slopes: p.fiber_slopes.iter().map(|(k, s)| (k.clone(), slope2(s))).collect(),
                    degeneracy_slopes: p.degeneracy_slopes.iter().map(|(k, s)| (k.clone(), slope2(s))).collect(),
                })
                .collect(),
            edges: jsj
                .edges
                .iter()
                .map(|e| {
                    let m = e.gluing.matrix();
                    RawEdge {
                        id: e.id.clone(),
                        end_a: RawEdgeEnd { piece: e.end_a.piece.clone(), boundary: e.end_a.boundary.clone() },
                        end_b: RawEdgeEnd { piece: e.end_b.piece.clone(), boundary: e.end_b.boundary.clone() },
                        gluing: [m[0][0], m[0][1], m[1][0], m[1][1]],
                    }
                })
                .collect(),
        },
        phi: RawPhi {
            vertices: inst
                .phi
                .vertices
                .iter()
                .map(|v| RawPhiVertex {
                    id: v.id.clone(),
                    piece: v.piece.clone(),
                    kind: match v.kind {
                        PhiVertexKind::SeifertVirtuallyFibered => RawPhiKind::SeifertVirtuallyFibered,
                        PhiVertexKind::SeifertPartiallyFibered => RawPhiKind::SeifertPartiallyFibered,
                        PhiVertexKind::HypVirtuallyFibered => RawPhiKind::HypVirtuallyFibered,
                    },
                    circles: v
                        .circles
                        .iter()
                        .map(|k| RawCircle {
                            id: k.id.clone(),
                            torus: k.torus.clone(),
                            seifert_intersection: k.seifert_intersection,
                            cusp_degree: k.cusp_degree,
                            core: k.core.as_ref().map(vec_i64),
                        })
                        .collect(),
                })
                .collect(),
            edges: inst
                .phi
                .edges
                .iter()
                .map(|e| RawPhiEdge {
                    id: e.id.clone(),
                    end_a: RawCircleRef { vertex: e.end_a.vertex.clone(), circle: e.end_a.circle.clone() },
                    end_b: RawCircleRef { vertex: e.end_b.vertex.clone(), circle: e.end_b.circle.clone() },
                    jsj_edge: e.jsj_edge.clone(),
                })
                .collect(),
        },
        cover_graph: if inst.cover == CoverGraphSpec::default() {
            None
        } else {
            Some(RawCover {
                vertices: inst
                    .cover
                    .vertices
                    .iter()
                    .map(|v| RawExtraVertex {
                        id: v.id.clone(),
                        piece: v.piece.clone(),
                        kind: match v.kind {
                            CoverVertexKind::HypGeometricallyFinite => RawExtraKind::HypGeometricallyFinite,
                            CoverVertexKind::SeifertCircleBundle => RawExtraKind::SeifertCircleBundle,
                            CoverVertexKind::SeifertPartiallyFibered => RawExtraKind::SeifertPartiallyFibered,
                            CoverVertexKind::FiniteCover => RawExtraKind::FiniteCover,
                            k => unreachable!("{k:?} vertices come from the surface graph"),
                        },
                    })
                    .collect(),
                edges: inst
                    .cover
                    .edges
                    .iter()
                    .map(|e| {
                        let end = |x: &ExtraEnd| RawExtraEnd {
                            vertex: x.vertex.clone(),
                            torus: x.torus.clone(),
                            circle: x.circle.clone(),
                        };
                        RawExtraEdge {
                            id: e.id.clone(),
                            jsj_edge: e.jsj_edge.clone(),
                            end_a: end(&e.end_a),
                            end_b: end(&e.end_b),
                            space: match &e.space {
                                SpaceSpec::Torus { lattice } => RawSpace::Torus {
                                    lattice: lattice.as_ref().map(|l| {
                                        let m = l.matrix();
                                        let i = |x: &BigInt| i64::try_from(x).expect("64-bit subgroup");
                                        [i(&m[0][0]), i(&m[0][1]), i(&m[1][0]), i(&m[1][1])]
                                    }),
                                },
                                SpaceSpec::Cylinder { core } => RawSpace::Cylinder { core: core.as_ref().map(vec_i64) },
                                SpaceSpec::Plane { interior } => RawSpace::Plane { interior: *interior },
                            },
                        }
                    })
                    .collect(),
            })
        },
        constants: if inst.constants == ConstantInput::default() {
            None
        } else {
            Some(RawConstants {
                vertex: inst.constants.vertex.clone(),
                circle: inst.constants.circle.clone(),
                extra_factor: inst.constants.extra_factor,
            })
        },
        subgroup: RawSubgroup { infinite_index: inst.infinite_index },
    }
}

/// Pretty-printed instance text that parses back to the same instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_raw(inst)).expect("serializable");
    s.push('\n');
    s
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&m[k], out);
            }
            out.push('}');
        }
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        x => out.push_str(&x.to_string()),
    }
}

/// Sorted keys, no whitespace.
pub fn canonical_json(text: &str) -> Result<String, Vec<ParseError>> {
    let v: Value = serde_json::from_str(text).map_err(syntax)?;
    let mut out = String::new();
    write_canonical(&v, &mut out);
    Ok(out)
}

/// Hex SHA-256 of the canonical form of an instance text.
pub fn instance_digest(text: &str) -> Result<String, Vec<ParseError>> {
    let canon = canonical_json(text)?;
    Ok(hex::encode(Sha256::digest(canon.as_bytes())))
}

// ---- certificates ----

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateFile {
    pub instance_digest: String,
    pub certificate: CoverCertificate,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertFile {
    version: String,
    instance_digest: String,
    certificate: RawCert,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCert {
    vertices: Vec<RawVertexRecord>,
    edges: Vec<RawEdgeRecord>,
    sheet: RawSheet,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertexRecord {
    vertex: String,
    position: usize,
    exponent: u32,
    parent_edge: Option<String>,
    alpha: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdgeRecord {
    edge: String,
    in_tree: bool,
    a: RawEndRecord,
    b: RawEndRecord,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEndRecord {
    vertex: String,
    shape: RawShape,
    /// Hermite normal form `[a, b, 0, d]`, row-major.
    lattice: [String; 4],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
enum RawShape {
    Torus,
    Cylinder { core: [String; 2], t: [i64; 2], multiplier: String },
    Plane { u: [i64; 2], v: [i64; 2], mu: String, nu: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircleConstant {
    vertex: String,
    circle: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSheet {
    vertex: BTreeMap<String, String>,
    circle: Vec<RawCircleConstant>,
    edge: BTreeMap<String, [String; 2]>,
    extra: String,
    global: String,
}

fn big(s: &str, c: &mut Collect) -> BigInt {
    match s.parse::<BigInt>() {
        Ok(x) => x,
        Err(_) => {
            c.invariant(format!("{s:?} is not an integer"));
            BigInt::from(0)
        }
    }
}

pub fn serialize_certificate(file: &CertificateFile) -> String {
    let cert = &file.certificate;
    let end = |r: &EndRecord| {
        let (a, b, d) = r.lattice.entries();
        RawEndRecord {
            vertex: r.vertex.clone(),
            shape: match &r.shape {
                EndShape::Torus => RawShape::Torus,
                EndShape::Cylinder { core, t, multiplier } => RawShape::Cylinder {
                    core: [core.x.to_string(), core.y.to_string()],
                    t: slope2(t),
                    multiplier: multiplier.to_string(),
                },
                EndShape::Plane { u, v, mu, nu } => {
                    RawShape::Plane { u: slope2(u), v: slope2(v), mu: mu.to_string(), nu: nu.to_string() }
                }
            },
            lattice: [a.to_string(), b.to_string(), "0".into(), d.to_string()],
        }
    };
    let raw = RawCertFile {
        version: VERSION.into(),
        instance_digest: file.instance_digest.clone(),
        certificate: RawCert {
            vertices: cert
                .vertices
                .iter()
                .map(|v| RawVertexRecord {
                    vertex: v.vertex.clone(),
                    position: v.position,
                    exponent: v.exponent,
                    parent_edge: v.parent_edge.clone(),
                    alpha: v.alpha.as_ref().map(|x| x.to_string()),
                })
                .collect(),
            edges: cert
                .edges
                .iter()
                .map(|e| RawEdgeRecord { edge: e.edge.clone(), in_tree: e.in_tree, a: end(&e.a), b: end(&e.b) })
                .collect(),
            sheet: RawSheet {
                vertex: cert.sheet.vertex.iter().map(|(k, x)| (k.clone(), x.to_string())).collect(),
                circle: cert
                    .sheet
                    .circle
                    .iter()
                    .map(|((v, c), x)| RawCircleConstant { vertex: v.clone(), circle: c.clone(), value: x.to_string() })
                    .collect(),
                edge: cert.sheet.edge.iter().map(|(k, (b, b2))| (k.clone(), [b.to_string(), b2.to_string()])).collect(),
                extra: cert.sheet.extra.to_string(),
                global: cert.sheet.global.to_string(),
            },
        },
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_certificate(text: &str) -> Result<CertificateFile, Vec<ParseError>> {
    let raw: RawCertFile = serde_json::from_str(text).map_err(syntax)?;
    let mut c = Collect(Vec::new());
    if raw.version != VERSION {
        c.invariant(format!("unsupported version {:?}, expected \"{VERSION}\"", raw.version));
    }
    let end = |r: RawEndRecord, c: &mut Collect| -> Option<EndRecord> {
        let shape = match r.shape {
            RawShape::Torus => EndShape::Torus,
            RawShape::Cylinder { core, t, multiplier } => EndShape::Cylinder {
                core: Vector::new(big(&core[0], c), big(&core[1], c)),
                t: c.slope(t, "cylinder slope")?,
                multiplier: big(&multiplier, c),
            },
            RawShape::Plane { u, v, mu, nu } => EndShape::Plane {
                u: c.slope(u, "plane slope")?,
                v: c.slope(v, "plane slope")?,
                mu: big(&mu, c),
                nu: big(&nu, c),
            },
        };
        if big(&r.lattice[2], c) != BigInt::from(0) {
            c.invariant(format!("subgroup at {} is not in Hermite normal form", r.vertex));
            return None;
        }
        let lattice = match Lattice::from_hnf(big(&r.lattice[0], c), big(&r.lattice[1], c), big(&r.lattice[3], c)) {
            Ok(l) => l,
            Err(e) => {
                c.invariant(format!("subgroup at {}: {e}", r.vertex));
                return None;
            }
        };
        Some(EndRecord { vertex: r.vertex, shape, lattice })
    };
    let mut edges = Vec::new();
    for e in raw.certificate.edges {
        let (a, b) = (end(e.a, &mut c), end(e.b, &mut c));
        if let (Some(a), Some(b)) = (a, b) {
            edges.push(EdgeRecord { edge: e.edge, in_tree: e.in_tree, a, b });
        }
    }
    let vertices = raw
        .certificate
        .vertices
        .into_iter()
        .map(|v| VertexRecord {
            vertex: v.vertex,
            position: v.position,
            exponent: v.exponent,
            parent_edge: v.parent_edge,
            alpha: v.alpha.map(|x| big(&x, &mut c)),
        })
        .collect();
    let s = raw.certificate.sheet;
    let sheet = ConstantSheet {
        vertex: s.vertex.into_iter().map(|(k, x)| (k, big(&x, &mut c))).collect(),
        circle: s.circle.into_iter().map(|r| ((r.vertex, r.circle), big(&r.value, &mut c))).collect(),
        edge: s.edge.into_iter().map(|(k, [b, b2])| (k, (big(&b, &mut c), big(&b2, &mut c)))).collect(),
        extra: big(&s.extra, &mut c),
        global: big(&s.global, &mut c),
    };
    if c.0.is_empty() {
        Ok(CertificateFile {
            instance_digest: raw.instance_digest,
            certificate: CoverCertificate { vertices, edges, sheet },
        })
    } else {
        Err(c.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
      "version": "1",
      "jsj": {
        "is_sol": false,
        "trivial_decomposition": true,
        "pieces": [{"id": "P", "kind": "hyperbolic_finite_volume", "boundary": []}],
        "edges": []
      },
      "phi": {"vertices": [], "edges": []},
      "subgroup": {"infinite_index": true}
    }"#;

    #[test]
    fn minimal_single_piece() {
        let inst = parse_instance(MINIMAL).unwrap();
        assert!(inst.jsj.validate().is_empty());
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_instance("{\n  \"version\": \"1\",\n  oops\n}").unwrap_err();
        assert!(matches!(e[0], ParseError::Syntax { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replace("\"edges\": []\n      },", "\"edges\": [], \"colour\": 1\n      },");
        assert!(matches!(parse_instance(&text).unwrap_err()[0], ParseError::Syntax { .. }));
    }

    #[test]
    fn digest_ignores_layout() {
        let a = instance_digest(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b = instance_digest("{\"a\":[1,2],\n\"b\":1}").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, instance_digest(r#"{"a":[2,1],"b":1}"#).unwrap());
    }
}
