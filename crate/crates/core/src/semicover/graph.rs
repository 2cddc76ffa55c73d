//! The finite dual graph `G_K` of the compact core, built from the surface
//! graph plus any declared extra vertex and edge spaces.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::jsj::{JsjGraph, PieceKind};
use crate::lattice::{Gluing, Lattice, Slope, Vector};
use crate::phi::{Alignment, PhiGraph, PhiVertexKind};

use super::SemicoverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoverVertexKind {
    HypVirtuallyFibered,
    HypGeometricallyFinite,
    SeifertVirtuallyFibered,
    SeifertPartiallyFibered,
    SeifertCircleBundle,
    FiniteCover,
}

impl CoverVertexKind {
    /// Virtually fibered or partially fibered.
    pub fn is_fibered(self) -> bool {
        matches!(
            self,
            CoverVertexKind::HypVirtuallyFibered
                | CoverVertexKind::SeifertVirtuallyFibered
                | CoverVertexKind::SeifertPartiallyFibered
        )
    }

    pub fn from_phi(k: PhiVertexKind) -> CoverVertexKind {
        match k {
            PhiVertexKind::SeifertVirtuallyFibered => CoverVertexKind::SeifertVirtuallyFibered,
            PhiVertexKind::SeifertPartiallyFibered => CoverVertexKind::SeifertPartiallyFibered,
            PhiVertexKind::HypVirtuallyFibered => CoverVertexKind::HypVirtuallyFibered,
        }
    }

    fn allows(self, space: SpaceKind) -> bool {
        use CoverVertexKind::*;
        match space {
            SpaceKind::Torus => matches!(self, FiniteCover | HypGeometricallyFinite | SeifertCircleBundle),
            SpaceKind::Cylinder => !matches!(self, FiniteCover),
            SpaceKind::Plane => matches!(self, HypGeometricallyFinite | SeifertPartiallyFibered),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpaceKind {
    Torus,
    Cylinder,
    Plane,
}

/// A declared vertex space that is not part of the almost fibered surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtraVertex {
    pub id: String,
    pub piece: String,
    pub kind: CoverVertexKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtraEnd {
    pub vertex: String,
    pub torus: String,
    /// Required on cylinder ends at surface vertices.
    pub circle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceSpec {
    /// Generators of the boundary subgroup in the end-a basis; `None` is the whole torus.
    Torus { lattice: Option<Lattice> },
    /// Core curve in the end-a basis; may be omitted when an end names a circle with a core.
    Cylinder { core: Option<Vector> },
    /// `interior` marks planes that must lie inside the assembled tree.
    Plane { interior: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtraEdge {
    pub id: String,
    pub jsj_edge: String,
    pub end_a: ExtraEnd,
    pub end_b: ExtraEnd,
    pub space: SpaceSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverGraphSpec {
    pub vertices: Vec<ExtraVertex>,
    pub edges: Vec<ExtraEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverVertex {
    pub id: String,
    pub piece: String,
    pub kind: CoverVertexKind,
    pub on_surface: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverEnd {
    pub vertex: String,
    pub torus: String,
    pub circle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    Torus(Lattice),
    Cylinder(Vector),
    Plane { interior: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverEdge {
    pub id: String,
    pub jsj_edge: String,
    pub end_a: CoverEnd,
    pub end_b: CoverEnd,
    /// Data in the end-a basis.
    pub space: Space,
    /// End-a basis to end-b basis.
    pub gluing: Gluing,
    pub on_surface: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl CoverEdge {
    pub fn end(&self, side: Side) -> &CoverEnd {
        match side {
            Side::A => &self.end_a,
            Side::B => &self.end_b,
        }
    }

    /// The core vector in the basis of the given end.
    pub fn core(&self, side: Side) -> Option<Vector> {
        match &self.space {
            Space::Cylinder(c) => Some(match side {
                Side::A => c.clone(),
                Side::B => self.gluing.apply(c),
            }),
            _ => None,
        }
    }

    pub fn torus_lattice(&self, side: Side) -> Option<Lattice> {
        match &self.space {
            Space::Torus(l) => Some(match side {
                Side::A => l.clone(),
                Side::B => crate::lattice::apply_gluing(&self.gluing, l),
            }),
            _ => None,
        }
    }

    /// Maps a slope from one end's basis to the other's.
    pub fn transport(&self, s: &Slope, from: Side) -> Slope {
        let g = match from {
            Side::A => self.gluing,
            Side::B => self.gluing.inverse(),
        };
        g.apply_slope(s).expect("unimodular image of a slope")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverGraph {
    pub vertices: Vec<CoverVertex>,
    pub edges: Vec<CoverEdge>,
}

impl CoverGraph {
    pub fn vertex(&self, id: &str) -> Option<&CoverVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&CoverEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn kind_at(&self, e: &CoverEdge, side: Side) -> CoverVertexKind {
        self.vertex(&e.end(side).vertex).expect("validated endpoint").kind
    }

    /// Connected components, each as a sorted list of vertex ids.
    pub fn components(&self) -> Vec<Vec<String>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(&e.end_a.vertex).or_default().push(&e.end_b.vertex);
            adj.entry(&e.end_b.vertex).or_default().push(&e.end_a.vertex);
        }
        let mut ids: Vec<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        ids.sort();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for id in ids {
            if !seen.insert(id) {
                continue;
            }
            let mut comp = vec![id.to_string()];
            let mut stack = vec![id];
            while let Some(x) = stack.pop() {
                for &y in adj.get(x).map(|v| v.as_slice()).unwrap_or(&[]) {
                    if seen.insert(y) {
                        comp.push(y.to_string());
                        stack.push(y);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }
}

/// Combines the surface graph with the declared extras, checking that every
/// vertex and edge space type is admissible for its neighbours.
pub fn build_cover_graph(
    jsj: &JsjGraph,
    phi: &PhiGraph,
    spec: &CoverGraphSpec,
) -> Result<CoverGraph, SemicoverError> {
    let mut problems = Vec::new();
    let mut graph = CoverGraph::default();
    for v in &phi.vertices {
        graph.vertices.push(CoverVertex {
            id: v.id.clone(),
            piece: v.piece.clone(),
            kind: CoverVertexKind::from_phi(v.kind),
            on_surface: true,
        });
    }
    for v in &spec.vertices {
        if graph.vertex(&v.id).is_some() {
            problems.push(format!("duplicate vertex id {}", v.id));
            continue;
        }
        let Some(piece) = jsj.piece(&v.piece) else {
            problems.push(format!("vertex {} lies over unknown piece {}", v.id, v.piece));
            continue;
        };
        use CoverVertexKind::*;
        let ok = match v.kind {
            HypGeometricallyFinite => piece.kind != PieceKind::SeifertFibered,
            SeifertCircleBundle | SeifertPartiallyFibered => piece.kind == PieceKind::SeifertFibered,
            FiniteCover => true,
            HypVirtuallyFibered | SeifertVirtuallyFibered => false,
        };
        if !ok {
            problems.push(format!("vertex {} has a kind not admissible over piece {}", v.id, v.piece));
        }
        graph.vertices.push(CoverVertex {
            id: v.id.clone(),
            piece: v.piece.clone(),
            kind: v.kind,
            on_surface: false,
        });
    }

    let mut used_circles = BTreeSet::new();
    for e in &phi.edges {
        used_circles.insert((e.end_a.vertex.clone(), e.end_a.circle.clone()));
        used_circles.insert((e.end_b.vertex.clone(), e.end_b.circle.clone()));
        let (Some(ca), Some(cb), Some(je)) =
            (phi.circle(&e.end_a), phi.circle(&e.end_b), jsj.edge(&e.jsj_edge))
        else {
            problems.push(format!("surface edge {} is not resolvable", e.id));
            continue;
        };
        let gluing = match phi.alignment(e, jsj) {
            Some(Alignment::Aligned) => je.gluing,
            Some(Alignment::Flipped) => je.gluing.inverse(),
            None => {
                problems.push(format!("surface edge {} does not lie over {}", e.id, je.id));
                continue;
            }
        };
        let core = match (&ca.core, &cb.core) {
            (Some(k), _) => k.clone(),
            (None, Some(k)) => gluing.inverse().apply(k),
            (None, None) => return Err(SemicoverError::MissingCore(e.id.clone())),
        };
        graph.edges.push(CoverEdge {
            id: e.id.clone(),
            jsj_edge: e.jsj_edge.clone(),
            end_a: CoverEnd {
                vertex: e.end_a.vertex.clone(),
                torus: ca.torus.clone(),
                circle: Some(e.end_a.circle.clone()),
            },
            end_b: CoverEnd {
                vertex: e.end_b.vertex.clone(),
                torus: cb.torus.clone(),
                circle: Some(e.end_b.circle.clone()),
            },
            space: Space::Cylinder(core),
            gluing,
            on_surface: true,
        });
    }

    for e in &spec.edges {
        if graph.edge(&e.id).is_some() {
            problems.push(format!("duplicate edge id {}", e.id));
            continue;
        }
        let Some(je) = jsj.edge(&e.jsj_edge) else {
            problems.push(format!("edge {} lies over unknown decomposition edge {}", e.id, e.jsj_edge));
            continue;
        };
        let (Some(va), Some(vb)) = (graph.vertex(&e.end_a.vertex), graph.vertex(&e.end_b.vertex)) else {
            problems.push(format!("edge {} has an unknown endpoint", e.id));
            continue;
        };
        let sides = |end: &ExtraEnd, v: &CoverVertex| (v.piece.clone(), end.torus.clone());
        let (sa, sb) = (sides(&e.end_a, va), sides(&e.end_b, vb));
        let ja = (je.end_a.piece.clone(), je.end_a.boundary.clone());
        let jb = (je.end_b.piece.clone(), je.end_b.boundary.clone());
        let gluing = if sa == ja && sb == jb {
            je.gluing
        } else if sa == jb && sb == ja {
            je.gluing.inverse()
        } else {
            problems.push(format!("edge {} does not lie over {}", e.id, je.id));
            continue;
        };
        let kind = match e.space {
            SpaceSpec::Torus { .. } => SpaceKind::Torus,
            SpaceSpec::Cylinder { .. } => SpaceKind::Cylinder,
            SpaceSpec::Plane { .. } => SpaceKind::Plane,
        };
        if !va.kind.allows(kind) || !vb.kind.allows(kind) {
            problems.push(format!("edge {} has a space type not admissible for its endpoints", e.id));
            continue;
        }
        if kind == SpaceKind::Cylinder && va.on_surface && vb.on_surface {
            problems.push(format!(
                "cylinder {} joins two surface vertices and must be a surface edge",
                e.id
            ));
            continue;
        }
        // circle references and the cores they carry
        let mut cores = Vec::new();
        for (end, v, side) in [(&e.end_a, va, Side::A), (&e.end_b, vb, Side::B)] {
            match (&end.circle, kind == SpaceKind::Cylinder && v.on_surface) {
                (None, false) => {}
                (Some(c), true) => {
                    let circle = phi.vertex(&v.id).and_then(|pv| pv.circle(c));
                    match circle {
                        None => problems.push(format!("edge {} references unknown circle {}/{}", e.id, v.id, c)),
                        Some(circle) => {
                            if circle.torus != end.torus {
                                problems.push(format!("edge {} circle {}/{} is not over {}", e.id, v.id, c, end.torus));
                            }
                            if !used_circles.insert((v.id.clone(), c.clone())) {
                                problems.push(format!("circle {}/{} is an endpoint of more than one edge", v.id, c));
                            }
                            if let Some(k) = &circle.core {
                                cores.push((side, k.clone()));
                            }
                        }
                    }
                }
                (None, true) => problems.push(format!("edge {} must name a circle at {}", e.id, v.id)),
                (Some(_), false) => problems.push(format!("edge {} names a circle at {} where none belongs", e.id, v.id)),
            }
        }
        let space = match &e.space {
            SpaceSpec::Torus { lattice } => Space::Torus(lattice.clone().unwrap_or_else(Lattice::full)),
            SpaceSpec::Plane { interior } => Space::Plane { interior: *interior },
            SpaceSpec::Cylinder { core } => {
                let in_a = |(side, k): &(Side, Vector)| match side {
                    Side::A => k.clone(),
                    Side::B => gluing.inverse().apply(k),
                };
                let mut candidates: Vec<Vector> = core.iter().cloned().collect();
                candidates.extend(cores.iter().map(in_a));
                let Some(first) = candidates.first().cloned() else {
                    return Err(SemicoverError::MissingCore(e.id.clone()));
                };
                if first.is_zero() {
                    problems.push(format!("edge {} has a zero core", e.id));
                }
                if candidates.iter().any(|k| *k != first && k.neg() != first) {
                    problems.push(format!("edge {} has inconsistent cores", e.id));
                }
                Space::Cylinder(first)
            }
        };
        graph.edges.push(CoverEdge {
            id: e.id.clone(),
            jsj_edge: e.jsj_edge.clone(),
            end_a: CoverEnd { vertex: va.id.clone(), torus: e.end_a.torus.clone(), circle: e.end_a.circle.clone() },
            end_b: CoverEnd { vertex: vb.id.clone(), torus: e.end_b.torus.clone(), circle: e.end_b.circle.clone() },
            space,
            gluing,
            on_surface: false,
        });
    }

    // circle bundles meet cylinders along multiples of the fiber
    for e in &graph.edges {
        for side in [Side::A, Side::B] {
            let v = graph.vertex(&e.end(side).vertex).expect("checked");
            if v.kind != CoverVertexKind::SeifertCircleBundle {
                continue;
            }
            if let (Some(core), Some(h)) = (
                e.core(side),
                jsj.piece(&v.piece).and_then(|p| p.fiber_slopes.get(&e.end(side).torus)),
            ) {
                if !core.det(&h.vector()).is_zero() {
                    problems.push(format!("edge {} core is not a multiple of the fiber of {}", e.id, v.id));
                }
            }
        }
    }

    if problems.is_empty() {
        Ok(graph)
    } else {
        Err(SemicoverError::InvalidCoverGraph(problems))
    }
}
