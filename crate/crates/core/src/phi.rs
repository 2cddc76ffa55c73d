//! The dual graph of the almost fibered surface and its spirality character.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use thiserror::Error;

use crate::jsj::{JsjGraph, PieceKind};
use crate::lattice::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhiVertexKind {
    SeifertVirtuallyFibered,
    SeifertPartiallyFibered,
    HypVirtuallyFibered,
}

impl PhiVertexKind {
    pub fn is_seifert(self) -> bool {
        !matches!(self, PhiVertexKind::HypVirtuallyFibered)
    }

    pub fn is_virtually_fibered(self) -> bool {
        !matches!(self, PhiVertexKind::SeifertPartiallyFibered)
    }
}

/// A boundary circle of a vertex surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circle {
    pub id: String,
    /// Boundary torus of the underlying piece that the circle lies over.
    pub torus: String,
    /// `<c, h>` for Seifert vertices.
    pub seifert_intersection: Option<u64>,
    /// `[T^ : T]` for hyperbolic vertices.
    pub cusp_degree: Option<u64>,
    /// Image of the circle in the torus homology, when known.
    pub core: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiVertex {
    pub id: String,
    pub piece: String,
    pub kind: PhiVertexKind,
    pub circles: Vec<Circle>,
}

impl PhiVertex {
    pub fn circle(&self, id: &str) -> Option<&Circle> {
        self.circles.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircleRef {
    pub vertex: String,
    pub circle: String,
}

impl CircleRef {
    pub fn new(vertex: &str, circle: &str) -> CircleRef {
        CircleRef { vertex: vertex.into(), circle: circle.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiEdge {
    pub id: String,
    pub end_a: CircleRef,
    pub end_b: CircleRef,
    pub jsj_edge: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhiGraph {
    pub vertices: Vec<PhiVertex>,
    pub edges: Vec<PhiEdge>,
}

/// An edge traversed in a direction; forward runs from `end_a` to `end_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: String,
    pub forward: bool,
}

impl Step {
    pub fn fwd(edge: &str) -> Step {
        Step { edge: edge.into(), forward: true }
    }

    pub fn rev(edge: &str) -> Step {
        Step { edge: edge.into(), forward: false }
    }

    pub fn reversed(&self) -> Step {
        Step { edge: self.edge.clone(), forward: !self.forward }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.forward {
            write!(f, "{}", self.edge)
        } else {
            write!(f, "-{}", self.edge)
        }
    }
}

pub fn format_cycle(cycle: &[Step]) -> String {
    let parts: Vec<String> = cycle.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn reverse_cycle(cycle: &[Step]) -> Vec<Step> {
    cycle.iter().rev().map(Step::reversed).collect()
}

/// An exact positive rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpiralityValue(BigRational);

impl SpiralityValue {
    pub fn one() -> Self {
        SpiralityValue(BigRational::one())
    }

    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let r = BigRational::new(num.into(), den.into());
        assert!(r.is_positive(), "spirality values are positive");
        SpiralityValue(r)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn inverse(&self) -> Self {
        SpiralityValue(self.0.recip())
    }

    pub fn pow(&self, e: i32) -> Self {
        SpiralityValue(Pow::pow(&self.0, e))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }
}

impl Mul for SpiralityValue {
    type Output = SpiralityValue;
    fn mul(self, rhs: SpiralityValue) -> SpiralityValue {
        SpiralityValue(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a SpiralityValue> for &'a SpiralityValue {
    type Output = SpiralityValue;
    fn mul(self, rhs: &SpiralityValue) -> SpiralityValue {
        SpiralityValue(&self.0 * &rhs.0)
    }
}

impl fmt::Display for SpiralityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub chord: String,
    pub cycle: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Aspirality {
    Aspiral,
    Spiral { cycle: Vec<Step>, value: SpiralityValue },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separability {
    Separable,
    NotSeparable { cycle: Vec<Step>, value: SpiralityValue },
}

impl fmt::Display for Separability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separability::Separable => write!(f, "Separable"),
            Separability::NotSeparable { cycle, value } => {
                write!(f, "NotSeparable cycle={} value={}", format_cycle(cycle), value)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhiViolation {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(String),
    #[error("vertex {0} has duplicate circle id {1}")]
    DuplicateCircle(String, String),
    #[error("vertex {0} lies over unknown piece {1}")]
    UnknownPiece(String, String),
    #[error("vertex {0} has a kind that does not match its piece")]
    KindMismatch(String),
    #[error("circle {0}/{1} lies over {2}, which is not a torus of the piece")]
    UnknownTorus(String, String, String),
    #[error("vertex {0} has two circles over torus {1}")]
    SharedTorus(String, String),
    #[error("virtually fibered vertex {0} has no circle over torus {1}")]
    MissingCircle(String, String),
    #[error("circle {0}/{1} lacks the data its vertex kind requires")]
    MissingData(String, String),
    #[error("circle {0}/{1} carries zero intersection or degree data")]
    ZeroData(String, String),
    #[error("circle {0}/{1} has a zero core")]
    ZeroCore(String, String),
    #[error("circle {0}/{1} core does not meet the fiber in the stated number of points")]
    CoreIntersectionMismatch(String, String),
    #[error("vertex {0} has fiber intersections and cusp degrees that are not proportional")]
    MixedInconsistent(String),
    #[error("edge {0} references unknown circle {1}/{2}")]
    UnknownEnd(String, String, String),
    #[error("circle {0}/{1} is an endpoint of more than one edge")]
    CircleReused(String, String),
    #[error("edge {0} joins a circle to itself")]
    Degenerate(String),
    #[error("edge {0} lies over unknown decomposition edge {1}")]
    UnknownJsjEdge(String, String),
    #[error("edge {0} endpoints do not lie over the two sides of {1}")]
    JsjMismatch(String, String),
    #[error("edge {0} endpoint cores are not identified by the gluing")]
    CoreGluingMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhiError {
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown circle {0}/{1}")]
    UnknownCircle(String, String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("edge sequence is not a closed path")]
    NotAClosedPath,
    #[error("circle data missing on vertex {0}")]
    MissingData(String),
    #[error("not a covering: {0}")]
    NotACovering(String),
    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),
    #[error("invalid surface graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<PhiViolation>),
}

/// Orientation of a surface edge relative to the decomposition edge it lies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// `end_a` lies over the decomposition edge's `end_a`.
    Aligned,
    Flipped,
}

impl PhiGraph {
    pub fn vertex(&self, id: &str) -> Option<&PhiVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&PhiEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn circle(&self, r: &CircleRef) -> Option<&Circle> {
        self.vertex(&r.vertex).and_then(|v| v.circle(&r.circle))
    }

    /// Structural checks that do not need the decomposition graph.
    pub fn validate_standalone(&self) -> Vec<PhiViolation> {
        let mut out = Vec::new();
        let mut vids = BTreeSet::new();
        for v in &self.vertices {
            if !vids.insert(v.id.as_str()) {
                out.push(PhiViolation::DuplicateVertex(v.id.clone()));
            }
            let mut cids = BTreeSet::new();
            for c in &v.circles {
                if !cids.insert(c.id.as_str()) {
                    out.push(PhiViolation::DuplicateCircle(v.id.clone(), c.id.clone()));
                }
                let datum = if v.kind.is_seifert() { c.seifert_intersection } else { c.cusp_degree };
                if datum.is_none() {
                    out.push(PhiViolation::MissingData(v.id.clone(), c.id.clone()));
                }
                if c.seifert_intersection == Some(0) || c.cusp_degree == Some(0) {
                    out.push(PhiViolation::ZeroData(v.id.clone(), c.id.clone()));
                }
                if c.core.as_ref().is_some_and(|k| k.is_zero()) {
                    out.push(PhiViolation::ZeroCore(v.id.clone(), c.id.clone()));
                }
            }
            if v.kind == PhiVertexKind::SeifertVirtuallyFibered
                && check_mixed_definition(v) == Ok(false)
            {
                out.push(PhiViolation::MixedInconsistent(v.id.clone()));
            }
        }
        let mut eids = BTreeSet::new();
        let mut used = BTreeMap::new();
        for e in &self.edges {
            if !eids.insert(e.id.as_str()) {
                out.push(PhiViolation::DuplicateEdge(e.id.clone()));
            }
            if e.end_a == e.end_b {
                out.push(PhiViolation::Degenerate(e.id.clone()));
            }
            for end in [&e.end_a, &e.end_b] {
                if self.circle(end).is_none() {
                    out.push(PhiViolation::UnknownEnd(
                        e.id.clone(),
                        end.vertex.clone(),
                        end.circle.clone(),
                    ));
                } else {
                    *used.entry(end.clone()).or_insert(0usize) += 1;
                }
            }
        }
        for (end, n) in used {
            if n > 1 {
                out.push(PhiViolation::CircleReused(end.vertex, end.circle));
            }
        }
        out
    }

    /// Full validation against the decomposition graph the surface lies over.
    pub fn validate_against(&self, jsj: &JsjGraph) -> Vec<PhiViolation> {
        let mut out = self.validate_standalone();
        for v in &self.vertices {
            let Some(piece) = jsj.piece(&v.piece) else {
                out.push(PhiViolation::UnknownPiece(v.id.clone(), v.piece.clone()));
                continue;
            };
            let expected = if v.kind.is_seifert() {
                PieceKind::SeifertFibered
            } else {
                PieceKind::HyperbolicFiniteVolume
            };
            if piece.kind != expected {
                out.push(PhiViolation::KindMismatch(v.id.clone()));
            }
            let mut tori = BTreeSet::new();
            for c in &v.circles {
                if !piece.boundary(&c.torus).is_some_and(|b| b.genus == 1) {
                    out.push(PhiViolation::UnknownTorus(v.id.clone(), c.id.clone(), c.torus.clone()));
                    continue;
                }
                if !tori.insert(c.torus.as_str()) {
                    out.push(PhiViolation::SharedTorus(v.id.clone(), c.torus.clone()));
                }
                if let (Some(core), Some(h), true) =
                    (&c.core, piece.fiber_slopes.get(&c.torus), v.kind.is_seifert())
                {
                    let meet = core.det(&h.vector()).abs();
                    if c.seifert_intersection.is_some_and(|i| BigInt::from(i) != meet) {
                        out.push(PhiViolation::CoreIntersectionMismatch(
                            v.id.clone(),
                            c.id.clone(),
                        ));
                    }
                }
            }
            if v.kind.is_virtually_fibered() {
                for t in piece.tori() {
                    if !tori.contains(t.id.as_str()) {
                        out.push(PhiViolation::MissingCircle(v.id.clone(), t.id.clone()));
                    }
                }
            }
        }
        for e in &self.edges {
            let Some(je) = jsj.edge(&e.jsj_edge) else {
                out.push(PhiViolation::UnknownJsjEdge(e.id.clone(), e.jsj_edge.clone()));
                continue;
            };
            let (Some(ca), Some(cb)) = (self.circle(&e.end_a), self.circle(&e.end_b)) else {
                continue;
            };
            let Some(alignment) = self.alignment(e, jsj) else {
                out.push(PhiViolation::JsjMismatch(e.id.clone(), e.jsj_edge.clone()));
                continue;
            };
            if let (Some(ka), Some(kb)) = (&ca.core, &cb.core) {
                let g = match alignment {
                    Alignment::Aligned => je.gluing,
                    Alignment::Flipped => je.gluing.inverse(),
                };
                let image = g.apply(ka);
                if image != *kb && image.neg() != *kb {
                    out.push(PhiViolation::CoreGluingMismatch(e.id.clone()));
                }
            }
        }
        out
    }

    /// How a surface edge sits over its decomposition edge, if it does.
    pub fn alignment(&self, e: &PhiEdge, jsj: &JsjGraph) -> Option<Alignment> {
        let je = jsj.edge(&e.jsj_edge)?;
        let side = |r: &CircleRef| -> Option<(String, String)> {
            let v = self.vertex(&r.vertex)?;
            let c = v.circle(&r.circle)?;
            Some((v.piece.clone(), c.torus.clone()))
        };
        let (a, b) = (side(&e.end_a)?, side(&e.end_b)?);
        let ja = (je.end_a.piece.clone(), je.end_a.boundary.clone());
        let jb = (je.end_b.piece.clone(), je.end_b.boundary.clone());
        if a == ja && b == jb {
            Some(Alignment::Aligned)
        } else if a == jb && b == ja {
            Some(Alignment::Flipped)
        } else {
            None
        }
    }

    fn endpoints(&self, step: &Step) -> Result<(&CircleRef, &CircleRef), PhiError> {
        let e = self.edge(&step.edge).ok_or_else(|| PhiError::UnknownEdge(step.edge.clone()))?;
        Ok(if step.forward { (&e.end_a, &e.end_b) } else { (&e.end_b, &e.end_a) })
    }
}

fn circle_weight(v: &PhiVertex, c: &Circle) -> Option<u64> {
    if v.kind.is_seifert() {
        c.seifert_intersection
    } else {
        c.cusp_degree
    }
}

/// The ratio attached to a path in vertex `v` from `c_ini` to `c_ter`.
pub fn s_delta(phi: &PhiGraph, v: &str, c_ini: &str, c_ter: &str) -> Result<SpiralityValue, PhiError> {
    let vertex = phi.vertex(v).ok_or_else(|| PhiError::UnknownVertex(v.into()))?;
    let weight = |c: &str| -> Result<u64, PhiError> {
        let circle =
            vertex.circle(c).ok_or_else(|| PhiError::UnknownCircle(v.into(), c.into()))?;
        match circle_weight(vertex, circle) {
            Some(w) if w > 0 => Ok(w),
            _ => Err(PhiError::MissingData(v.into())),
        }
    };
    Ok(SpiralityValue::ratio(weight(c_ini)?, weight(c_ter)?))
}

/// Product of the per-vertex ratios along a closed edge path.
pub fn spirality_on_cycle(phi: &PhiGraph, cycle: &[Step]) -> Result<SpiralityValue, PhiError> {
    let mut value = SpiralityValue::one();
    for (i, step) in cycle.iter().enumerate() {
        let next = &cycle[(i + 1) % cycle.len()];
        let (_, head) = phi.endpoints(step)?;
        let (tail, _) = phi.endpoints(next)?;
        if head.vertex != tail.vertex {
            return Err(PhiError::NotAClosedPath);
        }
        value = value * s_delta(phi, &head.vertex, &head.circle, &tail.circle)?;
    }
    Ok(value)
}

/// Fundamental cycles of the spanning forest grown from edges sorted by id.
pub fn cycle_basis(phi: &PhiGraph) -> Vec<FundamentalCycle> {
    let mut order: Vec<&str> = phi.edges.iter().map(|e| e.id.as_str()).collect();
    order.sort();
    cycle_basis_with_order(phi, &order)
}

/// Fundamental cycles of the spanning forest grown greedily in `order`.
///
/// Edges missing from `order` are considered after it, sorted by id. Each
/// cycle is the forest path from the chord's `end_b` vertex to its `end_a`
/// vertex followed by the chord itself; chords are listed by id.
pub fn cycle_basis_with_order(phi: &PhiGraph, order: &[&str]) -> Vec<FundamentalCycle> {
    let forest = Forest::grow(phi, order);
    let mut chords: Vec<&PhiEdge> =
        phi.edges.iter().filter(|e| !forest.tree_edges.contains(e.id.as_str())).collect();
    chords.sort_by(|x, y| x.id.cmp(&y.id));
    chords
        .into_iter()
        .map(|e| {
            let mut cycle = forest.path(&e.end_b.vertex, &e.end_a.vertex);
            cycle.push(Step::fwd(&e.id));
            FundamentalCycle { chord: e.id.clone(), cycle }
        })
        .collect()
}

/// A rooted spanning forest of the surface graph.
pub struct Forest<'a> {
    pub tree_edges: BTreeSet<&'a str>,
    parent: BTreeMap<&'a str, Option<(&'a str, Step)>>,
    depth: BTreeMap<&'a str, usize>,
}

impl<'a> Forest<'a> {
    pub fn grow(phi: &'a PhiGraph, order: &[&str]) -> Forest<'a> {
        let mut rest: Vec<&str> =
            phi.edges.iter().map(|e| e.id.as_str()).filter(|id| !order.contains(id)).collect();
        rest.sort();
        let mut uf: BTreeMap<&str, &str> =
            phi.vertices.iter().map(|v| (v.id.as_str(), v.id.as_str())).collect();
        fn find<'b>(uf: &mut BTreeMap<&'b str, &'b str>, x: &'b str) -> &'b str {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            uf.insert(x, r);
            r
        }
        let mut tree_edges = BTreeSet::new();
        let mut adj: BTreeMap<&str, Vec<(&str, Step)>> = BTreeMap::new();
        for id in order.iter().copied().chain(rest) {
            let Some(e) = phi.edge(id) else { continue };
            let (a, b) = (e.end_a.vertex.as_str(), e.end_b.vertex.as_str());
            if !uf.contains_key(a) || !uf.contains_key(b) {
                continue;
            }
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra != rb {
                uf.insert(ra, rb);
                tree_edges.insert(e.id.as_str());
                adj.entry(a).or_default().push((b, Step::fwd(&e.id)));
                adj.entry(b).or_default().push((a, Step::rev(&e.id)));
            }
        }
        let mut parent = BTreeMap::new();
        let mut depth = BTreeMap::new();
        let mut roots: Vec<&str> = phi.vertices.iter().map(|v| v.id.as_str()).collect();
        roots.sort();
        for root in roots {
            if parent.contains_key(root) {
                continue;
            }
            parent.insert(root, None);
            depth.insert(root, 0);
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                for (y, step) in adj.get(x).cloned().unwrap_or_default() {
                    if !parent.contains_key(y) {
                        // the step runs x -> y; store the step y -> x
                        parent.insert(y, Some((x, step.reversed())));
                        depth.insert(y, depth[x] + 1);
                        queue.push_back(y);
                    }
                }
            }
        }
        Forest { tree_edges, parent, depth }
    }

    /// The forest path from `from` to `to`, which must share a component.
    pub fn path(&self, from: &str, to: &str) -> Vec<Step> {
        let (mut x, mut y) = (from, to);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[x] > self.depth[y] {
            let (p, s) = self.parent[x].clone().expect("non-root");
            up.push(s);
            x = p;
        }
        while self.depth[y] > self.depth[x] {
            let (p, s) = self.parent[y].clone().expect("non-root");
            down.push(s.reversed());
            y = p;
        }
        while x != y {
            let (px, sx) = self.parent[x].clone().expect("same component");
            let (py, sy) = self.parent[y].clone().expect("same component");
            up.push(sx);
            down.push(sy.reversed());
            x = px;
            y = py;
        }
        down.reverse();
        up.extend(down);
        up
    }

    pub fn same_component(&self, a: &str, b: &str) -> bool {
        match (self.root(a), self.root(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    fn root(&self, x: &str) -> Option<&'a str> {
        let mut cur: &'a str = self.parent.get_key_value(x)?.0;
        while let Some(Some((p, _))) = self.parent.get(cur) {
            cur = p;
        }
        Some(cur)
    }
}

pub fn is_aspiral(phi: &PhiGraph) -> Result<Aspirality, PhiError> {
    is_aspiral_with_order(phi, &[])
}

pub fn is_aspiral_with_order(phi: &PhiGraph, order: &[&str]) -> Result<Aspirality, PhiError> {
    for fc in cycle_basis_with_order(phi, order) {
        let value = spirality_on_cycle(phi, &fc.cycle)?;
        if !value.is_one() {
            return Ok(Aspirality::Spiral { cycle: fc.cycle, value });
        }
    }
    Ok(Aspirality::Aspiral)
}

/// Whether fiber intersections and cusp degrees give the same ratios on a
/// Seifert virtually fibered vertex.
pub fn check_mixed_definition(v: &PhiVertex) -> Result<bool, PhiError> {
    let mut pairs = Vec::new();
    for c in &v.circles {
        match (c.seifert_intersection, c.cusp_degree) {
            (Some(i), Some(d)) => pairs.push((i as u128, d as u128)),
            _ => return Err(PhiError::MissingData(v.id.clone())),
        }
    }
    Ok(pairs.windows(2).all(|w| w[0].0 * w[1].1 == w[1].0 * w[0].1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCircle {
    pub id: String,
    pub base: String,
    /// `[c_bar : c]`
    pub degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedVertex {
    pub id: String,
    pub base: String,
    pub circles: Vec<LiftedCircle>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedEdge {
    pub id: String,
    pub base: String,
    pub end_a: CircleRef,
    pub end_b: CircleRef,
}

/// A finite cover of a surface graph, given combinatorially.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhiCover {
    pub vertices: Vec<LiftedVertex>,
    pub edges: Vec<LiftedEdge>,
}

impl PhiCover {
    fn vertex(&self, id: &str) -> Option<&LiftedVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    fn lifted_circle(&self, r: &CircleRef) -> Option<&LiftedCircle> {
        self.vertex(&r.vertex)?.circles.iter().find(|c| c.id == r.circle)
    }

    /// Lifts a closed path starting at a lifted vertex, repeating it until the
    /// lift closes up. Returns the lifted path and the number of repetitions.
    pub fn lift_closed_path(
        &self,
        base: &PhiGraph,
        cycle: &[Step],
        start: &str,
    ) -> Result<(Vec<Step>, usize), PhiError> {
        if cycle.is_empty() {
            return Ok((Vec::new(), 1));
        }
        let mut lifted = Vec::new();
        let mut at = start.to_string();
        for winding in 1..=self.vertices.len().max(1) {
            for step in cycle {
                let (tail, _) = base.endpoints(step)?;
                let found = self.edges.iter().find(|le| {
                    let lt = if step.forward { &le.end_a } else { &le.end_b };
                    le.base == step.edge
                        && lt.vertex == at
                        && self.lifted_circle(lt).is_some_and(|c| c.base == tail.circle)
                });
                let le = found.ok_or_else(|| {
                    PhiError::NotACovering(format!("no lift of {} at {}", step.edge, at))
                })?;
                at = if step.forward { le.end_b.vertex.clone() } else { le.end_a.vertex.clone() };
                lifted.push(Step { edge: le.id.clone(), forward: step.forward });
            }
            if at == start {
                return Ok((lifted, winding));
            }
        }
        Err(PhiError::NotACovering("lifted path does not close".into()))
    }
}

/// The surface graph of a finite cover, with circle data scaled by the
/// circle covering degrees.
pub fn lift_phi(phi: &PhiGraph, cover: &PhiCover) -> Result<PhiGraph, PhiError> {
    let bad = |m: String| PhiError::NotACovering(m);
    let mut sheets: BTreeMap<&str, u64> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut seen = BTreeSet::new();
    for lv in &cover.vertices {
        if !seen.insert(lv.id.as_str()) {
            return Err(bad(format!("duplicate lifted vertex {}", lv.id)));
        }
        let bv = phi.vertex(&lv.base).ok_or_else(|| bad(format!("unknown base vertex {}", lv.base)))?;
        let mut per_circle: BTreeMap<&str, u64> = BTreeMap::new();
        let mut circles = Vec::new();
        let mut cids = BTreeSet::new();
        for lc in &lv.circles {
            if !cids.insert(lc.id.as_str()) {
                return Err(bad(format!("duplicate lifted circle {}/{}", lv.id, lc.id)));
            }
            let bc = bv
                .circle(&lc.base)
                .ok_or_else(|| bad(format!("unknown base circle {}/{}", bv.id, lc.base)))?;
            if lc.degree == 0 {
                return Err(bad(format!("zero degree on {}/{}", lv.id, lc.id)));
            }
            *per_circle.entry(bc.id.as_str()).or_default() += lc.degree;
            let k = BigInt::from(lc.degree);
            circles.push(Circle {
                id: lc.id.clone(),
                torus: bc.torus.clone(),
                seifert_intersection: bc.seifert_intersection.map(|x| x * lc.degree),
                cusp_degree: bc.cusp_degree.map(|x| x * lc.degree),
                core: bc.core.as_ref().map(|v| v.scale(&k)),
            });
        }
        let degrees: BTreeSet<u64> =
            bv.circles.iter().map(|c| per_circle.get(c.id.as_str()).copied().unwrap_or(0)).collect();
        if degrees.len() > 1 || degrees.contains(&0) {
            return Err(bad(format!("circles of {} are not evenly covered", lv.id)));
        }
        let d = degrees.into_iter().next().unwrap_or(1);
        *sheets.entry(bv.id.as_str()).or_default() += d;
        vertices.push(PhiVertex { id: lv.id.clone(), piece: bv.piece.clone(), kind: bv.kind, circles });
    }
    let total: BTreeSet<u64> =
        phi.vertices.iter().map(|v| sheets.get(v.id.as_str()).copied().unwrap_or(0)).collect();
    if total.len() > 1 || total.contains(&0) {
        return Err(bad("fibers over vertices have different sizes".into()));
    }

    let mut edges = Vec::new();
    let mut used: BTreeMap<CircleRef, &str> = BTreeMap::new();
    let mut eids = BTreeSet::new();
    for le in &cover.edges {
        if !eids.insert(le.id.as_str()) {
            return Err(bad(format!("duplicate lifted edge {}", le.id)));
        }
        let be = phi.edge(&le.base).ok_or_else(|| bad(format!("unknown base edge {}", le.base)))?;
        let mut degree = None;
        for (lend, bend) in [(&le.end_a, &be.end_a), (&le.end_b, &be.end_b)] {
            let lv = cover.vertex(&lend.vertex).ok_or_else(|| bad(format!("unknown vertex {}", lend.vertex)))?;
            let lc = cover
                .lifted_circle(lend)
                .ok_or_else(|| bad(format!("unknown circle {}/{}", lend.vertex, lend.circle)))?;
            if lv.base != bend.vertex || lc.base != bend.circle {
                return Err(bad(format!("edge {} endpoints do not cover {}", le.id, be.id)));
            }
            if degree.is_some_and(|d| d != lc.degree) {
                return Err(bad(format!("edge {} joins circles of different degrees", le.id)));
            }
            degree = Some(lc.degree);
            if used.insert(lend.clone(), &le.id).is_some() {
                return Err(bad(format!("circle {}/{} used twice", lend.vertex, lend.circle)));
            }
        }
        edges.push(PhiEdge {
            id: le.id.clone(),
            end_a: le.end_a.clone(),
            end_b: le.end_b.clone(),
            jsj_edge: be.jsj_edge.clone(),
        });
    }
    let attached: BTreeSet<CircleRef> =
        phi.edges.iter().flat_map(|e| [e.end_a.clone(), e.end_b.clone()]).collect();
    for lv in &cover.vertices {
        for lc in &lv.circles {
            let base_attached = attached.contains(&CircleRef::new(&lv.base, &lc.base));
            let lifted_attached = used.contains_key(&CircleRef::new(&lv.id, &lc.id));
            if base_attached != lifted_attached {
                return Err(bad(format!("circle {}/{} is not lifted consistently", lv.id, lc.id)));
            }
        }
    }
    Ok(PhiGraph { vertices, edges })
}

/// Decides separability of an infinite-index subgroup in a manifold with
/// nontrivial torus decomposition that is not a Sol manifold.
pub fn separability_verdict(
    jsj: &JsjGraph,
    phi: &PhiGraph,
    infinite_index: bool,
) -> Result<Separability, PhiError> {
    if jsj.trivial_decomposition {
        return Err(PhiError::HypothesesViolated("the torus decomposition is trivial".into()));
    }
    if jsj.is_sol {
        return Err(PhiError::HypothesesViolated("the manifold is a Sol manifold".into()));
    }
    if !infinite_index {
        return Err(PhiError::HypothesesViolated("the subgroup has finite index".into()));
    }
    let violations = phi.validate_against(jsj);
    if !violations.is_empty() {
        return Err(PhiError::Invalid(violations));
    }
    Ok(match is_aspiral(phi)? {
        Aspirality::Aspiral => Separability::Separable,
        Aspirality::Spiral { cycle, value } => Separability::NotSeparable { cycle, value },
    })
}
