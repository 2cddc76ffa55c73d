//! Random surface graphs, covers and full instances for property tests and
//! benchmarks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;
use crate::jsj::{BoundaryComponent, Edge, EdgeEnd, JsjGraph, Piece, PieceKind};
use crate::lattice::{Gluing, Lattice, Slope, Vector};
use crate::phi::{Circle, CircleRef, LiftedCircle, LiftedEdge, LiftedVertex, PhiCover, PhiEdge, PhiGraph, PhiVertex, PhiVertexKind, Step};
use crate::semicover::{ConstantInput, CoverGraphSpec, CoverVertexKind, ExtraEdge, ExtraEnd, ExtraVertex, SpaceSpec};

const PHI_KINDS: [PhiVertexKind; 3] = [
    PhiVertexKind::SeifertVirtuallyFibered,
    PhiVertexKind::SeifertPartiallyFibered,
    PhiVertexKind::HypVirtuallyFibered,
];

fn weighted_circle(kind: PhiVertexKind, id: String, w: u64) -> Circle {
    let (si, cd) = if kind.is_seifert() { (Some(w), None) } else { (None, Some(w)) };
    Circle { id: id.clone(), torus: format!("T{id}"), seifert_intersection: si, cusp_degree: cd, core: None }
}

/// A surface graph with no underlying decomposition: random kinds, random
/// weights in `1..=6`, loops and parallel edges allowed. With `connected`
/// the graph is connected and has at least one cycle.
pub fn random_phi_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize, connected: bool) -> PhiGraph {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let mut vertices: Vec<PhiVertex> = (0..n)
        .map(|i| PhiVertex {
            id: format!("v{i}"),
            piece: format!("P{i}"),
            kind: *PHI_KINDS.choose(rng).expect("kinds"),
            circles: Vec::new(),
        })
        .collect();
    let mut pairs = Vec::new();
    if connected {
        for i in 1..n {
            pairs.push((rng.gen_range(0..i), i));
        }
    }
    let lo = if connected { n.min(max_edges) } else { 0 };
    let m = rng.gen_range(lo.max(pairs.len())..=max_edges.max(lo).max(pairs.len()));
    while pairs.len() < m {
        pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    pairs.shuffle(rng);
    let mut edges = Vec::new();
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        let mut circle = |v: usize, rng: &mut R| {
            let id = format!("c{}", vertices[v].circles.len());
            let kind = vertices[v].kind;
            vertices[v].circles.push(weighted_circle(kind, id.clone(), rng.gen_range(1..=6)));
            CircleRef::new(&vertices[v].id, &id)
        };
        let ea = circle(a, rng);
        let eb = circle(b, rng);
        edges.push(PhiEdge { id: format!("e{k}"), end_a: ea, end_b: eb, jsj_edge: format!("j{k}") });
    }
    for v in vertices.iter_mut() {
        if rng.gen_bool(0.2) {
            let id = format!("c{}", v.circles.len());
            v.circles.push(weighted_circle(v.kind, id, rng.gen_range(1..=6)));
        }
    }
    PhiGraph { vertices, edges }
}

fn adjacency(phi: &PhiGraph) -> BTreeMap<&str, Vec<(Step, &str)>> {
    let mut adj: BTreeMap<&str, Vec<(Step, &str)>> = BTreeMap::new();
    for e in &phi.edges {
        adj.entry(&e.end_a.vertex).or_default().push((Step::fwd(&e.id), &e.end_b.vertex));
        adj.entry(&e.end_b.vertex).or_default().push((Step::rev(&e.id), &e.end_a.vertex));
    }
    adj
}

/// A random closed walk from `start` of roughly `len` steps: a random walk,
/// followed by a shortest way back. Empty when `start` has no edges.
pub fn random_closed_walk<R: Rng>(rng: &mut R, phi: &PhiGraph, start: &str, len: usize) -> Vec<Step> {
    let adj = adjacency(phi);
    if !adj.contains_key(start) {
        return Vec::new();
    }
    let mut walk = Vec::new();
    let mut at = start;
    for _ in 0..len.max(1) {
        let (s, next) = adj[at].choose(rng).expect("nonempty").clone();
        walk.push(s);
        at = next;
    }
    // breadth-first way back
    let mut prev: BTreeMap<&str, Option<(Step, &str)>> = BTreeMap::from([(at, None)]);
    let mut queue = VecDeque::from([at]);
    while let Some(x) = queue.pop_front() {
        if x == start {
            break;
        }
        for (s, y) in &adj[x] {
            if !prev.contains_key(y) {
                prev.insert(y, Some((s.clone(), x)));
                queue.push_back(y);
            }
        }
    }
    let mut back = Vec::new();
    let mut cur = start;
    while let Some(Some((s, from))) = prev.get(cur) {
        back.push(s.clone());
        cur = from;
    }
    back.reverse();
    walk.extend(back);
    walk
}

/// A connected graph cover of degree `degree` in which every circle lifts
/// with degree one. `None` if no connected cover was found.
pub fn random_graph_cover<R: Rng>(rng: &mut R, phi: &PhiGraph, degree: usize) -> Option<PhiCover> {
    for _ in 0..200 {
        let vertices: Vec<LiftedVertex> = phi
            .vertices
            .iter()
            .flat_map(|v| {
                (0..degree).map(move |i| LiftedVertex {
                    id: format!("{}.{i}", v.id),
                    base: v.id.clone(),
                    circles: v
                        .circles
                        .iter()
                        .map(|c| LiftedCircle { id: c.id.clone(), base: c.id.clone(), degree: 1 })
                        .collect(),
                })
            })
            .collect();
        let mut edges = Vec::new();
        for e in &phi.edges {
            let mut perm: Vec<usize> = (0..degree).collect();
            perm.shuffle(rng);
            for (i, &j) in perm.iter().enumerate() {
                edges.push(LiftedEdge {
                    id: format!("{}.{i}", e.id),
                    base: e.id.clone(),
                    end_a: CircleRef::new(&format!("{}.{i}", e.end_a.vertex), &e.end_a.circle),
                    end_b: CircleRef::new(&format!("{}.{j}", e.end_b.vertex), &e.end_b.circle),
                });
            }
        }
        let cover = PhiCover { vertices, edges };
        if cover_connected(&cover) {
            return Some(cover);
        }
    }
    None
}

fn cover_connected(cover: &PhiCover) -> bool {
    let Some(first) = cover.vertices.first() else { return true };
    let mut seen = BTreeSet::from([first.id.as_str()]);
    let mut changed = true;
    while changed {
        changed = false;
        for e in &cover.edges {
            let (a, b) = (e.end_a.vertex.as_str(), e.end_b.vertex.as_str());
            if seen.contains(a) != seen.contains(b) {
                seen.insert(a);
                seen.insert(b);
                changed = true;
            }
        }
    }
    seen.len() == cover.vertices.len()
}

// ---- full instances ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Svf,
    Spf,
    Hvf,
    Gf,
    S1,
    SpfX,
    Fc,
}

impl Node {
    fn surface(self) -> bool {
        matches!(self, Node::Svf | Node::Spf | Node::Hvf)
    }

    fn phi_kind(self) -> PhiVertexKind {
        match self {
            Node::Svf => PhiVertexKind::SeifertVirtuallyFibered,
            Node::Spf => PhiVertexKind::SeifertPartiallyFibered,
            Node::Hvf => PhiVertexKind::HypVirtuallyFibered,
            _ => unreachable!("not a surface vertex"),
        }
    }

    fn cover_kind(self) -> CoverVertexKind {
        match self {
            Node::Gf => CoverVertexKind::HypGeometricallyFinite,
            Node::S1 => CoverVertexKind::SeifertCircleBundle,
            Node::SpfX => CoverVertexKind::SeifertPartiallyFibered,
            Node::Fc => CoverVertexKind::FiniteCover,
            _ => unreachable!("surface vertex"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    Phi,
    Cylinder,
    Torus,
    Plane,
}

fn links(a: Node, b: Node) -> Vec<Link> {
    use Link::*;
    use Node::*;
    let (a, b) = if b.surface() && !a.surface() { (b, a) } else { (a, b) };
    match (a, b) {
        (x, y) if x.surface() && y.surface() => {
            if x == Spf && y == Spf {
                vec![Phi, Plane]
            } else {
                vec![Phi]
            }
        }
        (x, Gf) if x.surface() => {
            if x == Spf {
                vec![Cylinder, Plane]
            } else {
                vec![Cylinder]
            }
        }
        (_, S1) if a.surface() => vec![Cylinder],
        (Spf, SpfX) => vec![Plane],
        (x, _) if x.surface() => vec![],
        (Gf, Gf) => vec![Torus, Cylinder, Plane],
        (Gf, S1) | (S1, Gf) => vec![Torus, Cylinder],
        (Gf, SpfX) | (SpfX, Gf) => vec![Plane, Cylinder],
        (Gf, Fc) | (Fc, Gf) | (S1, S1) | (S1, Fc) | (Fc, S1) | (Fc, Fc) => vec![Torus],
        (S1, SpfX) | (SpfX, S1) => vec![Cylinder],
        (SpfX, SpfX) => vec![Plane],
        _ => vec![],
    }
}

/// Options for [`random_instance`].
#[derive(Debug, Clone)]
pub struct InstanceOptions {
    pub max_surface_vertices: usize,
    pub max_extra_vertices: usize,
    /// Force weights coming from vertex potentials (always aspiral), or
    /// independent random weights. `None` picks either at random.
    pub aspiral: Option<bool>,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions { max_surface_vertices: 12, max_extra_vertices: 4, aspiral: None }
    }
}

struct Builder {
    ids: Vec<String>,
    nodes: Vec<Node>,
    piece_kinds: Vec<PieceKind>,
    tori: Vec<Vec<String>>,
    degeneracy: Vec<BTreeMap<String, Slope>>,
    circles: Vec<Vec<Circle>>,
    potential: Vec<u64>,
    jsj_edges: Vec<Edge>,
    phi_edges: Vec<PhiEdge>,
    extra_edges: Vec<ExtraEdge>,
    links: Vec<(usize, usize, Link)>,
    aspiral: bool,
}

fn is_seifert(k: PieceKind) -> bool {
    k == PieceKind::SeifertFibered
}

fn primitive_with_y<R: Rng>(rng: &mut R, y: i64) -> (i64, i64) {
    loop {
        let x = rng.gen_range(-4..=4i64);
        if x.gcd(&y) == 1 {
            return if rng.gen_bool(0.5) { (x, y) } else { (-x, -y) };
        }
    }
}

fn random_primitive<R: Rng>(rng: &mut R) -> (i64, i64) {
    loop {
        let (x, y) = (rng.gen_range(-4..=4i64), rng.gen_range(-4..=4i64));
        if x.gcd(&y) == 1 {
            return (x, y);
        }
    }
}

/// Unimodular `M` with first column `c`.
fn complete(c: (i64, i64)) -> [[i64; 2]; 2] {
    let e = c.0.extended_gcd(&c.1);
    debug_assert_eq!(e.gcd, 1);
    [[c.0, -e.y], [c.1, e.x]]
}

fn mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut m = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn inverse_unimodular(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[d * m[1][1], -d * m[0][1]], [-d * m[1][0], d * m[0][0]]]
}

impl Builder {
    fn core_for<R: Rng>(&self, rng: &mut R, v: usize, weight: u64) -> (i64, i64) {
        match self.nodes[v] {
            Node::Svf | Node::Spf => primitive_with_y(rng, weight as i64),
            Node::S1 => {
                if rng.gen_bool(0.5) {
                    (1, 0)
                } else {
                    (-1, 0)
                }
            }
            Node::SpfX => loop {
                let c = random_primitive(rng);
                if c.1 != 0 {
                    return c;
                }
            },
            _ => random_primitive(rng),
        }
    }

    /// A gluing taking `ca` to `cb` that does not match Seifert fibers.
    fn gluing<R: Rng>(&self, rng: &mut R, a: usize, b: usize, ca: (i64, i64), cb: (i64, i64)) -> Option<Gluing> {
        let ma_inv = inverse_unimodular(complete(ca));
        let mb = complete(cb);
        let mut shears: Vec<(i64, i64)> = (-3..=3).flat_map(|m| [(m, 1), (m, -1)]).collect();
        shears.shuffle(rng);
        for (m, s) in shears {
            let g = mul(mul(mb, [[1, m], [0, s]]), ma_inv);
            if is_seifert(self.piece_kinds[a]) && is_seifert(self.piece_kinds[b]) {
                // fibers are (1, 0) on every torus
                let image = (g[0][0], g[1][0]);
                if image.1 == 0 && image.0.abs() == 1 {
                    continue;
                }
            }
            return Gluing::new(g).ok();
        }
        None
    }

    fn new_torus(&mut self, v: usize) -> String {
        let t = format!("T{}", self.tori[v].len() + 1);
        self.tori[v].push(t.clone());
        t
    }

    fn weight<R: Rng>(&self, rng: &mut R, v: usize, k: u64) -> u64 {
        if self.aspiral {
            self.potential[v] * k
        } else {
            rng.gen_range(1..=5)
        }
    }

    fn add_circle<R: Rng>(&mut self, rng: &mut R, v: usize, torus: &str, w: u64, core: (i64, i64)) -> String {
        let id = format!("c{}", self.circles[v].len() + 1);
        let kind = self.nodes[v].phi_kind();
        let (si, cd) = if kind.is_seifert() { (Some(w), None) } else { (None, Some(w)) };
        self.circles[v].push(Circle {
            id: id.clone(),
            torus: torus.to_string(),
            seifert_intersection: si,
            cusp_degree: cd,
            core: Some(Vector::new(core.0, core.1)),
        });
        if self.nodes[v] == Node::Hvf {
            let c = Slope::new(core.0, core.1).expect("primitive core");
            let d = loop {
                let (p, q) = random_primitive(rng);
                let s = Slope::new(p, q).expect("primitive");
                if !s.is_parallel(&c) {
                    break s;
                }
            };
            self.degeneracy[v].insert(torus.to_string(), d);
        }
        id
    }

    fn link<R: Rng>(&mut self, rng: &mut R, a: usize, b: usize, kind: Link) -> bool {
        let k = rng.gen_range(1..=3);
        let (wa, wb) = match kind {
            Link::Phi => (self.weight(rng, a, k), self.weight(rng, b, k)),
            _ => (rng.gen_range(1..=4), rng.gen_range(1..=4)),
        };
        let mut found = None;
        for _ in 0..20 {
            let (ca, cb) = match kind {
                Link::Phi | Link::Cylinder => (self.core_for(rng, a, wa), self.core_for(rng, b, wb)),
                _ => (random_primitive(rng), random_primitive(rng)),
            };
            if let Some(g) = self.gluing(rng, a, b, ca, cb) {
                found = Some((ca, cb, g));
                break;
            }
        }
        let Some((ca, cb, g)) = found else { return false };
        let ta = self.new_torus(a);
        let tb = self.new_torus(b);
        let jid = format!("j{:02}", self.jsj_edges.len() + 1);
        self.jsj_edges.push(Edge {
            id: jid.clone(),
            end_a: EdgeEnd::new(&format!("P{}", self.ids[a]), &ta),
            end_b: EdgeEnd::new(&format!("P{}", self.ids[b]), &tb),
            gluing: g,
        });
        let circle_at = |this: &mut Builder, rng: &mut R, v: usize, t: &str, w: u64, c: (i64, i64)| {
            if this.nodes[v].surface() && matches!(kind, Link::Phi | Link::Cylinder) {
                Some(this.add_circle(rng, v, t, w, c))
            } else {
                None
            }
        };
        let cir_a = circle_at(self, rng, a, &ta, wa, ca);
        let cir_b = circle_at(self, rng, b, &tb, wb, cb);
        match kind {
            Link::Phi => {
                let ra = CircleRef::new(&self.ids[a], cir_a.as_deref().expect("circle"));
                let rb = CircleRef::new(&self.ids[b], cir_b.as_deref().expect("circle"));
                let (end_a, end_b) = if rng.gen_bool(0.5) { (ra, rb) } else { (rb, ra) };
                let id = format!("e{:02}", self.phi_edges.len() + 1);
                self.phi_edges.push(PhiEdge { id, end_a, end_b, jsj_edge: jid });
            }
            _ => {
                let space = match kind {
                    Link::Cylinder => {
                        let named = cir_a.is_some() || cir_b.is_some();
                        SpaceSpec::Cylinder {
                            core: if named && rng.gen_bool(0.5) { None } else { Some(Vector::new(ca.0, ca.1)) },
                        }
                    }
                    Link::Torus => SpaceSpec::Torus {
                        lattice: if rng.gen_bool(0.5) {
                            None
                        } else {
                            let (x, d) = (rng.gen_range(1..=3i64), rng.gen_range(1..=3i64));
                            Lattice::from_hnf(x.into(), rng.gen_range(0..x).into(), d.into()).ok()
                        },
                    },
                    _ => SpaceSpec::Plane { interior: false },
                };
                let id = format!("f{:02}", self.extra_edges.len() + 1);
                self.extra_edges.push(ExtraEdge {
                    id,
                    jsj_edge: jid,
                    end_a: ExtraEnd { vertex: self.ids[a].clone(), torus: ta, circle: cir_a },
                    end_b: ExtraEnd { vertex: self.ids[b].clone(), torus: tb, circle: cir_b },
                    space,
                });
            }
        }
        self.links.push((a, b, kind));
        true
    }

    fn push_node<R: Rng>(&mut self, rng: &mut R, id: String, node: Node) -> usize {
        let piece_kind = match node {
            Node::Svf | Node::Spf | Node::S1 | Node::SpfX => PieceKind::SeifertFibered,
            Node::Hvf => PieceKind::HyperbolicFiniteVolume,
            Node::Gf => {
                if rng.gen_bool(0.3) {
                    PieceKind::HyperbolicHigherGenus
                } else {
                    PieceKind::HyperbolicFiniteVolume
                }
            }
            Node::Fc => *[PieceKind::SeifertFibered, PieceKind::HyperbolicFiniteVolume, PieceKind::HyperbolicHigherGenus]
                .choose(rng)
                .expect("kinds"),
        };
        self.ids.push(id);
        self.nodes.push(node);
        self.piece_kinds.push(piece_kind);
        self.tori.push(Vec::new());
        self.degeneracy.push(BTreeMap::new());
        self.circles.push(Vec::new());
        self.potential.push(rng.gen_range(1..=3));
        self.nodes.len() - 1
    }

    fn components(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(c: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while c[r] != r {
                r = c[r];
            }
            c[x] = r;
            r
        }
        for &(a, b, _) in &self.links {
            let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
            comp[ra] = rb;
        }
        (0..n).map(|x| find(&mut comp, x)).collect()
    }
}

/// A random instance satisfying every validity check, with a connected
/// decomposition and an assemblable cover graph.
pub fn random_instance<R: Rng>(rng: &mut R, opts: &InstanceOptions) -> Instance {
    let aspiral = opts.aspiral.unwrap_or_else(|| rng.gen_bool(0.5));
    let mut b = Builder {
        ids: Vec::new(),
        nodes: Vec::new(),
        piece_kinds: Vec::new(),
        tori: Vec::new(),
        degeneracy: Vec::new(),
        circles: Vec::new(),
        potential: Vec::new(),
        jsj_edges: Vec::new(),
        phi_edges: Vec::new(),
        extra_edges: Vec::new(),
        links: Vec::new(),
        aspiral,
    };
    let ns = rng.gen_range(1..=opts.max_surface_vertices.max(1));
    for i in 0..ns {
        let node = *[Node::Svf, Node::Spf, Node::Hvf].choose(rng).expect("kinds");
        b.push_node(rng, format!("v{:02}", i + 1), node);
    }
    let nx = rng.gen_range(0..=opts.max_extra_vertices);
    for i in 0..nx {
        let node = *[Node::Gf, Node::S1, Node::SpfX, Node::Fc].choose(rng).expect("kinds");
        b.push_node(rng, format!("x{:02}", i + 1), node);
    }

    let phi_count = rng.gen_range(0..=ns + 2);
    for _ in 0..phi_count {
        let (x, y) = (rng.gen_range(0..ns), rng.gen_range(0..ns));
        b.link(rng, x, y, Link::Phi);
    }
    let n = b.nodes.len();
    let extra_count = rng.gen_range(0..=nx + 2);
    for _ in 0..extra_count {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let options: Vec<Link> = links(b.nodes[x], b.nodes[y]).into_iter().filter(|l| *l != Link::Phi).collect();
        if let Some(&l) = options.choose(rng) {
            b.link(rng, x, y, l);
        }
    }
    // connect everything, through a new geometrically finite hub if needed
    let mut hubs = 0;
    loop {
        let comp = b.components();
        let roots: BTreeSet<usize> = comp.iter().copied().collect();
        if roots.len() <= 1 {
            break;
        }
        let r0 = comp[0];
        let xs: Vec<usize> = (0..b.nodes.len()).filter(|&i| comp[i] == r0).collect();
        let ys: Vec<usize> = (0..b.nodes.len()).filter(|&i| comp[i] != r0).collect();
        let (x, y) = (*xs.choose(rng).expect("nonempty"), *ys.choose(rng).expect("nonempty"));
        let options = links(b.nodes[x], b.nodes[y]);
        let linked = match options.choose(rng) {
            Some(&l) => b.link(rng, x, y, l),
            None => false,
        };
        if !linked {
            hubs += 1;
            let h = b.push_node(rng, format!("h{hubs:02}"), Node::Gf);
            for z in [x, y] {
                let l = *links(Node::Gf, b.nodes[z]).choose(rng).expect("hubs link to anything");
                b.link(rng, h, z, l);
            }
        }
    }
    if b.links.is_empty() {
        let l = *links(b.nodes[0], b.nodes[0]).first().unwrap_or(&Link::Torus);
        if !b.link(rng, 0, 0, l) || b.links.is_empty() {
            let h = b.push_node(rng, "h00".into(), Node::Gf);
            let l = *links(Node::Gf, b.nodes[0]).choose(rng).expect("hubs link to anything");
            b.link(rng, h, 0, l);
        }
    }

    // planes joining two parts of the surface-and-interior-plane forest are interior
    let index: BTreeMap<String, usize> = b.ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let mut uf: Vec<usize> = (0..b.nodes.len()).collect();
    fn find(c: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while c[r] != r {
            r = c[r];
        }
        c[x] = r;
        r
    }
    for e in &b.phi_edges {
        let (x, y) = (find(&mut uf, index[&e.end_a.vertex]), find(&mut uf, index[&e.end_b.vertex]));
        uf[x] = y;
    }
    let mut planes: Vec<usize> = (0..b.extra_edges.len())
        .filter(|&i| matches!(b.extra_edges[i].space, SpaceSpec::Plane { .. }))
        .collect();
    planes.sort_by(|&i, &j| b.extra_edges[i].id.cmp(&b.extra_edges[j].id));
    for i in planes {
        let e = &b.extra_edges[i];
        let (x, y) = (find(&mut uf, index[&e.end_a.vertex]), find(&mut uf, index[&e.end_b.vertex]));
        if x != y {
            uf[x] = y;
            b.extra_edges[i].space = SpaceSpec::Plane { interior: true };
        }
    }

    let fiber = Slope::new(1, 0).expect("primitive");
    let pieces = (0..b.nodes.len())
        .map(|i| {
            let mut boundary: Vec<BoundaryComponent> =
                b.tori[i].iter().map(|t| BoundaryComponent { id: t.clone(), genus: 1 }).collect();
            if b.piece_kinds[i] == PieceKind::HyperbolicHigherGenus {
                boundary.push(BoundaryComponent { id: "S".into(), genus: 2 });
            }
            let fiber_slopes = if is_seifert(b.piece_kinds[i]) {
                b.tori[i].iter().map(|t| (t.clone(), fiber)).collect()
            } else {
                BTreeMap::new()
            };
            Piece {
                id: format!("P{}", b.ids[i]),
                kind: b.piece_kinds[i],
                boundary,
                fiber_slopes,
                degeneracy_slopes: b.degeneracy[i].clone(),
            }
        })
        .collect();
    let jsj = JsjGraph { pieces, edges: b.jsj_edges.clone(), is_sol: false, trivial_decomposition: false };

    let phi = PhiGraph {
        vertices: (0..b.nodes.len())
            .filter(|&i| b.nodes[i].surface())
            .map(|i| PhiVertex {
                id: b.ids[i].clone(),
                piece: format!("P{}", b.ids[i]),
                kind: b.nodes[i].phi_kind(),
                circles: b.circles[i].clone(),
            })
            .collect(),
        edges: b.phi_edges.clone(),
    };
    let cover = CoverGraphSpec {
        vertices: (0..b.nodes.len())
            .filter(|&i| !b.nodes[i].surface())
            .map(|i| ExtraVertex {
                id: b.ids[i].clone(),
                piece: format!("P{}", b.ids[i]),
                kind: b.nodes[i].cover_kind(),
            })
            .collect(),
        edges: b.extra_edges.clone(),
    };
    let mut constants = ConstantInput::default();
    for i in 0..b.nodes.len() {
        if !matches!(b.nodes[i], Node::Hvf | Node::Fc) && rng.gen_bool(0.3) {
            constants.vertex.insert(b.ids[i].clone(), rng.gen_range(1..=3));
        }
    }
    if rng.gen_bool(0.25) {
        constants.extra_factor = Some(rng.gen_range(1..=3));
    }
    Instance { jsj, phi, cover, constants, infinite_index: true }
}
