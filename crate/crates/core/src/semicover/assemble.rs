use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Pow;

use crate::instance::Instance;
use crate::lattice::{apply_gluing, span2, Lattice, ScaledSlope};
use crate::phi::{spirality_on_cycle, Step};

use super::constants::{build_sheet, ConstantSheet};
use super::graph::{build_cover_graph, CoverEdge, CoverGraph, CoverVertexKind, Side, Space};
use super::slopes::{choose_slopes, EdgeSlopes, SlopeChoice};
use super::{
    Assembly, CoverCertificate, EdgeRecord, EndRecord, EndShape, SemicoverError, SpiralObstruction,
    VertexRecord,
};

/// Validated inputs shared by assembly and verification.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: CoverGraph,
    pub slopes: BTreeMap<String, EdgeSlopes>,
    pub sheet: ConstantSheet,
}

pub fn prepare(inst: &Instance) -> Result<Prepared, SemicoverError> {
    if inst.jsj.trivial_decomposition {
        return Err(SemicoverError::HypothesesViolated("the torus decomposition is trivial".into()));
    }
    if inst.jsj.is_sol {
        return Err(SemicoverError::HypothesesViolated("the manifold is a Sol manifold".into()));
    }
    if !inst.infinite_index {
        return Err(SemicoverError::HypothesesViolated("the subgroup has finite index".into()));
    }
    let v = inst.jsj.validate();
    if !v.is_empty() {
        return Err(SemicoverError::InvalidJsj(v));
    }
    let v = inst.phi.validate_against(&inst.jsj);
    if !v.is_empty() {
        return Err(SemicoverError::InvalidPhi(v));
    }
    let graph = build_cover_graph(&inst.jsj, &inst.phi, &inst.cover)?;
    let slopes = choose_slopes(&inst.jsj, &graph)?;
    let sheet = build_sheet(&inst.phi, &graph, &slopes, &inst.constants)?;
    Ok(Prepared { graph, slopes, sheet })
}

/// A spanning forest of `G_K` with its processing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeChoice {
    pub tree: BTreeSet<String>,
    pub chords: Vec<String>,
    /// Vertices in processing order.
    pub order: Vec<String>,
    /// For each non-root vertex, the tree edge to its parent and the vertex's side of it.
    pub parent: BTreeMap<String, Option<(String, Side)>>,
    depth: BTreeMap<String, usize>,
}

impl TreeChoice {
    /// Tree path from `from` to `to` as oriented steps.
    pub fn path(&self, graph: &CoverGraph, from: &str, to: &str) -> Vec<Step> {
        let step_up = |x: &str| -> (String, Step) {
            let (e, side) = self.parent[x].clone().expect("non-root");
            let edge = graph.edge(&e).expect("tree edge");
            let up = edge.end(side.other()).vertex.clone();
            (up, Step { edge: e, forward: side == Side::A })
        };
        let (mut x, mut y) = (from.to_string(), to.to_string());
        let (mut up, mut down) = (Vec::new(), Vec::new());
        while self.depth[&x] > self.depth[&y] {
            let (p, s) = step_up(&x);
            up.push(s);
            x = p;
        }
        while self.depth[&y] > self.depth[&x] {
            let (p, s) = step_up(&y);
            down.push(s.reversed());
            y = p;
        }
        while x != y {
            let (px, sx) = step_up(&x);
            let (py, sy) = step_up(&y);
            up.push(sx);
            down.push(sy.reversed());
            x = px;
            y = py;
        }
        down.reverse();
        up.extend(down);
        up
    }
}

fn fibered(graph: &CoverGraph, e: &CoverEdge) -> (bool, bool) {
    (graph.kind_at(e, Side::A).is_fibered(), graph.kind_at(e, Side::B).is_fibered())
}

/// Grows a spanning forest from `priority` first, then surface edges, then
/// interior planes, then everything else. Planes not marked interior are
/// never tree edges.
pub fn spanning_tree_with_edge_conditions(
    graph: &CoverGraph,
    priority: &[&str],
) -> Result<TreeChoice, SemicoverError> {
    let unsat = |m: String| SemicoverError::EdgeConditionUnsatisfiable(m);
    let rank = |e: &CoverEdge| match e.space {
        _ if e.on_surface => 0,
        Space::Plane { interior: true } => 1,
        _ => 2,
    };
    let mut rest: Vec<&CoverEdge> =
        graph.edges.iter().filter(|e| !priority.contains(&e.id.as_str())).collect();
    rest.sort_by(|x, y| (rank(x), &x.id).cmp(&(rank(y), &y.id)));
    let ordered: Vec<&CoverEdge> =
        priority.iter().filter_map(|id| graph.edge(id)).chain(rest).collect();

    let mut uf: BTreeMap<&str, &str> =
        graph.vertices.iter().map(|v| (v.id.as_str(), v.id.as_str())).collect();
    fn find<'a>(uf: &mut BTreeMap<&'a str, &'a str>, x: &'a str) -> &'a str {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf.insert(x, r);
        r
    }
    let mut tree = BTreeSet::new();
    for e in ordered {
        if e.space == (Space::Plane { interior: false }) {
            continue;
        }
        let (ra, rb) = (find(&mut uf, &e.end_a.vertex), find(&mut uf, &e.end_b.vertex));
        if ra != rb {
            uf.insert(ra, rb);
            tree.insert(e.id.clone());
        } else if e.space == (Space::Plane { interior: true }) {
            return Err(unsat(format!("interior plane {} closes a cycle", e.id)));
        }
    }
    let components = graph.components();
    let ids: Vec<&str> = graph.vertices.iter().map(|v| v.id.as_str()).collect();
    let roots: BTreeSet<&str> = ids.into_iter().map(|v| find(&mut uf, v)).collect();
    if roots.len() != components.len() {
        return Err(unsat("planes not marked interior are needed to connect the core".into()));
    }

    let mut adj: BTreeMap<&str, Vec<(&str, Side)>> = BTreeMap::new();
    for e in graph.edges.iter().filter(|e| tree.contains(&e.id)) {
        adj.entry(&e.end_a.vertex).or_default().push((&e.id, Side::B));
        adj.entry(&e.end_b.vertex).or_default().push((&e.id, Side::A));
    }
    for list in adj.values_mut() {
        list.sort();
    }
    let mut order = Vec::new();
    let mut parent = BTreeMap::new();
    let mut depth = BTreeMap::new();
    for comp in &components {
        let root = comp[0].clone();
        parent.insert(root.clone(), None);
        depth.insert(root.clone(), 0usize);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x.clone());
            for &(eid, side) in adj.get(x.as_str()).map(|v| v.as_slice()).unwrap_or(&[]) {
                let y = graph.edge(eid).expect("tree edge").end(side).vertex.clone();
                if !parent.contains_key(&y) {
                    parent.insert(y.clone(), Some((eid.to_string(), side)));
                    depth.insert(y.clone(), depth[&x] + 1);
                    queue.push_back(y);
                }
            }
        }
    }

    let mut chords: Vec<String> =
        graph.edges.iter().filter(|e| !tree.contains(&e.id)).map(|e| e.id.clone()).collect();
    chords.sort();
    let choice = TreeChoice { tree, chords, order, parent, depth };
    for id in &choice.chords {
        let e = graph.edge(id).expect("chord");
        if let (true, true, Space::Cylinder(_)) = (fibered(graph, e).0, fibered(graph, e).1, &e.space) {
            let path = choice.path(graph, &e.end_b.vertex, &e.end_a.vertex);
            let inside = path.iter().all(|s| graph.edge(&s.edge).is_some_and(|x| x.on_surface));
            if !inside {
                return Err(unsat(format!(
                    "cylinder chord {} between fibered vertices is not closed up by surface edges",
                    id
                )));
            }
        }
    }
    Ok(choice)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Params {
    Torus,
    Cylinder(BigInt),
    Plane(BigInt, BigInt),
}

fn exact_div(a: &BigInt, b: &BigInt, what: &str) -> Result<BigInt, SemicoverError> {
    let (q, r) = a.div_rem(b);
    if r != BigInt::from(0) {
        return Err(SemicoverError::Internal(format!("{what}: {b} does not divide {a}")));
    }
    Ok(q)
}

pub fn assemble(inst: &Instance) -> Result<Assembly, SemicoverError> {
    assemble_with_order(inst, &[])
}

/// Assembly with a preferred edge order for the spanning tree.
pub fn assemble_with_order(inst: &Instance, priority: &[&str]) -> Result<Assembly, SemicoverError> {
    let prep = prepare(inst)?;
    let Prepared { graph, slopes, sheet } = &prep;
    let tree = spanning_tree_with_edge_conditions(graph, priority)?;
    let big_a = &sheet.global;
    let n = graph.vertices.len();

    let mut params: BTreeMap<(String, Side), Params> = BTreeMap::new();
    let mut records = Vec::new();
    for (i, v) in tree.order.iter().enumerate() {
        let position = i + 1;
        let exponent = (n - position + 1) as u32;
        let p: BigInt = Pow::pow(big_a, exponent);
        let kind = graph.vertex(v).expect("vertex").kind;
        let parent = tree.parent[v].clone();

        let mut alpha = None;
        match &parent {
            None => {
                alpha = match kind {
                    CoverVertexKind::SeifertVirtuallyFibered | CoverVertexKind::SeifertPartiallyFibered => {
                        Some(exact_div(&p, &sheet.vertex[v], "root parameter")?)
                    }
                    CoverVertexKind::HypVirtuallyFibered => Some(p.clone()),
                    _ => None,
                }
            }
            Some((eid, side)) => {
                let e = graph.edge(eid).expect("tree edge");
                let from = params[&(eid.clone(), side.other())].clone();
                let mine = match from {
                    Params::Torus => Params::Torus,
                    Params::Cylinder(k) => {
                        let (fa, fb) = fibered(graph, e);
                        let k_child = if fa && fb {
                            let (b_par, b_child) = sheet.compat(eid, side.other());
                            exact_div(&k, &b_par, "pasting constant")? * b_child
                        } else {
                            k
                        };
                        if kind.is_fibered() {
                            alpha = Some(exact_div(&k_child, &sheet.at(graph, e, *side), "fibered parameter")?);
                        }
                        Params::Cylinder(k_child)
                    }
                    Params::Plane(mu, nu) => {
                        if kind == CoverVertexKind::SeifertPartiallyFibered {
                            alpha = Some(exact_div(&mu, &sheet.vertex[v], "fiber parameter")?);
                        }
                        Params::Plane(nu, mu)
                    }
                };
                params.insert((eid.clone(), *side), mine);
            }
        }

        for e in &graph.edges {
            for side in [Side::A, Side::B] {
                if e.end(side).vertex != *v {
                    continue;
                }
                if parent.as_ref().is_some_and(|(pe, ps)| *pe == e.id && *ps == side) {
                    continue;
                }
                let in_tree = tree.tree.contains(&e.id);
                let here = match &e.space {
                    Space::Torus(_) => Params::Torus,
                    Space::Cylinder(_) => match &alpha {
                        Some(al) => Params::Cylinder(al * sheet.at(graph, e, side)),
                        None => Params::Cylinder(p.clone()),
                    },
                    Space::Plane { .. } => {
                        let free = if in_tree { p.clone() } else { big_a.clone() };
                        match &alpha {
                            Some(al) => Params::Plane(free, al * sheet.at(graph, e, side)),
                            None => Params::Plane(free.clone(), free),
                        }
                    }
                };
                params.insert((e.id.clone(), side), here);
            }
        }
        records.push(VertexRecord {
            vertex: v.clone(),
            position,
            exponent,
            parent_edge: parent.map(|(e, _)| e),
            alpha,
        });
    }

    for id in &tree.chords {
        let e = graph.edge(id).expect("chord");
        let (ka, kb) = (graph.kind_at(e, Side::A), graph.kind_at(e, Side::B));
        let key = |s: Side| (id.clone(), s);
        match &e.space {
            Space::Torus(_) => {}
            Space::Plane { .. } => {
                let spf = CoverVertexKind::SeifertPartiallyFibered;
                if kb == spf {
                    let Params::Plane(_, nu_b) = params[&key(Side::B)].clone() else { unreachable!() };
                    if let Some(Params::Plane(mu_a, _)) = params.get_mut(&key(Side::A)) {
                        *mu_a = nu_b;
                    }
                }
                if ka == spf {
                    let Params::Plane(_, nu_a) = params[&key(Side::A)].clone() else { unreachable!() };
                    if let Some(Params::Plane(mu_b, _)) = params.get_mut(&key(Side::B)) {
                        *mu_b = nu_a;
                    }
                }
            }
            Space::Cylinder(_) => {
                let (fa, fb) = (ka.is_fibered(), kb.is_fibered());
                if !fa || !fb {
                    let (free, fixed) = if !fa { (Side::A, Side::B) } else { (Side::B, Side::A) };
                    let k = params[&key(fixed)].clone();
                    params.insert(key(free), k);
                } else {
                    let la = end_lattice(e, Side::A, &params[&key(Side::A)], &slopes[id])?;
                    let lb = end_lattice(e, Side::B, &params[&key(Side::B)], &slopes[id])?;
                    let mut cycle = tree.path(graph, &e.end_b.vertex, &e.end_a.vertex);
                    cycle.push(Step::fwd(id));
                    let value = spirality_on_cycle(&inst.phi, &cycle)?;
                    if !value.is_one() {
                        return Ok(Assembly::Obstructed(SpiralObstruction {
                            chord: id.clone(),
                            cycle,
                            value,
                            index_a: la.index(),
                            index_b: lb.index(),
                        }));
                    }
                    if apply_gluing(&e.gluing, &la) != lb {
                        return Err(SemicoverError::Internal(format!(
                            "chord {id} has trivial spirality but its sides disagree"
                        )));
                    }
                }
            }
        }
    }

    let mut edges = Vec::new();
    let mut sorted: Vec<&CoverEdge> = graph.edges.iter().collect();
    sorted.sort_by(|x, y| x.id.cmp(&y.id));
    for e in sorted {
        let mut ends = Vec::new();
        for side in [Side::A, Side::B] {
            let pr = &params[&(e.id.clone(), side)];
            let lattice = end_lattice(e, side, pr, &slopes[&e.id])?;
            let shape = match (pr, slopes[&e.id].side(side)) {
                (Params::Torus, _) => EndShape::Torus,
                (Params::Cylinder(k), SlopeChoice::Cylinder { t }) => EndShape::Cylinder {
                    core: e.core(side).expect("cylinder"),
                    t: *t,
                    multiplier: k.clone(),
                },
                (Params::Plane(mu, nu), SlopeChoice::Plane { u, v }) => {
                    EndShape::Plane { u: *u, v: *v, mu: mu.clone(), nu: nu.clone() }
                }
                _ => return Err(SemicoverError::Internal(format!("shape mismatch on {}", e.id))),
            };
            ends.push(EndRecord { vertex: e.end(side).vertex.clone(), shape, lattice });
        }
        let b = ends.pop().expect("two ends");
        let a = ends.pop().expect("two ends");
        if apply_gluing(&e.gluing, &a.lattice) != b.lattice {
            return Err(SemicoverError::Internal(format!("edge {} sides disagree", e.id)));
        }
        edges.push(EdgeRecord { edge: e.id.clone(), in_tree: tree.tree.contains(&e.id), a, b });
    }
    records.sort_by(|x, y| x.vertex.cmp(&y.vertex));
    Ok(Assembly::Certified(CoverCertificate { vertices: records, edges, sheet: sheet.clone() }))
}

fn end_lattice(
    e: &CoverEdge,
    side: Side,
    params: &Params,
    slopes: &EdgeSlopes,
) -> Result<Lattice, SemicoverError> {
    Ok(match (params, slopes.side(side)) {
        (Params::Torus, _) => e.torus_lattice(side).expect("torus"),
        (Params::Cylinder(k), SlopeChoice::Cylinder { t }) => span2(
            &ScaledSlope::of_vector(&e.core(side).expect("cylinder"))?,
            &ScaledSlope::new(k.clone(), *t)?,
        )?,
        (Params::Plane(mu, nu), SlopeChoice::Plane { u, v }) => {
            span2(&ScaledSlope::new(mu.clone(), *u)?, &ScaledSlope::new(nu.clone(), *v)?)?
        }
        _ => return Err(SemicoverError::Internal(format!("shape mismatch on {}", e.id))),
    })
}
