use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Signed};

use crate::instance::Instance;
use crate::lattice::{apply_gluing, span2, ScaledSlope};

use super::assemble::{prepare, Prepared};
use super::constants::global_constant;
use super::graph::{CoverVertexKind, Side, Space};
use super::slopes::SlopeChoice;
use super::{CoverCertificate, EndRecord, EndShape, SemicoverError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertViolation {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for CertViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

struct Report(Vec<CertViolation>);

impl Report {
    fn push(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.0.push(CertViolation { subject: subject.into(), message: message.into() });
    }
}

fn divides(d: &BigInt, x: &BigInt) -> bool {
    x.is_multiple_of(d)
}

/// Re-derives every gluing equality and boundary shape of a certificate from
/// the instance alone. An empty list means the certificate is valid.
pub fn verify_certificate(
    inst: &Instance,
    cert: &CoverCertificate,
) -> Result<Vec<CertViolation>, SemicoverError> {
    let Prepared { graph, slopes, sheet } = prepare(inst)?;
    let mut r = Report(Vec::new());

    if cert.sheet != sheet {
        r.push("constants", "sheet differs from the one determined by the instance");
    }
    if cert.sheet.global != global_constant(&cert.sheet.factors()) {
        r.push("constants", "global constant is not the product of the listed constants");
    }
    let big_a = &cert.sheet.global;

    // vertices and positions
    let n = graph.vertices.len();
    let by_vertex: BTreeMap<&str, _> = cert.vertices.iter().map(|v| (v.vertex.as_str(), v)).collect();
    if by_vertex.len() != cert.vertices.len() {
        r.push("vertices", "duplicate vertex records");
    }
    for v in &graph.vertices {
        if !by_vertex.contains_key(v.id.as_str()) {
            r.push(format!("vertex {}", v.id), "missing record");
        }
    }
    let positions: BTreeSet<usize> = cert.vertices.iter().map(|v| v.position).collect();
    if positions != (1..=n).collect::<BTreeSet<_>>() || cert.vertices.len() != n {
        r.push("vertices", "positions are not a permutation of 1..n");
    }
    for v in &cert.vertices {
        if graph.vertex(&v.vertex).is_none() {
            r.push(format!("vertex {}", v.vertex), "not a vertex of the core");
        }
        if v.position >= 1 && v.position <= n && v.exponent as usize != n - v.position + 1 {
            r.push(format!("vertex {}", v.vertex), "exponent does not match position");
        }
    }

    // edges and the tree
    let by_edge: BTreeMap<&str, _> = cert.edges.iter().map(|e| (e.edge.as_str(), e)).collect();
    if by_edge.len() != cert.edges.len() {
        r.push("edges", "duplicate edge records");
    }
    for e in &cert.edges {
        if graph.edge(&e.edge).is_none() {
            r.push(format!("edge {}", e.edge), "not an edge of the core");
        }
    }
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
    let mut tree_count = 0;
    for e in &graph.edges {
        let Some(rec) = by_edge.get(e.id.as_str()) else {
            r.push(format!("edge {}", e.id), "missing record");
            continue;
        };
        if rec.in_tree {
            tree_count += 1;
            let (ra, rb) = (find(&mut uf, &e.end_a.vertex), find(&mut uf, &e.end_b.vertex));
            if ra == rb {
                r.push(format!("edge {}", e.id), "tree edges contain a cycle");
            }
            uf.insert(ra, rb);
        }
    }
    if tree_count + graph.components().len() != n {
        r.push("tree", "tree edges do not span the core");
    }
    for v in &cert.vertices {
        let Some(gv) = graph.vertex(&v.vertex) else { continue };
        match &v.parent_edge {
            None => {}
            Some(pe) => {
                let ok = graph.edge(pe).is_some_and(|e| {
                    let other = if e.end_a.vertex == gv.id { &e.end_b.vertex } else { &e.end_a.vertex };
                    (e.end_a.vertex == gv.id || e.end_b.vertex == gv.id)
                        && by_edge.get(pe.as_str()).is_some_and(|x| x.in_tree)
                        && by_vertex.get(other.as_str()).is_some_and(|o| o.position < v.position)
                });
                if !ok {
                    r.push(format!("vertex {}", v.vertex), "parent edge is not a tree edge to an earlier vertex");
                }
            }
        }
    }

    // every end: shape, slopes, lattice
    for e in &graph.edges {
        let Some(rec) = by_edge.get(e.id.as_str()) else { continue };
        let subject = format!("edge {}", e.id);
        for (side, end) in [(Side::A, &rec.a), (Side::B, &rec.b)] {
            let owner = &e.end(side).vertex;
            if &end.vertex != owner {
                r.push(&subject, format!("end {side:?} belongs to {owner}, not {}", end.vertex));
                continue;
            }
            let exponent = by_vertex.get(owner.as_str()).map(|v| v.exponent).unwrap_or(1);
            check_end(&mut r, &subject, e, side, end, &slopes[&e.id], big_a, rec.in_tree, exponent);
        }
        if apply_gluing(&e.gluing, &rec.a.lattice) != rec.b.lattice {
            r.push(&subject, "gluing does not carry the end-a subgroup onto the end-b subgroup");
        }
    }

    // one parameter family per vertex
    for v in &graph.vertices {
        let Some(vr) = by_vertex.get(v.id.as_str()) else { continue };
        let subject = format!("vertex {}", v.id);
        if v.kind.is_fibered() != vr.alpha.is_some() {
            r.push(&subject, "parameter present exactly when the vertex is fibered");
            continue;
        }
        if vr.alpha.as_ref().is_some_and(|a| !a.is_positive()) {
            r.push(&subject, "parameter is not positive");
            continue;
        }
        for e in &graph.edges {
            let Some(rec) = by_edge.get(e.id.as_str()) else { continue };
            for (side, end) in [(Side::A, &rec.a), (Side::B, &rec.b)] {
                if e.end(side).vertex != v.id {
                    continue;
                }
                let a = cert.sheet.at(&graph, e, side);
                match (&vr.alpha, &end.shape) {
                    (_, EndShape::Torus) => {}
                    (Some(al), EndShape::Cylinder { multiplier, .. }) => {
                        if *multiplier != al * &a {
                            r.push(&subject, format!("cylinder end on {} is not parameter times constant", e.id));
                        }
                    }
                    (Some(al), EndShape::Plane { nu, mu, .. }) => {
                        if *nu != al * &a || !divides(&a, mu) {
                            r.push(&subject, format!("plane end on {} does not follow the fiber parameter", e.id));
                        }
                    }
                    (None, EndShape::Cylinder { multiplier, .. }) => {
                        if !divides(&a, multiplier) {
                            r.push(&subject, format!("constant does not divide the multiplier on {}", e.id));
                        }
                    }
                    (None, EndShape::Plane { mu, nu, .. }) => {
                        if !divides(&a, mu) || !divides(&a, nu) {
                            r.push(&subject, format!("constant does not divide the multipliers on {}", e.id));
                        }
                    }
                }
                if v.kind == CoverVertexKind::FiniteCover && end.shape != EndShape::Torus {
                    r.push(&subject, "finite covers meet only tori");
                }
            }
        }
    }
    Ok(r.0)
}

#[allow(clippy::too_many_arguments)]
fn check_end(
    r: &mut Report,
    subject: &str,
    e: &super::graph::CoverEdge,
    side: Side,
    end: &EndRecord,
    slopes: &super::slopes::EdgeSlopes,
    big_a: &BigInt,
    in_tree: bool,
    exponent: u32,
) {
    let tree_power: BigInt = Pow::pow(big_a, exponent);
    let scale_ok = |m: &BigInt| m.is_positive() && divides(big_a, m) && (!in_tree || divides(&tree_power, m));
    match (&e.space, &end.shape, slopes.side(side)) {
        (Space::Torus(_), EndShape::Torus, _) => {
            if Some(&end.lattice) != e.torus_lattice(side).as_ref() {
                r.push(subject, format!("end {side:?} does not map the torus homeomorphically"));
            }
        }
        (Space::Cylinder(_), EndShape::Cylinder { core, t, multiplier }, SlopeChoice::Cylinder { t: t0 }) => {
            let expected = e.core(side).expect("cylinder");
            if *core != expected && core.neg() != expected {
                r.push(subject, format!("end {side:?} records the wrong core"));
                return;
            }
            if t != t0 {
                r.push(subject, format!("end {side:?} uses slope {t}, expected {t0}"));
            }
            if !scale_ok(multiplier) {
                r.push(subject, format!("end {side:?} multiplier is not a positive multiple of the required power"));
                return;
            }
            let built = ScaledSlope::of_vector(core)
                .and_then(|c| span2(&c, &ScaledSlope::new(multiplier.clone(), *t)?));
            match built {
                Ok(l) if l == end.lattice => {}
                _ => r.push(subject, format!("end {side:?} subgroup is not spanned by the core and the scaled slope")),
            }
            if !end.lattice.is_primitive_element(core) {
                r.push(subject, format!("end {side:?} core is not primitive in the subgroup"));
            }
        }
        (Space::Plane { .. }, EndShape::Plane { u, v, mu, nu }, SlopeChoice::Plane { u: u0, v: v0 }) => {
            if u != u0 || v != v0 {
                r.push(subject, format!("end {side:?} uses slopes {u},{v}, expected {u0},{v0}"));
            }
            if !scale_ok(mu) || !scale_ok(nu) {
                r.push(subject, format!("end {side:?} multipliers are not positive multiples of the required power"));
                return;
            }
            let built = ScaledSlope::new(mu.clone(), *u)
                .and_then(|a| span2(&a, &ScaledSlope::new(nu.clone(), *v)?));
            match built {
                Ok(l) if l == end.lattice => {}
                _ => r.push(subject, format!("end {side:?} subgroup is not spanned by the scaled slopes")),
            }
        }
        _ => r.push(subject, format!("end {side:?} shape does not match the edge space")),
    }
}
