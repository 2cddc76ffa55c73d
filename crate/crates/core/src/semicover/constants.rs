//! Covering constants for the vertex spaces and the global constant `𝔄`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::lattice::{compat_constants, ScaledSlope};
use crate::phi::PhiGraph;

use super::graph::{CoverEdge, CoverGraph, CoverVertexKind, Side};
use super::slopes::{EdgeSlopes, SlopeChoice};
use super::SemicoverError;

/// User-supplied constants. Anything absent defaults to 1, except the
/// per-circle constants of hyperbolic fibered vertices, which default to the
/// smallest values consistent with the cusp degrees.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstantInput {
    pub vertex: BTreeMap<String, u64>,
    pub circle: BTreeMap<String, BTreeMap<String, u64>>,
    pub extra_factor: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantSheet {
    /// `A` for every vertex that is neither hyperbolic fibered nor a finite cover.
    pub vertex: BTreeMap<String, BigInt>,
    /// `A_C` keyed by (vertex, circle) for hyperbolic fibered vertices.
    pub circle: BTreeMap<(String, String), BigInt>,
    /// `(B, B')` on surface edges; `B` multiplies the end-a slope.
    pub edge: BTreeMap<String, (BigInt, BigInt)>,
    pub extra: BigInt,
    /// `𝔄`, the product of everything above.
    pub global: BigInt,
}

impl ConstantSheet {
    /// The constant governing the given end of an edge.
    pub fn at(&self, graph: &CoverGraph, e: &CoverEdge, side: Side) -> BigInt {
        let end = e.end(side);
        let kind = graph.kind_at(e, side);
        let found = if kind == CoverVertexKind::HypVirtuallyFibered {
            end.circle.as_ref().and_then(|c| self.circle.get(&(end.vertex.clone(), c.clone())))
        } else {
            self.vertex.get(&end.vertex)
        };
        found.cloned().unwrap_or_else(BigInt::one)
    }

    /// `(B, B')` oriented so that the first entry belongs to `side`.
    pub fn compat(&self, edge: &str, side: Side) -> (BigInt, BigInt) {
        let (b, b2) = self.edge.get(edge).cloned().unwrap_or((BigInt::one(), BigInt::one()));
        match side {
            Side::A => (b, b2),
            Side::B => (b2, b),
        }
    }

    pub fn factors(&self) -> Vec<BigInt> {
        let mut f: Vec<BigInt> = self.vertex.values().cloned().collect();
        f.extend(self.circle.values().cloned());
        for (b, b2) in self.edge.values() {
            f.push(b.clone());
            f.push(b2.clone());
        }
        f.push(self.extra.clone());
        f
    }
}

pub fn global_constant<'a>(factors: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    factors.into_iter().fold(BigInt::one(), |acc, x| acc * x)
}

pub fn build_sheet(
    phi: &PhiGraph,
    graph: &CoverGraph,
    slopes: &BTreeMap<String, EdgeSlopes>,
    input: &ConstantInput,
) -> Result<ConstantSheet, SemicoverError> {
    let bad = |m: String| SemicoverError::InconsistentConstants(m);
    let positive = |x: u64, what: &str| {
        if x == 0 {
            Err(bad(format!("constant for {what} is zero")))
        } else {
            Ok(BigInt::from(x))
        }
    };
    for id in input.vertex.keys() {
        match graph.vertex(id).map(|v| v.kind) {
            None => return Err(bad(format!("constant for unknown vertex {id}"))),
            Some(CoverVertexKind::HypVirtuallyFibered) | Some(CoverVertexKind::FiniteCover) => {
                return Err(bad(format!("vertex {id} takes no vertex-level constant")))
            }
            Some(_) => {}
        }
    }
    for id in input.circle.keys() {
        if graph.vertex(id).map(|v| v.kind) != Some(CoverVertexKind::HypVirtuallyFibered) {
            return Err(bad(format!("circle constants given for {id}, which is not hyperbolic fibered")));
        }
    }

    let mut vertex = BTreeMap::new();
    let mut circle = BTreeMap::new();
    for v in &graph.vertices {
        match v.kind {
            CoverVertexKind::FiniteCover => {}
            CoverVertexKind::HypVirtuallyFibered => {
                // ends of v on edge spaces, with |det(core, t)| and the cusp degree
                let mut ends = Vec::new();
                for e in &graph.edges {
                    for side in [Side::A, Side::B] {
                        let end = e.end(side);
                        if end.vertex != v.id {
                            continue;
                        }
                        let c = end.circle.clone().expect("cylinder ends at surface vertices name circles");
                        let SlopeChoice::Cylinder { t } = slopes[&e.id].side(side) else {
                            unreachable!("fibered hyperbolic vertices only meet cylinders")
                        };
                        let core = e.core(side).expect("cylinder");
                        let delta = core.det(&t.vector()).abs();
                        let d = phi
                            .vertex(&v.id)
                            .and_then(|pv| pv.circle(&c))
                            .and_then(|pc| pc.cusp_degree)
                            .ok_or_else(|| bad(format!("no cusp degree on {}/{}", v.id, c)))?;
                        ends.push((c, delta, BigInt::from(d)));
                    }
                }
                let given = input.circle.get(&v.id);
                let values: Vec<(String, BigInt)> = match given {
                    None => {
                        let l = ends.iter().fold(BigInt::one(), |acc, (_, delta, _)| acc.lcm(delta));
                        let raw: Vec<BigInt> = ends.iter().map(|(_, delta, d)| d * (&l / delta)).collect();
                        let g = raw.iter().fold(BigInt::from(0), |acc, x| acc.gcd(x));
                        ends.iter().zip(raw).map(|((c, _, _), a)| (c.clone(), a / &g)).collect()
                    }
                    Some(map) => {
                        let mut vals = Vec::new();
                        for (c, _, _) in &ends {
                            let a = map
                                .get(c)
                                .ok_or_else(|| bad(format!("no constant for circle {}/{}", v.id, c)))?;
                            vals.push((c.clone(), positive(*a, c)?));
                        }
                        for c in map.keys() {
                            if !ends.iter().any(|(x, _, _)| x == c) {
                                return Err(bad(format!("constant for {}/{}, which meets no edge space", v.id, c)));
                            }
                        }
                        // A_C |det(c, t)| must be proportional to the cusp degrees
                        let scaled: Vec<(BigInt, &BigInt)> =
                            vals.iter().zip(&ends).map(|((_, a), (_, delta, d))| (a * delta, d)).collect();
                        for w in scaled.windows(2) {
                            if &w[0].0 * w[1].1 != &w[1].0 * w[0].1 {
                                return Err(bad(format!(
                                    "circle constants of {} do not match its cusp degrees",
                                    v.id
                                )));
                            }
                        }
                        vals
                    }
                };
                for (c, a) in values {
                    circle.insert((v.id.clone(), c), a);
                }
            }
            _ => {
                let a = match input.vertex.get(&v.id) {
                    Some(&x) => positive(x, &v.id)?,
                    None => BigInt::one(),
                };
                vertex.insert(v.id.clone(), a);
            }
        }
    }

    let mut edge = BTreeMap::new();
    for e in &graph.edges {
        if !(graph.kind_at(e, Side::A).is_fibered() && graph.kind_at(e, Side::B).is_fibered()) {
            continue;
        }
        let (SlopeChoice::Cylinder { t: ta }, SlopeChoice::Cylinder { t: tb }) =
            (&slopes[&e.id].a, &slopes[&e.id].b)
        else {
            continue;
        };
        let core = ScaledSlope::of_vector(&e.core(Side::A).expect("cylinder"))?;
        let tb_in_a = e.transport(tb, Side::B);
        edge.insert(e.id.clone(), compat_constants(&core, ta, &tb_in_a)?);
    }

    let extra = match input.extra_factor {
        Some(x) => positive(x, "the extra factor")?,
        None => BigInt::one(),
    };
    let mut sheet = ConstantSheet { vertex, circle, edge, extra, global: BigInt::one() };
    sheet.global = global_constant(&sheet.factors());
    Ok(sheet)
}
