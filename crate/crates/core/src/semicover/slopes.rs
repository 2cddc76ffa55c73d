//! Choice of the slopes `t` on cylinders and `(u, v)` on planes.

use std::collections::BTreeMap;

use crate::jsj::JsjGraph;
use crate::lattice::Slope;

use super::graph::{CoverEdge, CoverGraph, CoverVertexKind, Side, Space};
use super::SemicoverError;

/// Slopes for one edge end, in that end's torus basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlopeChoice {
    Torus,
    Cylinder { t: Slope },
    Plane { u: Slope, v: Slope },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSlopes {
    pub a: SlopeChoice,
    pub b: SlopeChoice,
}

impl EdgeSlopes {
    pub fn side(&self, side: Side) -> &SlopeChoice {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

/// The slope a fibered vertex insists on at one of its ends: the degeneracy
/// slope for hyperbolic vertices, the regular fiber for Seifert ones.
fn own_slope(
    jsj: &JsjGraph,
    graph: &CoverGraph,
    e: &CoverEdge,
    side: Side,
) -> Result<Option<Slope>, SemicoverError> {
    let end = e.end(side);
    let v = graph.vertex(&end.vertex).expect("validated endpoint");
    let piece = jsj.piece(&v.piece).expect("validated piece");
    use CoverVertexKind::*;
    match v.kind {
        HypVirtuallyFibered => piece
            .degeneracy_slopes
            .get(&end.torus)
            .copied()
            .map(Some)
            .ok_or_else(|| SemicoverError::MissingDegeneracySlope(v.piece.clone(), end.torus.clone())),
        SeifertVirtuallyFibered | SeifertPartiallyFibered => piece
            .fiber_slopes
            .get(&end.torus)
            .copied()
            .map(Some)
            .ok_or_else(|| SemicoverError::InvalidCoverGraph(vec![format!("no fiber on {}/{}", v.piece, end.torus)])),
        _ => Ok(None),
    }
}

/// Picks the slopes of every edge end. Where either slope would do, the
/// choice is the shortest slope completing the core (or `(1,0), (0,1)` on
/// planes) in the end-a basis, carried across to end b.
pub fn choose_slopes(
    jsj: &JsjGraph,
    graph: &CoverGraph,
) -> Result<BTreeMap<String, EdgeSlopes>, SemicoverError> {
    let mut out = BTreeMap::new();
    for e in &graph.edges {
        let ka = graph.kind_at(e, Side::A);
        let kb = graph.kind_at(e, Side::B);
        let slopes = match &e.space {
            Space::Torus(_) => EdgeSlopes { a: SlopeChoice::Torus, b: SlopeChoice::Torus },
            Space::Cylinder(core) => {
                let core_slope = Slope::of_vector(core)?;
                let oa = own_slope(jsj, graph, e, Side::A)?;
                let ob = own_slope(jsj, graph, e, Side::B)?;
                let (ta, tb) = match (oa, ob) {
                    (Some(ta), Some(tb)) => (ta, tb),
                    (Some(ta), None) => (ta, e.transport(&ta, Side::A)),
                    (None, Some(tb)) => (e.transport(&tb, Side::B), tb),
                    (None, None) => {
                        if ka == CoverVertexKind::SeifertCircleBundle
                            && kb == CoverVertexKind::SeifertCircleBundle
                        {
                            return Err(SemicoverError::IncompatiblePair(e.id.clone()));
                        }
                        let t = core_slope.complement();
                        (t, e.transport(&t, Side::A))
                    }
                };
                if ta.is_parallel(&core_slope) || tb.is_parallel(&e.transport(&core_slope, Side::A)) {
                    return Err(SemicoverError::SlopeParallelToCore(e.id.clone()));
                }
                EdgeSlopes { a: SlopeChoice::Cylinder { t: ta }, b: SlopeChoice::Cylinder { t: tb } }
            }
            Space::Plane { .. } => {
                let fa = own_slope(jsj, graph, e, Side::A)?;
                let fb = own_slope(jsj, graph, e, Side::B)?.map(|h| e.transport(&h, Side::B));
                let (u, v) = match (fa, fb) {
                    (None, None) => (Slope::new(1, 0)?, Slope::new(0, 1)?),
                    (None, Some(hb)) => (hb, hb.complement()),
                    (Some(ha), None) => (ha.complement(), ha),
                    (Some(ha), Some(hb)) => {
                        if ha.is_parallel(&hb) {
                            return Err(SemicoverError::IncompatiblePair(e.id.clone()));
                        }
                        (hb, ha)
                    }
                };
                EdgeSlopes {
                    a: SlopeChoice::Plane { u, v },
                    b: SlopeChoice::Plane {
                        u: e.transport(&v, Side::A),
                        v: e.transport(&u, Side::A),
                    },
                }
            }
        };
        out.insert(e.id.clone(), slopes);
    }
    Ok(out)
}
