//! Slow, independent reference implementations used to cross-check the fast
//! paths in tests. Everything here is exponential or brute force on purpose.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::jsj::{BoundaryComponent, Edge, EdgeEnd, JsjGraph, Piece, PieceKind};
use crate::lattice::{Gluing, Slope, Vector};
use crate::phi::{PhiGraph, Step};

/// Integer coordinates of `v` in the basis `(g1, g2)`, by Cramer's rule.
pub fn coordinates(g1: &Vector, g2: &Vector, v: &Vector) -> Option<(BigInt, BigInt)> {
    let d = g1.x.clone() * &g2.y - g1.y.clone() * &g2.x;
    if d.is_zero() {
        return None;
    }
    let nx = v.x.clone() * &g2.y - v.y.clone() * &g2.x;
    let ny = g1.x.clone() * &v.y - g1.y.clone() * &v.x;
    if nx.is_multiple_of(&d) && ny.is_multiple_of(&d) {
        Some((nx / &d, ny / &d))
    } else {
        None
    }
}

pub fn in_span(g1: &Vector, g2: &Vector, v: &Vector) -> bool {
    coordinates(g1, g2, v).is_some()
}

/// Whether two independent pairs generate the same subgroup.
pub fn same_span(a: (&Vector, &Vector), b: (&Vector, &Vector)) -> bool {
    in_span(a.0, a.1, b.0) && in_span(a.0, a.1, b.1) && in_span(b.0, b.1, a.0) && in_span(b.0, b.1, a.1)
}

/// All points of the box `[-bound, bound]^2` lying in the span of `gens`.
///
/// The span contains `d Z^2`, `d` the gcd of all 2x2 minors, so membership
/// is decided in `(Z/d)^2` by closing the reduced generators under addition.
pub fn lattice_membership_by_enumeration(gens: &[Vector], bound: i64) -> BTreeSet<(i64, i64)> {
    assert!(bound <= 64, "enumeration bound too large");
    let mut d = BigInt::zero();
    for (i, u) in gens.iter().enumerate() {
        for w in &gens[i + 1..] {
            d = d.gcd(&(u.x.clone() * &w.y - u.y.clone() * &w.x));
        }
    }
    assert!(!d.is_zero(), "generators of a rank-2 subgroup");
    let d = i64::try_from(&d).expect("small minors");
    assert!(d <= 2000, "modulus out of enumeration range");
    let reduce = |b: &BigInt| i64::try_from(b.mod_floor(&BigInt::from(d))).expect("reduced");
    let steps: Vec<(i64, i64)> = gens.iter().map(|g| (reduce(&g.x), reduce(&g.y))).collect();
    let du = d as usize;
    let mut seen = vec![false; du * du];
    seen[0] = true;
    let mut stack = vec![(0i64, 0i64)];
    while let Some((x, y)) = stack.pop() {
        for &(sx, sy) in &steps {
            let n = ((x + sx) % d, (y + sy) % d);
            let k = n.0 as usize * du + n.1 as usize;
            if !seen[k] {
                seen[k] = true;
                stack.push(n);
            }
        }
    }
    let mut out = BTreeSet::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            if seen[x.rem_euclid(d) as usize * du + y.rem_euclid(d) as usize] {
                out.insert((x, y));
            }
        }
    }
    out
}

/// Index of the span of an independent pair, by counting its points in a
/// fundamental box of `N Z^2` where `N` is the absolute determinant.
pub fn index_by_counting(g1: &Vector, g2: &Vector) -> BigInt {
    let n = (g1.x.clone() * &g2.y - g1.y.clone() * &g2.x).abs();
    let n64 = i64::try_from(&n).expect("small determinant");
    assert!(n64 > 0 && n64 <= 400, "determinant out of counting range");
    let mut count = 0i64;
    for x in 0..n64 {
        for y in 0..n64 {
            if in_span(g1, g2, &Vector::new(x, y)) {
                count += 1;
            }
        }
    }
    BigInt::from(n64 * n64 / count)
}

/// Product of the per-vertex weight ratios along a closed path, computed
/// straight from the circle data.
pub fn direct_spirality(phi: &PhiGraph, cycle: &[Step]) -> Option<BigRational> {
    let ends = |s: &Step| {
        let e = phi.edge(&s.edge)?;
        Some(if s.forward { (e.end_a.clone(), e.end_b.clone()) } else { (e.end_b.clone(), e.end_a.clone()) })
    };
    let weight = |vertex: &str, circle: &str| -> Option<BigInt> {
        let v = phi.vertex(vertex)?;
        let c = v.circle(circle)?;
        let w = if v.kind.is_seifert() { c.seifert_intersection } else { c.cusp_degree };
        w.filter(|&w| w > 0).map(BigInt::from)
    };
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..cycle.len() {
        let (_, head) = ends(&cycle[i])?;
        let (tail, _) = ends(&cycle[(i + 1) % cycle.len()])?;
        if head.vertex != tail.vertex {
            return None;
        }
        num *= weight(&head.vertex, &head.circle)?;
        den *= weight(&tail.vertex, &tail.circle)?;
    }
    Some(BigRational::new(num, den))
}

/// Every simple cycle of the surface graph with at most `max_len` edges,
/// one representative per edge set. Loops and parallel edges count.
pub fn all_simple_cycles(phi: &PhiGraph, max_len: usize) -> Vec<Vec<Step>> {
    assert!(max_len <= 12, "cycle enumeration bound too large");
    let mut ids: Vec<&str> = phi.vertices.iter().map(|v| v.id.as_str()).collect();
    ids.sort();
    let rank: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    // (tail, head, step) for both directions of every edge
    let mut moves: Vec<(&str, &str, Step)> = Vec::new();
    for e in &phi.edges {
        moves.push((&e.end_a.vertex, &e.end_b.vertex, Step::fwd(&e.id)));
        if e.end_a.vertex != e.end_b.vertex {
            moves.push((&e.end_b.vertex, &e.end_a.vertex, Step::rev(&e.id)));
        }
    }
    moves.sort_by(|x, y| x.2.cmp(&y.2));
    let mut seen: BTreeSet<BTreeSet<String>> = BTreeSet::new();
    let mut out = Vec::new();

    fn extend<'a>(
        start: &'a str,
        at: &'a str,
        rank: &BTreeMap<&str, usize>,
        moves: &[(&'a str, &'a str, Step)],
        path: &mut Vec<Step>,
        visited: &mut BTreeSet<&'a str>,
        max_len: usize,
        seen: &mut BTreeSet<BTreeSet<String>>,
        out: &mut Vec<Vec<Step>>,
    ) {
        for (tail, head, step) in moves {
            if *tail != at || path.iter().any(|s| s.edge == step.edge) {
                continue;
            }
            if rank[head] < rank[start] {
                continue;
            }
            if *head == start {
                path.push(step.clone());
                let key: BTreeSet<String> = path.iter().map(|s| s.edge.clone()).collect();
                if seen.insert(key) {
                    out.push(path.clone());
                }
                path.pop();
            } else if path.len() + 1 < max_len && !visited.contains(head) {
                visited.insert(head);
                path.push(step.clone());
                extend(start, head, rank, moves, path, visited, max_len, seen, out);
                path.pop();
                visited.remove(head);
            }
        }
    }

    for &start in &ids {
        let mut visited = BTreeSet::from([start]);
        extend(start, start, &rank, &moves, &mut Vec::new(), &mut visited, max_len, &mut seen, &mut out);
    }
    out
}

/// One row of the exhaustive LERF table.
#[derive(Debug, Clone)]
pub struct LerfRow {
    pub graph: JsjGraph,
    pub lerf: bool,
    /// Smallest edge id joining two pieces with only torus boundary.
    pub witness: Option<String>,
}

/// All connected labelled decomposition graphs with at most `max_pieces`
/// pieces and `max_edges` edges (loops and multi-edges included), each piece
/// one of the three kinds, together with the verdict of the adjacency rule:
/// the group is LERF exactly when every pair of adjacent pieces contains a
/// piece with a boundary component of genus at least two.
pub fn exhaustive_lerf_truth_table(max_pieces: usize, max_edges: usize) -> Vec<LerfRow> {
    let kinds = [PieceKind::SeifertFibered, PieceKind::HyperbolicFiniteVolume, PieceKind::HyperbolicHigherGenus];
    let mut rows = Vec::new();
    for n in 1..=max_pieces {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let mut multisets = Vec::new();
        multisets_up_to(&pairs, max_edges, 0, &mut Vec::new(), &mut multisets);
        for edges in &multisets {
            if !connected(n, edges) {
                continue;
            }
            for code in 0..kinds.len().pow(n as u32) {
                let mut c = code;
                let assign: Vec<PieceKind> = (0..n)
                    .map(|_| {
                        let k = kinds[c % kinds.len()];
                        c /= kinds.len();
                        k
                    })
                    .collect();
                rows.push(build_row(&assign, edges));
            }
        }
    }
    rows
}

fn multisets_up_to(
    pairs: &[(usize, usize)],
    left: usize,
    from: usize,
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    out.push(cur.clone());
    if left == 0 {
        return;
    }
    for i in from..pairs.len() {
        cur.push(pairs[i]);
        multisets_up_to(pairs, left - 1, i, cur, out);
        cur.pop();
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            if reach[a] != reach[b] {
                reach[a] = true;
                reach[b] = true;
                changed = true;
            }
        }
    }
    reach.into_iter().all(|r| r)
}

fn build_row(kinds: &[PieceKind], edges: &[(usize, usize)]) -> LerfRow {
    let n = kinds.len();
    let mut tori: Vec<usize> = vec![0; n];
    let mut jsj_edges = Vec::new();
    let swap = Gluing::new([[0, 1], [1, 0]]).expect("unimodular");
    for (i, &(a, b)) in edges.iter().enumerate() {
        let mut end = |p: usize| {
            tori[p] += 1;
            EdgeEnd::new(&format!("p{p}"), &format!("t{}", tori[p]))
        };
        let (ea, eb) = (end(a), end(b));
        jsj_edges.push(Edge { id: format!("e{i}"), end_a: ea, end_b: eb, gluing: swap });
    }
    let fiber = Slope::new(1, 0).expect("primitive");
    let pieces = (0..n)
        .map(|p| {
            let mut boundary: Vec<BoundaryComponent> =
                (1..=tori[p]).map(|t| BoundaryComponent { id: format!("t{t}"), genus: 1 }).collect();
            if kinds[p] == PieceKind::HyperbolicHigherGenus {
                boundary.push(BoundaryComponent { id: "s".into(), genus: 2 });
            }
            let fiber_slopes = if kinds[p] == PieceKind::SeifertFibered {
                (1..=tori[p]).map(|t| (format!("t{t}"), fiber)).collect()
            } else {
                BTreeMap::new()
            };
            Piece { id: format!("p{p}"), kind: kinds[p], boundary, fiber_slopes, degeneracy_slopes: BTreeMap::new() }
        })
        .collect();
    let graph = JsjGraph { pieces, edges: jsj_edges, is_sol: false, trivial_decomposition: edges.is_empty() };

    // the rule, stated on pairs of adjacent pieces
    let higher = |p: usize| kinds[p] == PieceKind::HyperbolicHigherGenus;
    let mut bad_pairs = BTreeSet::new();
    for &(a, b) in edges {
        if !higher(a) && !higher(b) {
            bad_pairs.insert((a, b));
        }
    }
    let witness = if graph.trivial_decomposition {
        None
    } else {
        let mut ids: Vec<String> = edges
            .iter()
            .enumerate()
            .filter(|(_, p)| bad_pairs.contains(p))
            .map(|(i, _)| format!("e{i}"))
            .collect();
        ids.sort();
        ids.into_iter().next()
    };
    LerfRow { graph, lerf: witness.is_none(), witness }
}
