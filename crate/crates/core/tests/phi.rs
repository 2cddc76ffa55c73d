use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spirality_core::gen::{random_closed_walk, random_graph_cover, random_phi_graph};
use spirality_core::oracle::{all_simple_cycles, direct_spirality};
use spirality_core::phi::{
    check_mixed_definition, cycle_basis, cycle_basis_with_order, is_aspiral, is_aspiral_with_order, lift_phi,
    reverse_cycle, s_delta, spirality_on_cycle, Aspirality, Circle, CircleRef, LiftedCircle, LiftedEdge,
    LiftedVertex, PhiCover, PhiEdge, PhiVertex, PhiVertexKind,
};
use spirality_core::{PhiGraph, SpiralityValue, Step};

fn vertex(id: &str, kind: PhiVertexKind, circles: &[(&str, u64)]) -> PhiVertex {
    PhiVertex {
        id: id.into(),
        piece: format!("P{id}"),
        kind,
        circles: circles
            .iter()
            .map(|&(c, w)| Circle {
                id: c.into(),
                torus: format!("T{c}"),
                seifert_intersection: kind.is_seifert().then_some(w),
                cusp_degree: (!kind.is_seifert()).then_some(w),
                core: None,
            })
            .collect(),
    }
}

fn edge(id: &str, a: (&str, &str), b: (&str, &str)) -> PhiEdge {
    PhiEdge { id: id.into(), end_a: CircleRef::new(a.0, a.1), end_b: CircleRef::new(b.0, b.1), jsj_edge: id.into() }
}

const SVF: PhiVertexKind = PhiVertexKind::SeifertVirtuallyFibered;
const HVF: PhiVertexKind = PhiVertexKind::HypVirtuallyFibered;

fn quarter_loop() -> PhiGraph {
    PhiGraph {
        vertices: vec![vertex("v1", SVF, &[("a", 1), ("b", 2)]), vertex("v2", SVF, &[("a", 2), ("b", 1)])],
        edges: vec![edge("e1", ("v2", "a"), ("v1", "a")), edge("e2", ("v1", "b"), ("v2", "b"))],
    }
}

fn theta() -> PhiGraph {
    PhiGraph {
        vertices: vec![
            vertex("u", SVF, &[("a", 1), ("b", 1), ("c", 1)]),
            vertex("w", SVF, &[("a", 1), ("b", 1), ("c", 1)]),
        ],
        edges: vec![
            edge("e1", ("u", "a"), ("w", "a")),
            edge("e2", ("u", "b"), ("w", "b")),
            edge("e3", ("u", "c"), ("w", "c")),
        ],
    }
}

fn ratio(n: i64, d: i64) -> SpiralityValue {
    SpiralityValue::ratio(n, d)
}

#[test]
fn s_delta_examples() {
    let g = PhiGraph {
        vertices: vec![vertex("s", SVF, &[("x", 2), ("y", 3)]), vertex("h", HVF, &[("x", 5), ("y", 5)])],
        edges: vec![],
    };
    assert_eq!(s_delta(&g, "s", "x", "y").unwrap(), ratio(2, 3));
    assert!(s_delta(&g, "s", "x", "x").unwrap().is_one());
    assert!(s_delta(&g, "h", "x", "y").unwrap().is_one());
    assert!(s_delta(&g, "s", "x", "nope").is_err());
}

#[test]
fn spirality_examples() {
    let g = quarter_loop();
    assert!(spirality_on_cycle(&g, &[]).unwrap().is_one());
    let cycle = vec![Step::fwd("e1"), Step::fwd("e2")];
    assert_eq!(spirality_on_cycle(&g, &cycle).unwrap(), ratio(1, 4));
    assert_eq!(spirality_on_cycle(&g, &reverse_cycle(&cycle)).unwrap(), ratio(4, 1));
    assert_eq!(
        direct_spirality(&g, &cycle).unwrap(),
        BigRational::new(1.into(), 4.into()),
        "brute-force product along the explicit path"
    );
    assert_eq!(is_aspiral(&g).unwrap(), Aspirality::Spiral { cycle, value: ratio(1, 4) });
    assert!(spirality_on_cycle(&g, &[Step::fwd("e1")]).is_err());
}

#[test]
fn basis_examples() {
    let tree = PhiGraph {
        vertices: vec![vertex("a", SVF, &[("x", 1)]), vertex("b", SVF, &[("x", 3)])],
        edges: vec![edge("e1", ("a", "x"), ("b", "x"))],
    };
    assert!(cycle_basis(&tree).is_empty());
    assert!(all_simple_cycles(&tree, 12).is_empty());
    assert_eq!(is_aspiral(&tree).unwrap(), Aspirality::Aspiral);

    let looped = PhiGraph {
        vertices: vec![vertex("a", SVF, &[("x", 1), ("y", 2)])],
        edges: vec![edge("e1", ("a", "x"), ("a", "y"))],
    };
    let basis = cycle_basis(&looped);
    assert_eq!(basis.len(), 1);
    assert_eq!(basis[0].cycle, vec![Step::fwd("e1")]);
    assert_eq!(spirality_on_cycle(&looped, &basis[0].cycle).unwrap(), ratio(2, 1));

    assert_eq!(cycle_basis(&theta()).len(), 2);
    assert_eq!(all_simple_cycles(&theta(), 12).len(), 3);

    let triangle = PhiGraph {
        vertices: vec![
            vertex("a", SVF, &[("x", 1), ("y", 1)]),
            vertex("b", SVF, &[("x", 1), ("y", 1)]),
            vertex("c", SVF, &[("x", 1), ("y", 1)]),
        ],
        edges: vec![edge("e1", ("a", "y"), ("b", "x")), edge("e2", ("b", "y"), ("c", "x")), edge("e3", ("c", "y"), ("a", "x"))],
    };
    assert_eq!(all_simple_cycles(&triangle, 12).len(), 1);
    assert_eq!(is_aspiral(&triangle).unwrap(), Aspirality::Aspiral);
    assert!(is_aspiral(&PhiGraph::default()).unwrap() == Aspirality::Aspiral);
}

#[test]
fn mixed_definition_examples() {
    let mixed = |pairs: &[(u64, u64)]| PhiVertex {
        id: "m".into(),
        piece: "Pm".into(),
        kind: SVF,
        circles: pairs
            .iter()
            .enumerate()
            .map(|(i, &(si, cd))| Circle {
                id: format!("c{i}"),
                torus: format!("T{i}"),
                seifert_intersection: Some(si),
                cusp_degree: Some(cd),
                core: None,
            })
            .collect(),
    };
    assert!(check_mixed_definition(&mixed(&[(2, 6), (5, 15), (1, 3)])).unwrap());
    assert!(check_mixed_definition(&mixed(&[(2, 2), (3, 3)])).unwrap());
    assert!(!check_mixed_definition(&mixed(&[(2, 3), (3, 2)])).unwrap());
    let mut missing = mixed(&[(1, 1)]);
    missing.circles[0].cusp_degree = None;
    assert!(check_mixed_definition(&missing).is_err());
}

fn identity_cover(g: &PhiGraph) -> PhiCover {
    PhiCover {
        vertices: g
            .vertices
            .iter()
            .map(|v| LiftedVertex {
                id: v.id.clone(),
                base: v.id.clone(),
                circles: v.circles.iter().map(|c| LiftedCircle { id: c.id.clone(), base: c.id.clone(), degree: 1 }).collect(),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| LiftedEdge { id: e.id.clone(), base: e.id.clone(), end_a: e.end_a.clone(), end_b: e.end_b.clone() })
            .collect(),
    }
}

#[test]
fn cover_examples() {
    let g = quarter_loop();
    let lifted = lift_phi(&g, &identity_cover(&g)).unwrap();
    assert_eq!(lifted, g);

    let looped = PhiGraph {
        vertices: vec![vertex("a", SVF, &[("x", 1), ("y", 3)])],
        edges: vec![edge("e1", ("a", "x"), ("a", "y"))],
    };
    let circles = || {
        vec![
            LiftedCircle { id: "x".into(), base: "x".into(), degree: 1 },
            LiftedCircle { id: "y".into(), base: "y".into(), degree: 1 },
        ]
    };
    let double = PhiCover {
        vertices: vec![
            LiftedVertex { id: "a0".into(), base: "a".into(), circles: circles() },
            LiftedVertex { id: "a1".into(), base: "a".into(), circles: circles() },
        ],
        edges: vec![
            LiftedEdge { id: "f0".into(), base: "e1".into(), end_a: CircleRef::new("a0", "x"), end_b: CircleRef::new("a1", "y") },
            LiftedEdge { id: "f1".into(), base: "e1".into(), end_a: CircleRef::new("a1", "x"), end_b: CircleRef::new("a0", "y") },
        ],
    };
    let up = lift_phi(&looped, &double).unwrap();
    let (path, winding) = double.lift_closed_path(&looped, &[Step::fwd("e1")], "a0").unwrap();
    assert_eq!(winding, 2);
    assert_eq!(path, vec![Step::fwd("f0"), Step::fwd("f1")]);
    assert_eq!(spirality_on_cycle(&up, &path).unwrap(), ratio(9, 1));
    assert_eq!(spirality_on_cycle(&looped, &[Step::fwd("e1")]).unwrap().pow(2), ratio(9, 1));
}

/// Chord exponents of a closed path: +1 for each forward chord step, -1 for each reverse one.
fn chord_product(g: &PhiGraph, order: &[&str], cycle: &[Step]) -> SpiralityValue {
    let basis: BTreeMap<String, SpiralityValue> = cycle_basis_with_order(g, order)
        .into_iter()
        .map(|fc| {
            let v = spirality_on_cycle(g, &fc.cycle).unwrap();
            (fc.chord, v)
        })
        .collect();
    let mut value = SpiralityValue::one();
    for s in cycle {
        if let Some(v) = basis.get(&s.edge) {
            value = value * if s.forward { v.clone() } else { v.inverse() };
        }
    }
    value
}

fn shuffled_order<R: Rng>(rng: &mut R, g: &PhiGraph) -> Vec<String> {
    let mut ids: Vec<String> = g.edges.iter().map(|e| e.id.clone()).collect();
    ids.shuffle(rng);
    ids
}

#[test]
fn cycles_decompose_over_any_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..120 {
        let g = random_phi_graph(&mut rng, 6, 8, false);
        let order = shuffled_order(&mut rng, &g);
        let order: Vec<&str> = order.iter().map(String::as_str).collect();
        let components = {
            let mut seen = std::collections::BTreeSet::new();
            let mut count = 0;
            for v in &g.vertices {
                if seen.insert(v.id.clone()) {
                    count += 1;
                    let mut stack = vec![v.id.clone()];
                    while let Some(x) = stack.pop() {
                        for e in &g.edges {
                            for (p, q) in [(&e.end_a.vertex, &e.end_b.vertex), (&e.end_b.vertex, &e.end_a.vertex)] {
                                if *p == x && seen.insert(q.clone()) {
                                    stack.push(q.clone());
                                }
                            }
                        }
                    }
                }
            }
            count
        };
        assert_eq!(cycle_basis_with_order(&g, &order).len() + g.vertices.len(), g.edges.len() + components);
        for cycle in all_simple_cycles(&g, 8) {
            let direct = direct_spirality(&g, &cycle).unwrap();
            let fast = spirality_on_cycle(&g, &cycle).unwrap();
            assert_eq!(fast.as_rational(), &direct);
            assert_eq!(chord_product(&g, &order, &cycle), fast);
        }
        let verdict = |a: &Aspirality| matches!(a, Aspirality::Aspiral);
        assert_eq!(verdict(&is_aspiral(&g).unwrap()), verdict(&is_aspiral_with_order(&g, &order).unwrap()));
    }
}

#[test]
fn walks_multiply_and_invert() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..120 {
        let g = random_phi_graph(&mut rng, 6, 8, true);
        let start = g.edges[0].end_a.vertex.clone();
        let len = rng.gen_range(1..6);
        let w1 = random_closed_walk(&mut rng, &g, &start, len);
        let len = rng.gen_range(1..6);
        let w2 = random_closed_walk(&mut rng, &g, &start, len);
        let v1 = spirality_on_cycle(&g, &w1).unwrap();
        let v2 = spirality_on_cycle(&g, &w2).unwrap();
        let joined: Vec<Step> = w1.iter().chain(&w2).cloned().collect();
        assert_eq!(spirality_on_cycle(&g, &joined).unwrap(), v1.clone() * v2);
        assert_eq!(spirality_on_cycle(&g, &reverse_cycle(&w1)).unwrap(), v1.inverse());
        assert_eq!(direct_spirality(&g, &w1).unwrap(), v1.as_rational().clone());
    }
}

#[test]
fn covers_raise_values_to_the_winding() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let g = random_phi_graph(&mut rng, 5, 7, true);
        let degree = rng.gen_range(2..=3);
        let cover = random_graph_cover(&mut rng, &g, degree).expect("connected cover");
        let up = lift_phi(&g, &cover).unwrap();
        for fc in cycle_basis(&g) {
            let first = g.edge(&fc.cycle[0].edge).unwrap();
            let tail = if fc.cycle[0].forward { &first.end_a.vertex } else { &first.end_b.vertex };
            let start = format!("{tail}.0");
            let (path, winding) = cover.lift_closed_path(&g, &fc.cycle, &start).unwrap();
            let base = spirality_on_cycle(&g, &fc.cycle).unwrap();
            assert_eq!(spirality_on_cycle(&up, &path).unwrap(), base.pow(winding as i32));
        }
        let asp = |x: &PhiGraph| matches!(is_aspiral(x).unwrap(), Aspirality::Aspiral);
        assert_eq!(asp(&g), asp(&up));
    }
}
