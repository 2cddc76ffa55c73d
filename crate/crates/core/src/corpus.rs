//! The oracle-derived part of the fixture corpus. Every file is a pure
//! function of the parameters recorded inside it, so the committed copies can
//! be regenerated and compared byte for byte.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::gen::{random_instance, InstanceOptions};
use crate::io::{instance_digest, serialize_certificate, serialize_instance, CertificateFile};
use crate::lattice::{compat_constants, ScaledSlope, Slope, Vector};
use crate::oracle::{
    all_simple_cycles, direct_spirality, exhaustive_lerf_truth_table, index_by_counting,
    lattice_membership_by_enumeration,
};
use crate::phi::{is_aspiral, Aspirality, Circle, CircleRef, PhiEdge, PhiGraph, PhiVertex, PhiVertexKind, Step};
use crate::semicover::{assemble, Assembly};

fn seifert(id: &str, circles: &[(&str, u64)]) -> PhiVertex {
    PhiVertex {
        id: id.into(),
        piece: format!("P{id}"),
        kind: PhiVertexKind::SeifertVirtuallyFibered,
        circles: circles
            .iter()
            .map(|&(c, w)| Circle {
                id: c.into(),
                torus: format!("T{c}"),
                seifert_intersection: Some(w),
                cusp_degree: None,
                core: None,
            })
            .collect(),
    }
}

fn edge(id: &str, a: (&str, &str), b: (&str, &str)) -> PhiEdge {
    PhiEdge { id: id.into(), end_a: CircleRef::new(a.0, a.1), end_b: CircleRef::new(b.0, b.1), jsj_edge: id.into() }
}

fn oracle_values() -> Value {
    let v = Vector::new;
    let pts = |s: &std::collections::BTreeSet<(i64, i64)>| s.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>();

    let quarter = PhiGraph {
        vertices: vec![seifert("v1", &[("a", 1), ("b", 2)]), seifert("v2", &[("a", 2), ("b", 1)])],
        edges: vec![edge("e1", ("v2", "a"), ("v1", "a")), edge("e2", ("v1", "b"), ("v2", "b"))],
    };
    let quarter_value = direct_spirality(&quarter, &[Step::fwd("e1"), Step::fwd("e2")]).expect("closed path");
    let theta = PhiGraph {
        vertices: vec![seifert("u", &[("a", 1), ("b", 1), ("c", 1)]), seifert("w", &[("a", 1), ("b", 1), ("c", 1)])],
        edges: vec![edge("e1", ("u", "a"), ("w", "a")), edge("e2", ("u", "b"), ("w", "b")), edge("e3", ("u", "c"), ("w", "c"))],
    };

    // c = (1,1), t = (0,1), t' = (1,0): compare the two spans for alpha in 1..=10
    let c = ScaledSlope::unit(Slope::new(1, 1).expect("primitive"));
    let (b, b2) = compat_constants(&c, &Slope::new(0, 1).expect("primitive"), &Slope::new(1, 0).expect("primitive"))
        .expect("not parallel");
    let spans_agree = (1..=10i64).all(|alpha| {
        let l1 = lattice_membership_by_enumeration(&[v(1, 1), v(0, alpha).scale(&b)], 20);
        let l2 = lattice_membership_by_enumeration(&[v(1, 1), v(alpha, 0).scale(&b2)], 20);
        l1 == l2
    });

    let rows = exhaustive_lerf_truth_table(4, 5);
    json!({
        "index_4_0_1_1": {
            "oracle": "index_by_counting",
            "params": {"generators": [[4, 0], [1, 1]]},
            "value": index_by_counting(&v(4, 0), &v(1, 1)).to_string(),
        },
        "index_2_1_1_2": {
            "oracle": "index_by_counting",
            "params": {"generators": [[2, 1], [1, 2]]},
            "value": index_by_counting(&v(2, 1), &v(1, 2)).to_string(),
        },
        "members_2_1_1_2": {
            "oracle": "lattice_membership_by_enumeration",
            "params": {"generators": [[2, 1], [1, 2]], "bound": 3},
            "points": pts(&lattice_membership_by_enumeration(&[v(2, 1), v(1, 2)], 3)),
        },
        "members_1_1_0_3": {
            "oracle": "lattice_membership_by_enumeration",
            "params": {"generators": [[1, 1], [0, 3]], "bound": 3},
            "points": pts(&lattice_membership_by_enumeration(&[v(1, 1), v(0, 3)], 3)),
        },
        "compat_1_1": {
            "oracle": "lattice_membership_by_enumeration",
            "params": {"c": [1, 1], "t": [0, 1], "t_prime": [1, 0], "alpha": [1, 10], "bound": 20},
            "constants": [b.to_string(), b2.to_string()],
            "spans_agree": spans_agree,
        },
        "quarter_loop": {
            "oracle": "direct_spirality",
            "params": {"weights": {"v1": {"a": 1, "b": 2}, "v2": {"a": 2, "b": 1}}, "cycle": ["e1", "e2"]},
            "value": format!("{}/{}", quarter_value.numer(), quarter_value.denom()),
        },
        "theta_cycles": {
            "oracle": "all_simple_cycles",
            "params": {"vertices": 2, "parallel_edges": 3, "max_len": 12},
            "count": all_simple_cycles(&theta, 12).len(),
        },
        "lerf_table": {
            "oracle": "exhaustive_lerf_truth_table",
            "params": {"max_pieces": 4, "max_edges": 5},
            "rows": rows.len(),
            "lerf_rows": rows.iter().filter(|r| r.lerf).count(),
        },
    })
}

/// First instance in the seeded stream with a cycle in the surface graph and
/// at least `extras` extra edges whose aspirality is `aspiral`.
fn pick_instance(seed: u64, aspiral: bool, extras: usize) -> (u64, crate::Instance) {
    let opts = InstanceOptions { max_surface_vertices: 5, max_extra_vertices: 3, aspiral: Some(aspiral) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for draw in 0.. {
        let inst = random_instance(&mut rng, &opts);
        let cyclic = inst.phi.edges.len() >= inst.phi.vertices.len() && !inst.phi.edges.is_empty();
        let wanted = matches!(is_aspiral(&inst.phi), Ok(Aspirality::Aspiral)) == aspiral;
        if cyclic && wanted && inst.cover.edges.len() >= extras {
            return (draw, inst);
        }
    }
    unreachable!()
}

/// `(path under the fixture directory, contents)` for every derived fixture.
pub fn derived_fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut values = serde_json::to_string_pretty(&oracle_values()).expect("json");
    values.push('\n');
    out.push(("derived/values.json".to_string(), values));

    let mut params = Vec::new();
    for (name, seed, aspiral) in [("generated_aspiral", 7u64, true), ("generated_spiral", 8u64, false)] {
        let (draw, inst) = pick_instance(seed, aspiral, 3);
        let text = serialize_instance(&inst);
        params.push(json!({
            "file": format!("{name}.json"),
            "generator": "random_instance",
            "rng": "ChaCha8",
            "seed": seed,
            "draw": draw,
            "max_surface_vertices": 5,
            "max_extra_vertices": 3,
            "aspiral": aspiral,
        }));
        if let Ok(Assembly::Certified(cert)) = assemble(&inst) {
            let file = CertificateFile { instance_digest: instance_digest(&text).expect("valid"), certificate: cert };
            out.push((format!("{name}.cert.json"), serialize_certificate(&file)));
        }
        out.push((format!("{name}.json"), text));
    }
    let mut p = serde_json::to_string_pretty(&json!({ "instances": params })).expect("json");
    p.push('\n');
    out.push(("derived/params.json".to_string(), p));
    out.sort();
    out
}
