use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use spirality_core::corpus::derived_fixtures;
use spirality_core::gen::{random_instance, InstanceOptions};
use spirality_core::io::{
    canonical_json, instance_digest, parse_certificate, parse_instance, serialize_certificate, serialize_instance,
    CertificateFile, ParseError,
};
use spirality_core::{assemble, Assembly};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

const MINIMAL: &str = r#"{
  "version": "1",
  "jsj": {
    "is_sol": false,
    "trivial_decomposition": true,
    "pieces": [{"id": "H", "kind": "hyperbolic_finite_volume", "boundary": [{"id": "T", "genus": 1}]}],
    "edges": []
  },
  "phi": {"vertices": [], "edges": []},
  "subgroup": {"infinite_index": true}
}"#;

#[test]
fn minimal_instance_parses() {
    let inst = parse_instance(MINIMAL).unwrap();
    assert!(inst.jsj.validate().is_empty());
    assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
}

#[test]
fn rejects_bad_input() {
    let errs = parse_instance(&read("invalid_gluing.json")).unwrap_err();
    assert!(matches!(&errs[0], ParseError::Invariant(m) if m.contains("e1")), "{errs:?}");

    let errs = parse_instance(&read("dangling_reference.json")).unwrap_err();
    assert!(errs.contains(&ParseError::Reference { name: "P9".into(), at: "surface vertex v2".into() }), "{errs:?}");

    let errs = parse_instance(&read("malformed.json")).unwrap_err();
    assert!(matches!(errs[0], ParseError::Syntax { line: 5, col: 1, .. }), "{errs:?}");

    let unknown = MINIMAL.replace(r#""version": "1","#, r#""version": "1", "extra": 1,"#);
    assert!(matches!(parse_instance(&unknown).unwrap_err()[0], ParseError::Syntax { .. }));

    let missing = MINIMAL.replace(r#""is_sol": false,"#, "");
    assert!(matches!(parse_instance(&missing).unwrap_err()[0], ParseError::Syntax { .. }));

    let version = MINIMAL.replace(r#""version": "1""#, r#""version": "2""#);
    assert!(parse_instance(&version).is_err());

    let huge = read("spiral_loop.json").replacen(r#""seifert_intersection": 1"#, r#""seifert_intersection": 18446744073709551616"#, 1);
    assert!(parse_instance(&huge).is_err());
}

#[test]
fn fixtures_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.ends_with(".json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        if name.ends_with(".cert.json") {
            let cert = parse_certificate(&text).unwrap();
            assert_eq!(parse_certificate(&serialize_certificate(&cert)).unwrap(), cert);
            continue;
        }
        let Ok(inst) = parse_instance(&text) else { continue };
        let out = serialize_instance(&inst);
        assert_eq!(parse_instance(&out).unwrap(), inst, "{name}");
        assert_eq!(serialize_instance(&parse_instance(&out).unwrap()), out, "{name}");
        seen += 1;
    }
    assert!(seen >= 8, "{seen}");
}

#[test]
fn digest_ignores_layout_only() {
    let a = read("spiral_loop.json");
    let inst = parse_instance(&a).unwrap();
    let b = serialize_instance(&inst);
    assert_ne!(a, b);
    assert_eq!(instance_digest(&a).unwrap(), instance_digest(&b).unwrap());
    let compact = canonical_json(&a).unwrap();
    assert!(!compact.contains(' ') && !compact.contains('\n'));
    assert!(compact.starts_with(r#"{"jsj":{"edges":"#), "{compact}");
    let c = a.replacen(r#""seifert_intersection": 2"#, r#""seifert_intersection": 3"#, 1);
    assert_ne!(instance_digest(&a).unwrap(), instance_digest(&c).unwrap());
}

#[test]
fn certificates_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let opts = InstanceOptions { aspiral: Some(true), ..InstanceOptions::default() };
    for _ in 0..40 {
        let inst = random_instance(&mut rng, &opts);
        let text = serialize_instance(&inst);
        let Assembly::Certified(cert) = assemble(&inst).unwrap() else { panic!("aspiral instance obstructed") };
        let file = CertificateFile { instance_digest: instance_digest(&text).unwrap(), certificate: cert };
        let out = serialize_certificate(&file);
        let back = parse_certificate(&out).unwrap();
        assert_eq!(back, file);
        assert_eq!(serialize_certificate(&back), out);
    }
    assert!(parse_certificate("{}").is_err());
}

#[test]
fn derived_fixtures_are_current() {
    for (name, text) in derived_fixtures() {
        let committed = std::fs::read_to_string(fixtures().join(&name)).unwrap_or_default();
        assert!(committed == text, "fixtures/{name} is stale; rerun the regen_fixtures example");
    }
}

#[test]
fn derived_values_match_the_library() {
    use num_bigint::BigInt;
    use spirality_core::lattice::compat_constants;
    use spirality_core::{hnf, ScaledSlope, Slope, Vector};

    let values: Value = serde_json::from_str(&read("derived/values.json")).unwrap();
    let v = Vector::new;
    let num = |k: &str| values[k]["value"].as_str().unwrap().parse::<BigInt>().unwrap();
    assert_eq!(hnf(&[v(4, 0), v(1, 1)]).unwrap().index(), num("index_4_0_1_1"));
    assert_eq!(hnf(&[v(2, 1), v(1, 2)]).unwrap().index(), num("index_2_1_1_2"));

    for (key, gens) in [("members_2_1_1_2", [v(2, 1), v(1, 2)]), ("members_1_1_0_3", [v(1, 1), v(0, 3)])] {
        let l = hnf(&gens).unwrap();
        let pts: std::collections::BTreeSet<(i64, i64)> = values[key]["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_i64().unwrap(), p[1].as_i64().unwrap()))
            .collect();
        for x in -3..=3 {
            for y in -3..=3 {
                assert_eq!(l.contains(&v(x, y)), pts.contains(&(x, y)), "{key} ({x},{y})");
            }
        }
    }
    assert!(hnf(&[v(2, 1), v(1, 2)]).unwrap().contains(&v(3, 3)));

    let c = ScaledSlope::unit(Slope::new(1, 1).unwrap());
    let (b, b2) = compat_constants(&c, &Slope::new(0, 1).unwrap(), &Slope::new(1, 0).unwrap()).unwrap();
    assert_eq!(values["compat_1_1"]["constants"], serde_json::json!([b.to_string(), b2.to_string()]));
    assert_eq!(values["compat_1_1"]["spans_agree"], Value::Bool(true));
    assert_eq!(values["quarter_loop"]["value"], "1/4");
    assert_eq!(values["theta_cycles"]["count"], 3);
}
