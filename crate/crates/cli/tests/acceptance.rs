//! Acceptance suite. One PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails. Counts, seeds and time limits are fixed below.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spirality_core::gen::{random_closed_walk, random_graph_cover, random_instance, random_phi_graph, InstanceOptions};
use spirality_core::io::{parse_certificate, parse_instance, serialize_certificate, serialize_instance};
use spirality_core::lattice::compat_constants;
use spirality_core::oracle::{all_simple_cycles, direct_spirality, exhaustive_lerf_truth_table, same_span};
use spirality_core::phi::{
    check_mixed_definition, cycle_basis, cycle_basis_with_order, is_aspiral, is_aspiral_with_order, lift_phi,
    reverse_cycle, spirality_on_cycle, Aspirality, Circle, PhiVertex, PhiVertexKind,
};
use spirality_core::{
    assemble, span2, verify_certificate, Assembly, LerfVerdict, PhiGraph, ScaledSlope, Slope, SpiralityValue, Step,
    Vector,
};

const TRIPLES: usize = 1000;
const ALPHAS: std::ops::RangeInclusive<i64> = 1..=10;
const COORD: i64 = 9;
const GRAPHS: usize = 500;
const GRAPH_VERTICES: usize = 8;
const GRAPH_EDGES: usize = 10;
const CYCLE_PAIRS: usize = 500;
const INSTANCES: usize = 500;
const COVERS: usize = 200;
const MIXED_SETS: usize = 200;
const CLI_RUNS: usize = 3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().expect("fixture directory")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_compat_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let coord = |rng: &mut ChaCha8Rng| rng.gen_range(-COORD..=COORD);
    let mut done = 0;
    while done < TRIPLES {
        let c = Vector::new(coord(&mut rng), coord(&mut rng));
        let (Ok(t), Ok(t2)) = (Slope::new(coord(&mut rng), coord(&mut rng)), Slope::new(coord(&mut rng), coord(&mut rng)))
        else {
            continue;
        };
        let Ok(c) = ScaledSlope::of_vector(&c) else { continue };
        if c.slope.is_parallel(&t) || c.slope.is_parallel(&t2) {
            continue;
        }
        let (b, b2) = compat_constants(&c, &t, &t2).map_err(|e| e.to_string())?;
        for alpha in ALPHAS {
            let x = ScaledSlope::new(alpha * &b, t).map_err(|e| e.to_string())?;
            let y = ScaledSlope::new(alpha * &b2, t2).map_err(|e| e.to_string())?;
            let l1 = span2(&c, &x).map_err(|e| e.to_string())?;
            let l2 = span2(&c, &y).map_err(|e| e.to_string())?;
            ensure(l1 == l2, || format!("c={:?} t={t} t'={t2} alpha={alpha}: {l1} != {l2}", c))?;
            let (cv, xv, yv) = (c.vector(), x.vector(), y.vector());
            ensure(same_span((&cv, &xv), (&cv, &yv)), || format!("oracle disagrees at c={c:?} t={t} t'={t2} alpha={alpha}"))?;
        }
        done += 1;
    }
    Ok(format!("{TRIPLES} triples, alpha in {ALPHAS:?}, coordinates in [-{COORD},{COORD}]"))
}

fn c2_lerf_table() -> Outcome {
    let rows = exhaustive_lerf_truth_table(4, 5);
    for row in &rows {
        let got = row.graph.is_lerf().map_err(|e| e.to_string())?;
        let agrees = match (&got, &row.witness) {
            (LerfVerdict::Lerf, None) => row.lerf,
            (LerfVerdict::NotLerf { edge }, Some(w)) => !row.lerf && edge == w,
            _ => false,
        };
        ensure(agrees, || format!("{:?}: is_lerf {got:?}, table {}", row.graph, row.lerf))?;
    }
    let spot = [
        ("graph_manifold.json", LerfVerdict::NotLerf { edge: "e1".into() }),
        ("mixed_tori.json", LerfVerdict::NotLerf { edge: "e1".into() }),
        ("higher_genus.json", LerfVerdict::Lerf),
    ];
    for (name, want) in spot {
        let text = std::fs::read_to_string(fixtures().join(name)).map_err(|e| e.to_string())?;
        let inst = parse_instance(&text).map_err(|e| format!("{name}: {e:?}"))?;
        let got = inst.jsj.is_lerf().map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{name}: {got} instead of {want}"))?;
    }
    Ok(format!("{} labelled graphs (<= 4 pieces, <= 5 edges), 3 fixture spot checks", rows.len()))
}

fn chord_product(g: &PhiGraph, order: &[&str], cycle: &[Step]) -> Result<SpiralityValue, String> {
    let mut basis = BTreeMap::new();
    for fc in cycle_basis_with_order(g, order) {
        basis.insert(fc.chord, spirality_on_cycle(g, &fc.cycle).map_err(|e| e.to_string())?);
    }
    let mut value = SpiralityValue::one();
    for s in cycle {
        if let Some(v) = basis.get(&s.edge) {
            value = value * if s.forward { v.clone() } else { v.inverse() };
        }
    }
    Ok(value)
}

fn shuffled_ids(rng: &mut ChaCha8Rng, g: &PhiGraph) -> Vec<String> {
    let mut ids: Vec<String> = g.edges.iter().map(|e| e.id.clone()).collect();
    ids.shuffle(rng);
    ids
}

fn aspiral(a: &Aspirality) -> bool {
    matches!(a, Aspirality::Aspiral)
}

fn c3_well_defined() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cycles = 0;
    for i in 0..GRAPHS {
        let g = random_phi_graph(&mut rng, GRAPH_VERTICES, GRAPH_EDGES, false);
        let o1 = shuffled_ids(&mut rng, &g);
        let o2 = shuffled_ids(&mut rng, &g);
        let o1: Vec<&str> = o1.iter().map(String::as_str).collect();
        let o2: Vec<&str> = o2.iter().map(String::as_str).collect();
        for cycle in all_simple_cycles(&g, 12) {
            let direct = direct_spirality(&g, &cycle).ok_or("direct evaluation failed")?;
            let fast = spirality_on_cycle(&g, &cycle).map_err(|e| e.to_string())?;
            let p1 = chord_product(&g, &o1, &cycle)?;
            let p2 = chord_product(&g, &o2, &cycle)?;
            ensure(fast.as_rational() == &direct && p1 == fast && p2 == fast, || {
                format!("graph {i}, cycle {cycle:?}: direct {direct}, evaluated {fast}, chords {p1} / {p2}")
            })?;
            cycles += 1;
        }
        let a1 = is_aspiral_with_order(&g, &o1).map_err(|e| e.to_string())?;
        let a2 = is_aspiral_with_order(&g, &o2).map_err(|e| e.to_string())?;
        ensure(aspiral(&a1) == aspiral(&a2), || format!("graph {i}: verdicts differ between spanning trees"))?;
    }
    Ok(format!("{GRAPHS} graphs (<= {GRAPH_VERTICES} vertices, <= {GRAPH_EDGES} edges), {cycles} simple cycles"))
}

fn c4_homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..CYCLE_PAIRS {
        let g = random_phi_graph(&mut rng, GRAPH_VERTICES, GRAPH_EDGES, true);
        let start = g.vertices.choose(&mut rng).expect("vertices").id.clone();
        let (l1, l2) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let w1 = random_closed_walk(&mut rng, &g, &start, l1);
        let w2 = random_closed_walk(&mut rng, &g, &start, l2);
        let eval = |w: &[Step]| spirality_on_cycle(&g, w).map_err(|e| e.to_string());
        let (v1, v2) = (eval(&w1)?, eval(&w2)?);
        let joined: Vec<Step> = w1.iter().chain(&w2).cloned().collect();
        ensure(eval(&joined)? == v1.clone() * v2.clone(), || format!("pair {i}: concatenation"))?;
        ensure(eval(&reverse_cycle(&w1))? == v1.inverse(), || format!("pair {i}: reversal"))?;
        ensure(eval(&reverse_cycle(&w2))? == v2.inverse(), || format!("pair {i}: reversal"))?;
    }
    Ok(format!("{CYCLE_PAIRS} pairs of closed walks"))
}

fn c5_constructive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut certified, mut obstructed) = (0, 0);
    for i in 0..INSTANCES {
        let inst = random_instance(&mut rng, &InstanceOptions::default());
        let a = is_aspiral(&inst.phi).map_err(|e| e.to_string())?;
        match assemble(&inst).map_err(|e| format!("instance {i}: {e}"))? {
            Assembly::Certified(cert) => {
                ensure(aspiral(&a), || format!("instance {i}: certified but spiral"))?;
                let bad = verify_certificate(&inst, &cert).map_err(|e| e.to_string())?;
                ensure(bad.is_empty(), || format!("instance {i}: {} violations, first {}", bad.len(), bad[0]))?;
                certified += 1;
            }
            Assembly::Obstructed(ob) => {
                ensure(!aspiral(&a), || format!("instance {i}: obstructed but aspiral"))?;
                let v = spirality_on_cycle(&inst.phi, &ob.cycle).map_err(|e| e.to_string())?;
                ensure(!v.is_one() && v == ob.value, || format!("instance {i}: obstruction cycle evaluates to {v}"))?;
                obstructed += 1;
            }
        }
    }
    ensure(certified > 0 && obstructed > 0, || "generator produced only one outcome".into())?;
    Ok(format!("{INSTANCES} instances, {certified} certified and verified, {obstructed} obstructed"))
}

fn c6_covers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut loops = 0;
    for i in 0..COVERS {
        let g = random_phi_graph(&mut rng, GRAPH_VERTICES, GRAPH_EDGES, true);
        let degree = rng.gen_range(2..=3);
        let cover = random_graph_cover(&mut rng, &g, degree).ok_or_else(|| format!("graph {i}: no connected cover"))?;
        let up = lift_phi(&g, &cover).map_err(|e| e.to_string())?;
        let mut paths: Vec<Vec<Step>> = cycle_basis(&g).into_iter().map(|fc| fc.cycle).collect();
        for _ in 0..3 {
            let start = g.edges[0].end_a.vertex.clone();
            let len = rng.gen_range(1..=6);
            paths.push(random_closed_walk(&mut rng, &g, &start, len));
        }
        for path in paths.iter().filter(|p| !p.is_empty()) {
            let e = g.edge(&path[0].edge).expect("edge");
            let tail = if path[0].forward { &e.end_a.vertex } else { &e.end_b.vertex };
            let sheet = rng.gen_range(0..degree);
            let (lifted, winding) =
                cover.lift_closed_path(&g, path, &format!("{tail}.{sheet}")).map_err(|e| e.to_string())?;
            let base = spirality_on_cycle(&g, path).map_err(|e| e.to_string())?;
            let top = spirality_on_cycle(&up, &lifted).map_err(|e| e.to_string())?;
            ensure(top == base.pow(winding as i32), || format!("graph {i}: {top} != ({base})^{winding}"))?;
            loops += 1;
        }
        let below = aspiral(&is_aspiral(&g).map_err(|e| e.to_string())?);
        let above = aspiral(&is_aspiral(&up).map_err(|e| e.to_string())?);
        ensure(below == above, || format!("graph {i}: aspiral {below} below, {above} above"))?;
    }
    Ok(format!("{COVERS} connected covers of degree 2 or 3, {loops} lifted loops"))
}

fn mixed_vertex(pairs: &[(u64, u64)]) -> PhiVertex {
    PhiVertex {
        id: "m".into(),
        piece: "Pm".into(),
        kind: PhiVertexKind::SeifertVirtuallyFibered,
        circles: pairs
            .iter()
            .enumerate()
            .map(|(k, &(si, cd))| Circle {
                id: format!("c{k}"),
                torus: format!("T{k}"),
                seifert_intersection: Some(si),
                cusp_degree: Some(cd),
                core: None,
            })
            .collect(),
    }
}

fn c7_mixed_definition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..MIXED_SETS {
        let n = rng.gen_range(2..=6);
        let (a, b) = (rng.gen_range(1..=5u64), rng.gen_range(1..=5u64));
        let pairs: Vec<(u64, u64)> = (0..n)
            .map(|_| {
                let w = rng.gen_range(1..=9u64);
                (a * w, b * w)
            })
            .collect();
        let ok = check_mixed_definition(&mixed_vertex(&pairs)).map_err(|e| e.to_string())?;
        ensure(ok, || format!("set {i}: proportional data {pairs:?} rejected"))?;
        for k in 0..n {
            for which in 0..2 {
                let mut bent = pairs.clone();
                if which == 0 {
                    bent[k].0 += 1;
                } else {
                    bent[k].1 += 1;
                }
                let ok = check_mixed_definition(&mixed_vertex(&bent)).map_err(|e| e.to_string())?;
                ensure(!ok, || format!("set {i}: perturbed data {bent:?} accepted"))?;
            }
        }
    }
    Ok(format!("{MIXED_SETS} proportional sets, every single-entry perturbation"))
}

fn run_binary(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_spirality"))
        .args(args)
        .env("SPIRALITY_NO_COLOR", "1")
        .output()
        .expect("spawn cli");
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

fn c8_cli() -> Outcome {
    let dir = fixtures();
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().to_string())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    let path = |n: &str| dir.join(n).to_string_lossy().to_string();

    // byte-identical output across runs
    let mut invocations: Vec<Vec<String>> = Vec::new();
    for n in names.iter().filter(|n| !n.ends_with(".cert.json")) {
        for cmd in ["lerf", "spirality", "separable", "assemble"] {
            invocations.push(vec![cmd.into(), path(n)]);
            invocations.push(vec!["--json".into(), cmd.into(), path(n)]);
        }
        let cert = n.replace(".json", ".cert.json");
        if names.contains(&cert) {
            invocations.push(vec!["verify".into(), path(n), path(&cert)]);
        }
    }
    for cmd in ["lerf", "spirality", "separable", "assemble"] {
        invocations.push(vec!["--each".into(), dir.to_string_lossy().to_string(), cmd.into()]);
    }
    for args in &invocations {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_binary(&args);
        for _ in 1..CLI_RUNS {
            ensure(run_binary(&args) == first, || format!("output of {args:?} differs between runs"))?;
        }
    }

    // parse . serialize identity
    let mut round_trips = 0;
    for n in &names {
        let text = std::fs::read_to_string(dir.join(n)).map_err(|e| e.to_string())?;
        if n.ends_with(".cert.json") {
            let c = parse_certificate(&text).map_err(|e| format!("{n}: {e:?}"))?;
            ensure(parse_certificate(&serialize_certificate(&c)).as_ref() == Ok(&c), || format!("{n}: parse(serialize(x)) != x"))?;
            round_trips += 1;
        } else if let Ok(inst) = parse_instance(&text) {
            let s = serialize_instance(&inst);
            ensure(parse_instance(&s).as_ref() == Ok(&inst), || format!("{n}: parse(serialize(x)) != x"))?;
            round_trips += 1;
        }
    }

    // exit-code contract
    let expect: &[(&[&str], i32)] = &[
        (&["lerf", "graph_manifold.json"], 1),
        (&["lerf", "higher_genus.json"], 0),
        (&["lerf", "sol.json"], 0),
        (&["lerf", "invalid_gluing.json"], 2),
        (&["lerf", "malformed.json"], 2),
        (&["spirality", "spiral_loop.json"], 0),
        (&["spirality", "dangling_reference.json"], 2),
        (&["separable", "spiral_loop.json"], 1),
        (&["separable", "aspiral.json"], 0),
        (&["separable", "dangling_reference.json"], 2),
        (&["separable", "sol.json"], 3),
        (&["separable", "finite_index.json"], 3),
        (&["assemble", "aspiral.json"], 0),
        (&["assemble", "spiral_loop.json"], 1),
        (&["assemble", "invalid_gluing.json"], 2),
        (&["assemble", "finite_index.json"], 3),
        (&["verify", "aspiral.json", "aspiral.cert.json"], 0),
        (&["verify", "spiral_loop.json", "aspiral.cert.json"], 1),
        (&["verify", "malformed.json", "aspiral.cert.json"], 2),
        (&["verify", "sol.json", "aspiral.cert.json"], 3),
    ];
    for (args, code) in expect {
        let mut full: Vec<String> = vec![args[0].to_string()];
        full.extend(args[1..].iter().map(|a| path(a)));
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        let (got, _, _) = run_binary(&full);
        ensure(got == *code, || format!("{args:?}: exit {got}, expected {code}"))?;
    }
    let (code, stdout, _) = run_binary(&["separable", &path("spiral_loop.json")]);
    let line = String::from_utf8_lossy(&stdout).trim_end().to_string();
    ensure(code == 1 && line == "NotSeparable cycle=[e1,e2] value=1/4", || format!("separable spiral_loop: {line}"))?;
    let (_, stdout, _) = run_binary(&["lerf", &path("graph_manifold.json")]);
    let line = String::from_utf8_lossy(&stdout).trim_end().to_string();
    ensure(line == "NotLerf edge=e1", || format!("lerf graph_manifold: {line}"))?;
    Ok(format!(
        "{} invocations x {CLI_RUNS} runs, {round_trips} round trips, {} exit codes",
        invocations.len(),
        expect.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("compat constants give equal spans", Some(Duration::from_secs(5)), c1_compat_constants),
        ("LERF truth table", Some(Duration::from_secs(30)), c2_lerf_table),
        ("spirality is well defined", Some(Duration::from_secs(10)), c3_well_defined),
        ("homomorphism laws", None, c4_homomorphism),
        ("assembly succeeds iff aspiral", Some(Duration::from_secs(60)), c5_constructive),
        ("covers raise values to the winding degree", None, c6_covers),
        ("mixed definition consistency", None, c7_mixed_definition),
        ("CLI determinism, round trip, exit codes", None, c8_cli),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let timing = match limit {
            Some(l) => format!("{:.2}s, limit {}s", took.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", took.as_secs_f64()),
        };
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if took > l => Err("time limit exceeded".to_string()),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({timing})", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({timing})", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
