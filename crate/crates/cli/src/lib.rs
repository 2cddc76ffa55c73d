//! Command-line front end. `run_cli` is pure apart from file access so that
//! tests can drive it directly.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use spirality_core::io::{
    instance_digest, parse_certificate, parse_instance, serialize_certificate, CertificateFile, ParseError,
};
use spirality_core::jsj::lerf_prime_decomposition;
use spirality_core::phi::{cycle_basis, format_cycle, separability_verdict, spirality_on_cycle, PhiError};
use spirality_core::{assemble, verify_certificate, Assembly, Instance, LerfVerdict, PrimeLerfVerdict, SemicoverError};
use spirality_core::{Separability, Step};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_HYPOTHESES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spirality", about = "Separability of surface subgroups in graph manifold groups")]
struct Cli {
    /// Print a machine-readable JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Run on every instance file (*.json, except *.cert.json) in a directory.
    #[arg(long, global = true, value_name = "DIR")]
    each: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the manifold group is LERF. Several files are read as prime summands.
    Lerf { files: Vec<PathBuf> },
    /// Print each basis cycle of the surface graph with its spirality.
    Spirality { file: Option<PathBuf> },
    /// Decide separability of the subgroup.
    Separable { file: Option<PathBuf> },
    /// Build a semi-cover certificate, or report the spiral cycle that blocks it.
    Assemble {
        file: Option<PathBuf>,
        /// Certificate path, or a directory with --each.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check a certificate against its instance.
    Verify { file: PathBuf, cert: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Out {
    code: i32,
    lines: Vec<String>,
    errors: Vec<String>,
    report: Value,
}

impl Out {
    fn new(code: i32, line: String, report: Value) -> Out {
        Out { code, lines: vec![line], errors: Vec::new(), report }
    }

    fn failed(code: i32, errors: Vec<String>) -> Out {
        let report = json!({ "error": errors });
        Out { code, lines: Vec::new(), errors, report }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn paint(&self, word: &str, good: bool) -> String {
        if self.color {
            let c = if good { 32 } else { 31 };
            format!("\x1b[{c}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }
}

fn parse_errors(path: &Path, errs: Vec<ParseError>) -> Out {
    Out::failed(EXIT_INPUT, errs.into_iter().map(|e| format!("{}: {e}", path.display())).collect())
}

fn load(path: &Path) -> Result<(String, Instance), Out> {
    let text = fs::read_to_string(path)
        .map_err(|e| Out::failed(EXIT_INPUT, vec![format!("{}: {e}", path.display())]))?;
    let inst = parse_instance(&text).map_err(|e| parse_errors(path, e))?;
    Ok((text, inst))
}

fn steps(cycle: &[Step]) -> Value {
    Value::Array(cycle.iter().map(|s| Value::String(s.to_string())).collect())
}

fn phi_error(path: &Path, e: PhiError) -> Out {
    let code = if matches!(e, PhiError::HypothesesViolated(_)) { EXIT_HYPOTHESES } else { EXIT_INPUT };
    Out::failed(code, vec![format!("{}: {e}", path.display())])
}

fn semicover_error(path: &Path, e: SemicoverError) -> Out {
    let code = if matches!(e, SemicoverError::HypothesesViolated(_)) { EXIT_HYPOTHESES } else { EXIT_INPUT };
    Out::failed(code, vec![format!("{}: {e}", path.display())])
}

fn lerf(files: &[PathBuf], st: &Style) -> Out {
    let mut graphs = Vec::new();
    for f in files {
        match load(f) {
            Ok((_, inst)) => graphs.push(inst.jsj),
            Err(o) => return o,
        }
    }
    if graphs.len() == 1 {
        return match graphs[0].is_lerf() {
            Ok(LerfVerdict::Lerf) => Out::new(EXIT_OK, st.paint("Lerf", true), json!({ "verdict": "Lerf" })),
            Ok(LerfVerdict::NotLerf { edge }) => Out::new(
                EXIT_NEGATIVE,
                format!("{} edge={edge}", st.paint("NotLerf", false)),
                json!({ "verdict": "NotLerf", "edge": edge }),
            ),
            Err(e) => Out::failed(EXIT_INPUT, vec![format!("{}: {e}", files[0].display())]),
        };
    }
    match lerf_prime_decomposition(&graphs) {
        Ok(PrimeLerfVerdict::Lerf) => Out::new(EXIT_OK, st.paint("Lerf", true), json!({ "verdict": "Lerf" })),
        Ok(PrimeLerfVerdict::NotLerf { summand, edge }) => {
            let s = files[summand].display().to_string();
            Out::new(
                EXIT_NEGATIVE,
                format!("{} summand={s} edge={edge}", st.paint("NotLerf", false)),
                json!({ "verdict": "NotLerf", "summand": s, "edge": edge }),
            )
        }
        Err(e) => Out::failed(EXIT_INPUT, vec![e.to_string()]),
    }
}

fn spirality(file: &Path) -> Out {
    let inst = match load(file) {
        Ok((_, i)) => i,
        Err(o) => return o,
    };
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for fc in cycle_basis(&inst.phi) {
        match spirality_on_cycle(&inst.phi, &fc.cycle) {
            Ok(v) => {
                lines.push(format!("{} {v}", format_cycle(&fc.cycle)));
                rows.push(json!({ "chord": fc.chord, "cycle": steps(&fc.cycle), "value": v.to_string() }));
            }
            Err(e) => return phi_error(file, e),
        }
    }
    Out { code: EXIT_OK, lines, errors: Vec::new(), report: json!({ "cycles": rows }) }
}

fn separable(file: &Path, st: &Style) -> Out {
    let inst = match load(file) {
        Ok((_, i)) => i,
        Err(o) => return o,
    };
    match separability_verdict(&inst.jsj, &inst.phi, inst.infinite_index) {
        Ok(Separability::Separable) => {
            Out::new(EXIT_OK, st.paint("Separable", true), json!({ "verdict": "Separable" }))
        }
        Ok(Separability::NotSeparable { cycle, value }) => Out::new(
            EXIT_NEGATIVE,
            format!("{} cycle={} value={value}", st.paint("NotSeparable", false), format_cycle(&cycle)),
            json!({ "verdict": "NotSeparable", "cycle": steps(&cycle), "value": value.to_string() }),
        ),
        Err(e) => phi_error(file, e),
    }
}

fn assemble_cmd(file: &Path, out: Option<&Path>, st: &Style) -> Out {
    let (text, inst) = match load(file) {
        Ok(x) => x,
        Err(o) => return o,
    };
    match assemble(&inst) {
        Ok(Assembly::Certified(certificate)) => {
            let digest = instance_digest(&text).expect("already parsed");
            let body = serialize_certificate(&CertificateFile { instance_digest: digest, certificate: certificate.clone() });
            let report = json!({
                "verdict": "Certified",
                "vertices": certificate.vertices.len(),
                "edges": certificate.edges.len(),
                "global_constant": certificate.sheet.global.to_string(),
            });
            match out {
                Some(p) => {
                    if let Err(e) = fs::write(p, &body) {
                        return Out::failed(EXIT_INPUT, vec![format!("{}: {e}", p.display())]);
                    }
                    Out::new(
                        EXIT_OK,
                        format!(
                            "{} vertices={} edges={}",
                            st.paint("Certified", true),
                            certificate.vertices.len(),
                            certificate.edges.len()
                        ),
                        report,
                    )
                }
                None => Out { code: EXIT_OK, lines: vec![body.trim_end().to_string()], errors: Vec::new(), report },
            }
        }
        Ok(Assembly::Obstructed(o)) => Out::new(
            EXIT_NEGATIVE,
            format!(
                "{} chord={} cycle={} value={} index_a={} index_b={}",
                st.paint("SpiralObstruction", false),
                o.chord,
                format_cycle(&o.cycle),
                o.value,
                o.index_a,
                o.index_b
            ),
            json!({
                "verdict": "SpiralObstruction",
                "chord": o.chord,
                "cycle": steps(&o.cycle),
                "value": o.value.to_string(),
                "index_a": o.index_a.to_string(),
                "index_b": o.index_b.to_string(),
            }),
        ),
        Err(e) => semicover_error(file, e),
    }
}

fn verify_cmd(file: &Path, cert: &Path, st: &Style) -> Out {
    let (text, inst) = match load(file) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let ctext = match fs::read_to_string(cert) {
        Ok(t) => t,
        Err(e) => return Out::failed(EXIT_INPUT, vec![format!("{}: {e}", cert.display())]),
    };
    let cf = match parse_certificate(&ctext) {
        Ok(c) => c,
        Err(e) => return parse_errors(cert, e),
    };
    let digest = instance_digest(&text).expect("already parsed");
    let mut problems = Vec::new();
    if cf.instance_digest != digest {
        problems.push("certificate was issued for a different instance".to_string());
    }
    match verify_certificate(&inst, &cf.certificate) {
        Ok(v) => problems.extend(v.iter().map(|x| x.to_string())),
        Err(e) => return semicover_error(file, e),
    }
    if problems.is_empty() {
        Out::new(EXIT_OK, st.paint("Valid", true), json!({ "verdict": "Valid" }))
    } else {
        let mut lines = vec![st.paint("Invalid", false)];
        lines.extend(problems.iter().map(|p| format!("  {p}")));
        Out { code: EXIT_NEGATIVE, lines, errors: Vec::new(), report: json!({ "verdict": "Invalid", "violations": problems }) }
    }
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".cert.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn single(command: &Command, file: &Path, out: Option<&Path>, st: &Style) -> Out {
    match command {
        Command::Lerf { .. } => lerf(&[file.to_path_buf()], st),
        Command::Spirality { .. } => spirality(file),
        Command::Separable { .. } => separable(file, st),
        Command::Assemble { .. } => assemble_cmd(file, out, st),
        Command::Verify { .. } => unreachable!("verify takes explicit files"),
    }
}

fn finish(outs: Vec<(Option<String>, Out)>, as_json: bool) -> CliOutput {
    let code = outs.iter().map(|(_, o)| o.code).max().unwrap_or(EXIT_OK);
    let mut stdout = String::new();
    let mut stderr = String::new();
    for (_, o) in &outs {
        for e in &o.errors {
            stderr.push_str(e);
            stderr.push('\n');
        }
    }
    if as_json {
        let report = match outs.as_slice() {
            [(None, o)] => o.report.clone(),
            _ => Value::Array(
                outs.iter()
                    .map(|(f, o)| json!({ "file": f, "exit": o.code, "report": o.report }))
                    .collect(),
            ),
        };
        stdout.push_str(&serde_json::to_string_pretty(&report).expect("json"));
        stdout.push('\n');
    } else {
        for (f, o) in &outs {
            for line in &o.lines {
                if let Some(f) = f {
                    stdout.push_str(f);
                    stdout.push_str(": ");
                }
                stdout.push_str(line);
                stdout.push('\n');
            }
        }
    }
    CliOutput { code, stdout, stderr }
}

/// Runs the command line `argv` (including the program name) without color.
pub fn run_cli<S: AsRef<str>>(argv: &[S]) -> CliOutput {
    run_cli_with(argv, false)
}

pub fn run_cli_with<S: AsRef<str>>(argv: &[S], color: bool) -> CliOutput {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CliOutput { code, stdout: text, stderr: String::new() }
            } else {
                CliOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let st = Style { color: color && !cli.json };
    let usage = |m: &str| CliOutput { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {m}\n") };

    if let Some(dir) = &cli.each {
        let given = match &cli.command {
            Command::Lerf { files } => !files.is_empty(),
            Command::Spirality { file } | Command::Separable { file } | Command::Assemble { file, .. } => file.is_some(),
            Command::Verify { .. } => return usage("--each is not supported for verify"),
        };
        if given {
            return usage("--each replaces the FILE argument");
        }
        let files = match instance_files(dir) {
            Ok(f) => f,
            Err(e) => return usage(&e),
        };
        let out_dir = match &cli.command {
            Command::Assemble { out: Some(d), .. } => {
                if !d.is_dir() {
                    return usage("with --each, --out must be an existing directory");
                }
                Some(d.clone())
            }
            _ => None,
        };
        let outs = files
            .iter()
            .map(|f| {
                let target = out_dir.as_ref().map(|d| {
                    let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                    d.join(format!("{stem}.cert.json"))
                });
                (Some(f.display().to_string()), single(&cli.command, f, target.as_deref(), &st))
            })
            .collect();
        return finish(outs, cli.json);
    }

    let out = match &cli.command {
        Command::Lerf { files } if files.is_empty() => return usage("lerf needs at least one FILE"),
        Command::Lerf { files } => lerf(files, &st),
        Command::Spirality { file: Some(f) } => spirality(f),
        Command::Separable { file: Some(f) } => separable(f, &st),
        Command::Assemble { file: Some(f), out } => assemble_cmd(f, out.as_deref(), &st),
        Command::Verify { file, cert } => verify_cmd(file, cert, &st),
        _ => return usage("missing FILE argument"),
    };
    finish(vec![(None, out)], cli.json)
}
