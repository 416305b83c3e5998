use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sosforge_cli::RunManifest;
use sosforge_core::formulas::dimacs::parse_dimacs;
use sosforge_core::formulas::{gen_clique, Graph, XorSystem};
use sosforge_core::sos::certificate_from_json;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sosforge"));
    c.env_remove("SOSFORGE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn write_c5(dir: &Path) -> String {
    let p = path(dir, "c5.json");
    fs::write(&p, Graph::cycle(5).to_json()).unwrap();
    p
}

#[test]
fn gen_clique_writes_dimacs_with_varmap() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let out = path(dir.path(), "f.cnf");
    let o = run(&["gen-clique", "--graph", &g, "--k", "3", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let dimacs = fs::read_to_string(&out).unwrap();
    assert!(dimacs.lines().any(|l| l.starts_with("c varmap ")));
    let (f, _) = parse_dimacs(&dimacs).unwrap();
    assert_eq!(f.clauses(), gen_clique(&Graph::cycle(5), 3).clauses());
}

#[test]
fn check_res_prints_measures() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let (cnf, res) = (path(dir.path(), "f.cnf"), path(dir.path(), "p.res"));
    let o = run(&["refute-clique", "--graph", &g, "--k", "3", "--out", &res, "--cnf", &cnf]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["check-res", "--cnf", &cnf, "--proof", &res]);
    assert_eq!(o.status.code(), Some(0));
    let line = text(&o.stdout);
    assert!(line.starts_with("size=") && line.contains(" width=4 ") && line.contains(" domain_width="), "{line}");
}

#[test]
fn tampered_trace_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let (cnf, res) = (path(dir.path(), "f.cnf"), path(dir.path(), "p.res"));
    run(&["refute-clique", "--graph", &g, "--k", "3", "--out", &res, "--cnf", &cnf]);
    let trace = fs::read_to_string(&res).unwrap();
    // Drop the last line, so the proof no longer ends in the empty clause.
    let cut: Vec<&str> = trace.lines().collect();
    fs::write(&res, cut[..cut.len() - 1].join("\n")).unwrap();
    let o = run(&["check-res", "--cnf", &cnf, "--proof", &res]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["check-res", "--cnf", &cnf, "--proof", &res, "--allow-derivation"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn corrupted_certificate_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let (cnf, res, cert) = (path(dir.path(), "f.cnf"), path(dir.path(), "p.res"), path(dir.path(), "c.json"));
    run(&["refute-clique", "--graph", &g, "--k", "3", "--out", &res, "--cnf", &cnf]);
    let o = run(&["compile-sos", "--cnf", &cnf, "--proof", &res, "--out", &cert]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["check-sos", "--cert", &cert]).status.code(), Some(0));

    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let q = &mut v["inequality"][0]["q"][0];
    *q = format!("{} + 1", q.as_str().unwrap()).into();
    fs::write(&cert, v.to_string()).unwrap();
    let o = run(&["check-sos", "--cert", &cert]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("residual"), "{}", text(&o.stderr));
}

#[test]
fn clique_present_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "k4.json");
    fs::write(&g, Graph::complete(4).to_json()).unwrap();
    let o = run(&["refute-clique", "--graph", &g, "--k", "3", "--out", &path(dir.path(), "p.res")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("clique"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["gen-clique", "--k", "3"]).status.code(), Some(2));
    assert_eq!(run(&["check-sos", "--cert", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"), path(dir.path(), "c.json"));
    let env = bin().env("SOSFORGE_SEED", "9").args(["gen-3xor", "--n", "8", "--density", "2", "--out", &a]).output().unwrap();
    assert_eq!(env.status.code(), Some(0));
    run(&["gen-3xor", "--n", "8", "--density", "2", "--seed", "9", "--out", &b]);
    let flag = bin()
        .env("SOSFORGE_SEED", "1")
        .args(["gen-3xor", "--n", "8", "--density", "2", "--seed", "9", "--out", &c])
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(0));
    let read = |p: &str| XorSystem::from_json(&fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&b), read(&c));
}

#[test]
fn manifest_records_resolved_seed_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let (out, m) = (path(dir.path(), "x.json"), path(dir.path(), "m.json"));
    let o = bin()
        .env("SOSFORGE_SEED", "17")
        .args(["gen-3xor", "--n", "7", "--density", "3", "--out", &out, "--manifest", &m])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let manifest = RunManifest::load(Path::new(&m)).unwrap();
    assert_eq!(manifest.command, "gen-3xor");
    assert_eq!(manifest.seed, Some(17));
    assert_eq!(manifest.outputs.len(), 1);
    assert!(!manifest.parameters.iter().any(|p| p.contains("manifest")));
    // Replays without the environment variable.
    assert_eq!(run(&["reproduce", &m]).status.code(), Some(0));

    fs::write(&out, "{}").unwrap();
    // Outputs are regenerated elsewhere, so a clobbered original does not
    // matter; a changed seed does.
    assert_eq!(run(&["reproduce", &m]).status.code(), Some(0));
    let mut altered = manifest.clone();
    altered.seed = Some(18);
    fs::write(&m, altered.to_json()).unwrap();
    assert_eq!(run(&["reproduce", &m]).status.code(), Some(1));
}

#[test]
fn replay_detects_changed_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let m = path(dir.path(), "m.json");
    let o = run(&["gen-clique", "--graph", &g, "--k", "3", "--out", &path(dir.path(), "f.cnf"), "--manifest", &m]);
    assert_eq!(o.status.code(), Some(0));
    fs::write(&g, Graph::cycle(6).to_json()).unwrap();
    let o = run(&["reproduce", &m]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("input"));
}

#[test]
fn sos_search_certificate_is_checkable() {
    let dir = tempfile::tempdir().unwrap();
    let xor = path(dir.path(), "pair.json");
    fs::write(&xor, r#"{"n":3,"equations":[{"vars":[1,2,3],"rhs":false},{"vars":[1,2,3],"rhs":true}]}"#).unwrap();
    let (out, cert) = (path(dir.path(), "o.json"), path(dir.path(), "c.json"));
    let o = run(&["sos-search", "--xor", &xor, "--dmax", "4", "--out", &out, "--cert", &cert]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("result=found degree=3 exact=true"));
    let outcome: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(outcome["status"], "feasible");
    assert!(certificate_from_json(&fs::read_to_string(&cert).unwrap()).is_ok());
    assert_eq!(run(&["check-sos", "--cert", &cert]).status.code(), Some(0));

    let o = run(&["sos-search", "--xor", &xor, "--degree", "2", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let outcome: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(outcome["status"], "infeasible");
    assert!(outcome["evidence"].is_array());
}

#[test]
fn restrict_recovers_base_formula() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_c5(dir.path());
    let (base, rel) = (path(dir.path(), "f.cnf"), path(dir.path(), "rel.cnf"));
    run(&["gen-clique", "--graph", &g, "--k", "3", "--out", &base]);
    let o = run(&["relativize", "--in", &base, "--k", "3", "--m", "7", "--out", &rel]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    for seed in ["0", "1", "2"] {
        let (out, w) = (path(dir.path(), "r.cnf"), path(dir.path(), "w.json"));
        let o = run(&["restrict", "--seed", seed, "--in", &rel, "--out", &out, "--witness", &w, "--base", &base]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        let witness: serde_json::Value = serde_json::from_str(&fs::read_to_string(&w).unwrap()).unwrap();
        assert_eq!(witness["recovery"]["result"], "isomorphic");
        let (restricted, _) = parse_dimacs(&fs::read_to_string(&out).unwrap()).unwrap();
        let (original, _) = parse_dimacs(&fs::read_to_string(&base).unwrap()).unwrap();
        assert_eq!(restricted.clauses(), original.clauses());
    }
}

#[test]
fn shrink_report_to_stdout() {
    let o = run(&["shrink", "--m", "16", "--k", "4", "--l", "2", "--lprime", "8", "--trials", "500", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["trials"], 500);
    assert!(v["empirical_survival"].as_f64().unwrap() <= 1.0);
}

#[test]
fn measure_reports_formula_and_system() {
    let dir = tempfile::tempdir().unwrap();
    let (cnf, res) = (path(dir.path(), "bf.cnf"), path(dir.path(), "bf.res"));
    let o = run(&["refute-bruteforce", "--m", "2,2", "--out", &res, "--cnf", &cnf]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["measure", "--cnf", &cnf, "--proof", &res]);
    let s = text(&o.stdout);
    assert!(s.contains("clauses=") && s.contains("tree_like=true"), "{s}");

    let xor = path(dir.path(), "x.json");
    run(&["gen-3xor", "--n", "5", "--density", "1", "--seed", "2", "--out", &xor]);
    let (xg, block) = (path(dir.path(), "xg.json"), path(dir.path(), "b.json"));
    assert_eq!(run(&["gen-xor-graph", "--xor", &xor, "--k", "5", "--out", &xg]).status.code(), Some(0));
    assert_eq!(run(&["gen-block", "--graph", &xg, "--k", "5", "--out", &block]).status.code(), Some(0));
    let o = run(&["measure", "--sys", &block]);
    assert!(text(&o.stdout).contains(" degree=1 "), "{}", text(&o.stdout));
}
