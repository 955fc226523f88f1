use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use coarsescope::{docs, fixtures, oracle, Cover};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coarsescope"))
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec(v).unwrap()).unwrap();
    p.display().to_string()
}

fn p10_two(dir: &Path) -> (String, String, Cover) {
    let p10 = Arc::new(fixtures::path_line(10));
    let two = Cover::new(p10.clone(), "two", vec![("a".into(), (0..6).collect()), ("b".into(), (4..10).collect())]).unwrap();
    (write(dir, "p10.json", &docs::space_to_json(&p10)), write(dir, "two.json", &docs::cover_to_json(&two)), two)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

fn certificate<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["certificates"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn analyze_reports_cover_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let (space, cover, _) = p10_two(dir.path());
    let out = bin().args(["analyze", "--space", &space, "--cover", &cover]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let stats = &certificate(&r, "cover_stats")["detail"];
    assert_eq!(stats["lebesgue"], 2.0);
    assert_eq!(stats["multiplicity"], 2);
    assert_eq!(stats["mesh"], 5.0);
    assert_eq!(r["pass"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("wall_time"));
}

#[test]
fn barycentric_verdict_agrees_with_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let (space, cover, two) = p10_two(dir.path());
    let dm = oracle::distance_matrix(two.space());
    let f = oracle::barycentric(&dm, two.elements());
    for (delta, m) in [(0.5, 5.0), (0.5, 4.0), (0.2, 5.0)] {
        let expected = oracle::lipschitz_hat(&dm, &f, delta) <= delta && two.mesh() <= m;
        let out = bin()
            .args(["barycentric", "--space", &space, "--cover", &cover])
            .args(["--delta", &delta.to_string(), "--M", &m.to_string()])
            .output()
            .unwrap();
        let r = report(&out);
        assert_eq!(certificate(&r, "delta_pu")["pass"], expected, "delta {delta}, M {m}");
        assert_eq!(out.status.code(), Some(if expected { 0 } else { 1 }));
    }
}

#[test]
fn failing_certificate_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (space, cover, _) = p10_two(dir.path());
    let out_path = dir.path().join("r.json");
    let out = bin()
        .args(["barycentric", "--space", &space, "--cover", &cover, "--delta", "0.01", "--M", "1", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(r["pass"], false);
    assert_eq!(r["command"], "barycentric");
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (space, _, _) = p10_two(dir.path());
    let out = bin().args(["analyze", "--space", &space, "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format\": \"euclidean\"").unwrap();
    let out = bin().args(["analyze", "--space"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["analyze", "--space", "/nonexistent/space.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_small_passes() {
    let out = bin().args(["oracle", "--fixture", "small", "--seed", "7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(report(&out)["pass"], true);
}
