use std::path::PathBuf;
use std::process::{Command, Output};

fn hilbw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbw"))
        .args(args)
        .env_remove("HILBW_SURFACE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("hilbw-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn intersect_json() {
    let o = hilbw(&["intersect", "--k", "2", "--n", "2", "--surface", "p2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "-1/4");
    assert_eq!(v["oracle"], "-1/4");
    assert_eq!(v["match"], true);
}

#[test]
fn intersect_grid_csv_is_surface_independent() {
    let a = hilbw(&["intersect", "--grid", "3", "--surface", "k3", "--format", "csv"]);
    let b = hilbw(&["intersect", "--grid", "3", "--surface", "p1xp1", "--format", "csv"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("k,n,value,oracle,match\n"));
}

#[test]
fn intersect_rejects_bad_degree() {
    let o = hilbw(&["intersect", "--k", "1", "--n", "2", "--surface", "p2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn omega_values() {
    let o = hilbw(&["omega", "--p", "0", "--q", "0", "--m", "5", "--n", "-3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn verify_exit_codes() {
    let ok = hilbw(&["verify", "--suite", "heis", "--surface", "abelian", "--cutoff", "6", "--format", "jsonl"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).lines().all(|l| l.contains("\"pass\":true")));
    let bad = hilbw(&["verify", "--suite", "lem53", "--surface", "p2", "--mutate", "--format", "jsonl"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(hilbw(&["verify", "--suite", "nope", "--surface", "p2"]).status.code(), Some(2));
    assert_eq!(hilbw(&["verify", "--suite", "heis"]).status.code(), Some(2));
    assert_eq!(hilbw(&["verify", "--surface", "p2", "--ring-file", "x.json"]).status.code(), Some(2));
    assert_eq!(hilbw(&["verify", "--suite", "thm57", "--surface", "p2"]).status.code(), Some(2));
}

#[test]
fn verify_output_independent_of_jobs() {
    let dir = scratch_dir("jobs");
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    for (jobs, path) in [("1", &a), ("3", &b)] {
        let o = hilbw(&[
            "--jobs", jobs, "verify", "--suite", "vir", "--surface", "p1xp1", "--m", "2", "--n", "2",
            "--format", "json", "--output", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ring_dump_round_trip_and_surface_dir() {
    let dir = scratch_dir("ring");
    let dumped = stdout(&hilbw(&["ring", "--surface", "k3", "--dump"]));
    let mut def: serde_json::Value = serde_json::from_str(&dumped).unwrap();
    def["name"] = "mine".into();
    std::fs::write(dir.join("mine.json"), serde_json::to_string(&def).unwrap()).unwrap();
    let path = dir.join("k3.json");
    std::fs::write(&path, &dumped).unwrap();
    let again = stdout(&hilbw(&["ring", "--ring-file", path.to_str().unwrap(), "--dump"]));
    assert_eq!(dumped, again);
    let o = Command::new(env!("CARGO_BIN_EXE_hilbw"))
        .args(["intersect", "--k", "0,0", "--n", "2", "--surface", "mine", "--format", "json"])
        .env("HILBW_SURFACE_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"value\": \"1\""));
}

#[test]
fn chern_and_cup() {
    let o = hilbw(&["chern", "--k", "1", "--alpha", "x", "--n", "2", "--surface", "k3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["match"], true);
    assert_eq!(v["value"][0]["coef"], "-1/2");
    let gated = hilbw(&["chern", "--k", "1", "--alpha", "1", "--n", "2", "--surface", "p2"]);
    assert_eq!(gated.status.code(), Some(2));
    let cup = hilbw(&["cup", "--factor", "1:x", "--factor", "0:x", "--n", "3", "--surface", "p2"]);
    assert_eq!(stdout(&cup).trim(), "-1/2 a(-2;x) a(-1;x) |0>");
}

#[test]
fn dump_operator_terms() {
    let o = hilbw(&["dump", "--op", "J(2,-1;x)", "--surface", "k3", "--cutoff", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("a(-1;x) a(-1;x) a(1;x)"));
    let u = hilbw(&["dump", "--op", "L(0;1)", "--universal", "--cutoff", "2"]);
    assert_eq!(stdout(&u).trim(), "(-1)*a[(-2)^1 2^1] + (-1)*a[(-1)^1 1^1]");
    assert_eq!(hilbw(&["dump", "--op", "J(2;x)", "--surface", "k3"]).status.code(), Some(2));
}
