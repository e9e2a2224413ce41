use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pathcover(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathcover")).args(args).current_dir(dir).env_remove("PATHCOVER_ORACLE_CAP").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    fs::write(dir.path().join(name), text).unwrap();
    name.to_string()
}

fn path_file(n: usize) -> String {
    let mut s = format!("{n} {}\n", n - 1);
    for i in 1..n {
        s += &format!("{} {i}\n", i - 1);
    }
    s
}

#[test]
fn solve_p9_covers_everything() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "p9.txt", &path_file(9));
    let o = pathcover(&["solve", &f], d.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0 1 2 3 4 5 6 7 8\ncovered=9\n");
}

#[test]
fn solve_p4_is_empty() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "p4.txt", &path_file(4));
    let o = pathcover(&["solve", &f], d.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "covered=0\n");
}

#[test]
fn solve_json_and_trace() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "p12.txt", &path_file(12));
    let o = pathcover(&["solve", &f, "--json", "--trace"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["covered"], 12);
    assert!(!v["trace"].as_array().unwrap().is_empty());
    let o = pathcover(&["solve", &f, "--trace"], d.path());
    assert!(stdout(&o).lines().next().unwrap().starts_with("# level 0"));
}

#[test]
fn malformed_input_exits_2_with_line() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "bad.txt", "5 2\n0 1\n1 x\n");
    let o = pathcover(&["solve", &f], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn exact_c5_and_petersen() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "c5.txt", "5 5\n0 1\n1 2\n2 3\n3 4\n0 4\n");
    let o = pathcover(&["exact", &f], d.path());
    assert!(stdout(&o).ends_with("covered=5\n"));
    let pet = pathcover::Graph::petersen().to_edge_list();
    let f = write(&d, "petersen.txt", &pet);
    let o = pathcover(&["exact", &f, "--k", "5", "--json"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["covered"], 10);
}

#[test]
fn exact_over_cap_exits_3() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "p12.txt", &path_file(12));
    let o = pathcover(&["exact", &f, "--max-n", "10"], d.path());
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_pathcover"))
        .args(["exact", &f])
        .current_dir(d.path())
        .env("PATHCOVER_ORACLE_CAP", "11")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic() {
    let d = TempDir::new().unwrap();
    let a = pathcover(&["gen", "--model", "gnp:0.3", "--n", "15", "--seed", "9"], d.path());
    let b = pathcover(&["gen", "--model", "gnp:0.3", "--n", "15", "--seed", "9"], d.path());
    assert_eq!(a.stdout, b.stdout);
    let g = pathcover::parse_graph(&stdout(&a)).unwrap();
    assert_eq!(g.vertex_count(), 15);
    let o = pathcover(&["gen", "--model", "tree:1", "--n", "5"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_reports() {
    let d = TempDir::new().unwrap();
    let o = pathcover(&["verify", "--trials", "30", "--n", "10,12", "--model", "clusters:0.02", "--out", "r", "--json"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["violations"], 0);
    let csv = fs::read_to_string(d.path().join("r/verify.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "seed,n,m,model,alg,opt,branch_depth,ops1,ops2,ops3,ms");
    assert_eq!(csv.lines().count(), 31);
    assert!(d.path().join("r/verify.json").exists());
}

#[test]
fn injected_fault_exits_4_and_replays() {
    let d = TempDir::new().unwrap();
    let o = pathcover(&["verify", "--trials", "2", "--inject-fault", "--out", "r"], d.path());
    assert_eq!(o.status.code(), Some(4));
    let replay = d.path().join("r/replay-42.json");
    assert!(replay.exists());
    let o = pathcover(&["verify", "--replay", replay.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("4 vertices"));
}

#[test]
fn bench_reports_without_oracle() {
    let d = TempDir::new().unwrap();
    let o = pathcover(&["bench", "--trials", "6", "--n", "40", "--out", "b"], d.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(d.path().join("b/bench.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[1], row[5]), ("40", ""));
}

#[test]
fn inspect_prints_analysis() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "p9.txt", &path_file(9));
    let o = pathcover(&["inspect", &f], d.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("member 0"));
}
