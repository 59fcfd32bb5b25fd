use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use husp::qsdb::fixture;

fn husp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_husp"))
        .args(args)
        .output()
        .expect("run husp")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("fix.seq"), fixture::SEQUENCES).unwrap();
        std::fs::write(dir.path().join("fix.util"), fixture::UTILITIES).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn mine(&self, extra: &[&str]) -> Output {
        let (d, u) = (self.arg("fix.seq"), self.arg("fix.util"));
        let mut args = vec!["mine", "--data", &d, "--utils", &u];
        args.extend_from_slice(extra);
        husp(&args)
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn mine_fixture_at_half() {
    let f = Fixture::new();
    let out = stdout(&f.mine(&["--ratio", "0.5"]));
    assert_eq!(out, "1 2 -1 1 4 -2 #UTIL: 25\n");
}

#[test]
fn mine_with_absolute_threshold() {
    let f = Fixture::new();
    let out = stdout(&f.mine(&["--minutil", "25"]));
    assert_eq!(out.lines().count(), 1);
    assert!(stdout(&f.mine(&["--minutil", "26"])).is_empty());
}

#[test]
fn bad_ratio_is_a_usage_error() {
    let f = Fixture::new();
    for r in ["1.5", "0", "-0.1", "abc"] {
        assert_eq!(f.mine(&["--ratio", r]).status.code(), Some(2), "ratio {r}");
    }
    assert_eq!(f.mine(&[]).status.code(), Some(2));
    assert_eq!(
        f.mine(&["--ratio", "0.5", "--minutil", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_input_is_a_data_error() {
    let o = husp(&[
        "mine",
        "--data",
        "/nonexistent.seq",
        "--utils",
        "/nonexistent.util",
        "--ratio",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bounds_agree_on_results_but_not_on_work() {
    let f = Fixture::new();
    let mut results = Vec::new();
    let mut candidates = Vec::new();
    for bound in ["trsu", "rsu"] {
        let stats = f.path(&format!("{bound}.json"));
        let out = stdout(&f.mine(&[
            "--ratio",
            "0.2",
            "--bound",
            bound,
            "--stats",
            stats.to_str().unwrap(),
        ]));
        results.push(out);
        let v = json(&stats);
        assert_eq!(v["stats"]["husps"], 65);
        candidates.push(v["stats"]["candidates"].as_u64().unwrap());
    }
    assert_eq!(results[0], results[1]);
    assert!(candidates[0] < candidates[1], "{candidates:?}");
}

#[test]
fn ablation_flags_keep_the_result() {
    let f = Fixture::new();
    let base = stdout(&f.mine(&["--ratio", "0.15"]));
    for flag in ["--no-iip", "--no-ep", "--no-peu", "--no-swu"] {
        assert_eq!(stdout(&f.mine(&["--ratio", "0.15", flag])), base, "{flag}");
    }
}

#[test]
fn names_go_to_stderr() {
    let f = Fixture::new();
    std::fs::write(f.path("names"), "a:1\nb:2\nc:3\nd:4\ne:5\nf:6\n").unwrap();
    let o = f.mine(&["--ratio", "0.5", "--names", &f.arg("names")]);
    stdout(&o);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("25"), "{err}");
}

#[test]
fn gen_is_reproducible() {
    let f = Fixture::new();
    for run in ["a", "b", "c"] {
        let seed = if run == "c" { "8" } else { "7" };
        stdout(&husp(&[
            "gen",
            "--d",
            "200",
            "--c",
            "5",
            "--t",
            "3",
            "--n",
            "100",
            "--seed",
            seed,
            "--out-prefix",
            &f.arg(run),
        ]));
    }
    let read = |n: &str| std::fs::read(f.path(n)).unwrap();
    assert_eq!(read("a.seq"), read("b.seq"));
    assert_eq!(read("a.util"), read("b.util"));
    assert_ne!(read("a.seq"), read("c.seq"));
    let db = husp::qsdb::parse_database_str(
        &String::from_utf8(read("a.seq")).unwrap(),
        &String::from_utf8(read("a.util")).unwrap(),
    )
    .unwrap();
    assert_eq!(db.len(), 200);
}

#[test]
fn gen_rejects_bad_parameters() {
    let f = Fixture::new();
    let prefix = f.arg("x");
    for bad in [["--d", "0"], ["--t", "0"], ["--n", "0"]] {
        let mut args = vec!["gen", "--out-prefix", &prefix];
        args.extend_from_slice(&bad);
        assert_eq!(husp(&args).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn verify_passes_on_fixture_and_random_databases() {
    let f = Fixture::new();
    let (d, u) = (f.arg("fix.seq"), f.arg("fix.util"));
    for r in ["0.5", "0.2"] {
        let out = stdout(&husp(&[
            "verify", "--data", &d, "--utils", &u, "--ratio", r,
        ]));
        assert!(out.starts_with("PASS database: 8 comparisons"), "{out}");
    }
    let out = stdout(&husp(&["verify", "--seeds", "3", "--seed-base", "10"]));
    assert_eq!(out, "PASS 3 random databases: 240 comparisons\n");
    assert_eq!(husp(&["verify"]).status.code(), Some(2));
}

#[test]
fn bench_writes_csv() {
    let f = Fixture::new();
    let (d, u) = (f.arg("fix.seq"), f.arg("fix.util"));
    let out = stdout(&husp(&[
        "bench",
        "--data",
        &d,
        "--utils",
        &u,
        "--ratios",
        "0.2,0.5",
        "--configs",
        "trsu,rsu+noiip",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "config,ratio,runtime_ms,candidates,husps,mem_bytes"
    );
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 6, "{l}");
    }
    assert!(lines
        .iter()
        .any(|l| l.starts_with("trsu,0.5,") && l.split(',').nth(4) == Some("1")));

    let empty = husp(&["bench", "--data", &d, "--utils", &u, "--ratios", ""]);
    assert_eq!(empty.status.code(), Some(2));
    let unknown = husp(&[
        "bench",
        "--data",
        &d,
        "--utils",
        &u,
        "--ratios",
        "0.5",
        "--configs",
        "xyz",
    ]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn convert_spmf_round_trip() {
    let f = Fixture::new();
    std::fs::write(
        f.path("in.txt"),
        "1[6] 2[2] -1 4[1] -1 -2 SUtility:9\n2[4] -1 -2\n",
    )
    .unwrap();
    stdout(&husp(&[
        "convert",
        "--spmf",
        &f.arg("in.txt"),
        "--out-prefix",
        &f.arg("conv"),
    ]));
    let out = stdout(&husp(&[
        "mine",
        "--data",
        &f.arg("conv.seq"),
        "--utils",
        &f.arg("conv.util"),
        "--minutil",
        "8",
    ]));
    assert_eq!(out, "1 2 -2 #UTIL: 8\n1 2 -1 4 -2 #UTIL: 9\n");
}

#[test]
fn threads_do_not_change_output() {
    let f = Fixture::new();
    let one = stdout(&f.mine(&["--ratio", "0.1", "--threads", "1"]));
    let four = stdout(&f.mine(&["--ratio", "0.1", "--threads", "4"]));
    assert_eq!(one, four);
    assert!(one.lines().count() > 50);
}
