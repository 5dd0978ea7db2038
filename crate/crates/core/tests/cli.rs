use std::process::{Command, Output};

use addlab::record::Verdict;
use addlab::report::{records_from_csv, SetDocument};
use serde_json::Value;

fn addlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_addlab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let p = self.0.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_string_lossy().into_owned()
    }
}

fn json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_subgroup() {
    let d = Dir::new();
    let set = d.file("h.json", r#"{"group": [12], "elements": [[0], [3], [6], [9]], "label": "H"}"#);
    let out = d.path("r.json");
    let o = addlab(&["analyze", &set, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["tool_version"], env!("CARGO_PKG_VERSION"));
    assert!(r["config"]["seed"].is_u64());
    let res = &r["result"];
    assert_eq!(res["doubling"], 1.0);
    assert_eq!(res["energies"]["quantities"]["E"], 64);
    assert_eq!(res["energies"]["quantities"]["K"], 1.0);
    // {3, 6} is dissociated in Z_12, while 3 + 6 - 9 = 0
    assert_eq!(res["dimension"]["dim"]["value"], 2);
    assert_eq!(res["label"], "H");
}

#[test]
fn analyze_binary_subspace_has_dimension_equal_to_rank() {
    let d = Dir::new();
    let set = d.file("h.json", r#"{"group": [2, 2, 2, 2], "elements": [[0,0,0,0],[1,0,0,0],[0,1,0,0],[1,1,0,0]]}"#);
    let o = addlab(&["analyze", &set]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["dimension"]["dim"]["value"], 2);
    assert_eq!(r["result"]["energies"]["quantities"]["E"], 64);
}

#[test]
fn analyze_worked_example_table() {
    let d = Dir::new();
    let set = d.file("a.json", r#"{"group": [101], "elements": [[1], [10], [11], [12]]}"#);
    let o = addlab(&["analyze", &set, "--format", "table"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row = |k: &str| {
        text.lines().find(|l| l.split_whitespace().next() == Some(k)).unwrap().split_whitespace().nth(1).unwrap().to_string()
    };
    assert_eq!(row("dim"), "3");
    assert_eq!(row("d"), "2");
    assert_eq!(row("d_star"), "2");
    assert_eq!(row("d_tilde"), "2");
}

#[test]
fn malformed_documents_exit_2_naming_the_field() {
    let d = Dir::new();
    for (doc, field) in [
        (r#"{"group": [7], "elements": [[1], [2, 3]]}"#, "elements[1]"),
        (r#"{"group": [7], "elements": [[1], ["x"]]}"#, "elements[1][0]"),
        (r#"{"elements": [[1]]}"#, "group"),
        (r#"{"group": [7], "elements": [[9]]}"#, "elements[0][0]"),
        (r#"{"group": [7], "elements": [[1]], "colour": 1}"#, "colour"),
        ("{not json", "line 1"),
    ] {
        let set = d.file("bad.json", doc);
        let o = addlab(&["analyze", &set]);
        assert_eq!(code(&o), 2, "{doc}");
        assert!(stderr(&o).contains(field), "{doc}: {}", stderr(&o));
    }
    let o = addlab(&["analyze", &d.path("missing.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn caps_exit_3() {
    let d = Dir::new();
    let big = d.file("big.json", r#"{"group": [1000, 1000], "elements": [[0, 1]]}"#);
    assert_eq!(code(&addlab(&["analyze", &big])), 3);
    // More elements than the exact dimension cap: partial report with flags.
    let elems: Vec<String> = (0..30).map(|i| format!("[{}]", 7 * i + 1)).collect();
    let set = d.file("wide.json", &format!(r#"{{"group": [8192], "elements": [{}]}}"#, elems.join(",")));
    let cfg = d.file("c.json", r#"{"exact_dim_cap": 8}"#);
    let out = d.path("r.json");
    let o = addlab(&["analyze", &set, "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let flags = json(&out)["result"]["flags"].as_array().unwrap().clone();
    assert!(!flags.is_empty());
}

#[test]
fn verify_fiber_identity_default_family() {
    let d = Dir::new();
    let out = d.path("r.csv");
    let o = addlab(&["verify", "lemma-3.5", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let recs = records_from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recs.len(), 60);
    assert!(recs.iter().all(|r| r.holds() && r.lhs == r.rhs && r.theorem.starts_with("fiber-energy")));
}

#[test]
fn verify_exact_and_ratio_checks() {
    let o = addlab(&["verify", "thm-3.7"]);
    assert_eq!(code(&o), 0);
    let recs = records_from_csv(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(!recs.is_empty() && recs.iter().all(|r| r.holds()));

    let o = addlab(&["verify", "dim-doubling"]);
    assert_eq!(code(&o), 0);
    let recs = records_from_csv(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(!recs.is_empty() && recs.iter().all(|r| r.verdict == Verdict::RatioOnly));
}

#[test]
fn verify_unknown_id_exits_2() {
    let o = addlab(&["verify", "lemma-9.9"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lemma-9.9"));
}

#[test]
fn verify_custom_family_and_seed() {
    let d = Dir::new();
    let fam = d.file(
        "f.json",
        r#"{"generator": {"kind": "symmetric-random", "group": [60], "size": 9}, "count": 4, "seed": 2}"#,
    );
    let o = addlab(&["verify", "symmetric-sigma", "energy-fourier", "--family", &fam]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = String::from_utf8(o.stdout).unwrap();
    let o = addlab(&["verify", "symmetric-sigma", "energy-fourier", "--family", &fam, "--seed", "3"]);
    let b = String::from_utf8(o.stdout).unwrap();
    assert_ne!(a, b);
    let bad = d.file("g.json", r#"{"generator": {"kind": "random-subset", "group": [60]}, "count": 4}"#);
    let o = addlab(&["verify", "all", "--family", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("size"), "{}", stderr(&o));
}

#[test]
fn extract_energy_subset_on_subgroup_is_trivial() {
    let d = Dir::new();
    let set = d.path("h.json");
    assert_eq!(code(&addlab(&["gen", "subspace", "--n", "6", "--k", "3", "--seed", "1", "--out", &set])), 0);
    let out = d.path("r.json");
    let o = addlab(&["extract", "energy-subset", &set, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&out);
    assert_eq!(r["result"]["postcondition"], true);
    assert_eq!(r["result"]["trace"]["stop"], "trivial");
    assert_eq!(r["result"]["subset"]["elements"].as_array().unwrap().len(), 8);
}

#[test]
fn extract_chang_cover_on_progressions() {
    let d = Dir::new();
    let a = d.path("a.json");
    let b = d.path("b.json");
    let gen = |start: &str, len: &str, out: &str| {
        addlab(&["gen", "arithmetic-progression", "--group", "1000", "--start", start, "--step", "3", "--length", len, "--out", out])
    };
    assert_eq!(code(&gen("0", "30", &a)), 0);
    assert_eq!(code(&gen("7", "5", &b)), 0);
    let out = d.path("r.json");
    let o = addlab(&["extract", "chang-cover", &a, "--with", &b, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&out);
    assert_eq!(r["result"]["components"]["contained"], 1.0);
    assert!(!r["result"]["sets"].as_array().unwrap().is_empty());
}

#[test]
fn extract_tk_subset_recounts() {
    let d = Dir::new();
    let set = d.path("a.json");
    assert_eq!(code(&addlab(&["gen", "random-subset", "--group", "128", "--size", "14", "--seed", "5", "--out", &set])), 0);
    let sub = d.path("s.json");
    let o = addlab(&["extract", "tk-subset", &set, "--k", "2", "--eta", "4", "--subset-out", &sub, "--format", "table"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("postcondition  true"));
    let s = SetDocument::parse(&std::fs::read_to_string(&sub).unwrap()).unwrap().to_set(1 << 16).unwrap();
    let a = SetDocument::parse(&std::fs::read_to_string(&set).unwrap()).unwrap().to_set(1 << 16).unwrap();
    assert!(s.is_subset(&a) && !s.is_empty());
}

#[test]
fn extract_errors() {
    let d = Dir::new();
    let set = d.file("a.json", r#"{"group": [20], "elements": [[1], [2]]}"#);
    assert_eq!(code(&addlab(&["extract", "nope", &set])), 2);
    assert_eq!(code(&addlab(&["extract", "energy-subset", &set, "--epsilon", "-1"])), 2);
    let empty = d.file("e.json", r#"{"group": [20], "elements": []}"#);
    assert_eq!(code(&addlab(&["extract", "chang-cover", &empty])), 2);
}

#[test]
fn gen_documents_round_trip() {
    let d = Dir::new();
    let cases: &[&[&str]] = &[
        &["random-subset", "--group", "4,6", "--size", "7"],
        &["symmetric-random", "--group", "50", "--size", "9"],
        &["dissociated", "--group", "4096", "--size", "6"],
        &["generalized-ap", "--group", "100", "--base", "1", "--step", "1", "--step", "10", "--length", "3", "--length", "4"],
        &["coset-progression", "--group", "20,2", "--base", "0,0", "--step", "1,0", "--length", "4", "--subgroup", "0,1"],
        &["subspace-plus-dissociated", "--n", "7", "--k", "2", "--lambda", "3"],
    ];
    for args in cases {
        let out = d.path("s.json");
        let mut full = vec!["gen"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--seed", "9", "--out", &out]);
        let o = addlab(&full);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let set = SetDocument::parse(&text).unwrap().to_set(1 << 16).unwrap();
        assert_eq!(SetDocument::from_set(&set, SetDocument::parse(&text).unwrap().label).to_json().unwrap(), text);
    }
    assert_eq!(code(&addlab(&["gen", "random-subset", "--group", "10", "--out", &d.path("x.json")])), 2);
    assert_eq!(code(&addlab(&["gen", "fractal", "--out", &d.path("x.json")])), 2);
    assert_eq!(code(&addlab(&["gen", "random-subset", "--group", "10", "--size", "11", "--out", &d.path("x.json")])), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d = Dir::new();
    let set = d.path("a.json");
    addlab(&["gen", "random-subset", "--group", "256", "--size", "10", "--seed", "4", "--out", &set]);
    let run = |args: &[&str]| addlab(args).stdout;
    assert_eq!(run(&["analyze", &set]), run(&["analyze", &set]));
    let v = ["verify", "concentration", "small-dim-energy", "rudin-moment", "--count", "5", "--seed", "8"];
    let first = run(&v);
    assert!(!first.is_empty());
    assert_eq!(first, run(&v));
    let threaded = Command::new(env!("CARGO_BIN_EXE_addlab")).args(v).env("ADDLAB_THREADS", "1").output().unwrap();
    assert_eq!(threaded.stdout, first);
}

#[test]
fn bad_thread_count_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_addlab")).args(["theorems"]).env("ADDLAB_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn theorems_lists_ids_and_aliases() {
    let o = addlab(&["theorems"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("fiber-energy") && text.contains("lemma-3.5"));
    assert_eq!(text.lines().count(), addlab::experiments::THEOREMS.len());
}
