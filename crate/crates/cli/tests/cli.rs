use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const C4: &str = r#"{"type":"cyclic","n":4}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ginvsketch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn orbits_report_and_burnside_status() {
    let o = run(&["orbits", "--group", C4, "--omega", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("kappa: 4\n"), "{text}");
    assert!(text.contains("status: OK\n"));

    let o = run(&[
        "orbits",
        "--group",
        r#"{"type":"generators","n":3,"generators":[]}"#,
        "--omega",
        "2",
        "--json",
    ]);
    assert_eq!(json(&o)["kappa"], 9);

    let o = run(&["orbits", "--group", C4, "--omega", "2", "--table", "--json"]);
    assert_eq!(json(&o)["orbits"].as_array().unwrap().len(), 4);
}

#[test]
fn cap_violations_exit_with_input_error() {
    let o = run(&[
        "orbits",
        "--group",
        r#"{"type":"cyclic","n":40}"#,
        "--omega",
        "6",
        "--max-tuples",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tuple space"), "{}", stderr(&o));

    let o = run(&[
        "group",
        "--group",
        r#"{"type":"sym_subsets","l":9,"w":3}"#,
        "--max-group",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["orbits", "--group", r#"{"type":"mystery"}"#]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["orbits"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn group_description() {
    let o = run(&[
        "group",
        "--group",
        r#"{"type":"sym_subsets","l":4,"w":2}"#,
        "--json",
    ]);
    let v = json(&o);
    assert_eq!(v["degree"], 6);
    assert_eq!(v["order"], 24);
    assert_eq!(v["transitive"], true);
    assert_eq!(v["labels"][0], "{1,2}");
}

#[test]
fn jl_dim_values() {
    let o = run(&["jl-dim", "--k", "20", "--json"]);
    assert_eq!(json(&o)["m"], 72);
    let o = run(&["jl-dim", "--k", "20", "--epsilon", "0.3", "--delta", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sketch_store_add_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    let store = dir.path().join("store.jsonl");
    fs::write(&input, "a,1,2,3,4\nb,1,2,3,4\nc,9,1,1,1\n").unwrap();
    let o = run(&[
        "sketch",
        "add",
        "--group",
        C4,
        "--m",
        "8",
        "--seed",
        "5",
        "--ids",
        "--input",
        p(&input),
        "--store",
        p(&store),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let text = fs::read_to_string(&store).unwrap();
    let lines: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["m"], 8);
    assert_eq!(lines[1]["sketch"], lines[2]["sketch"]);

    // a rotated copy lands on the same sketch
    let o = run(&[
        "sketch",
        "query",
        "--store",
        p(&store),
        "--vector",
        "3,4,1,2",
        "--radius",
        "1e-9",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let matches = &json(&o)["results"][0]["matches"];
    let ids: Vec<&str> = matches
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!(matches[0]["distance"], 0.0);

    // a different group cannot write into this store
    let o = run(&[
        "sketch",
        "add",
        "--group",
        r#"{"type":"cyclic","n":5}"#,
        "--m",
        "8",
        "--seed",
        "5",
        "--ids",
        "--input",
        p(&input),
        "--store",
        p(&store),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("group hash"), "{}", stderr(&o));

    // later appends reuse the stored dimension
    fs::write(&input, "d,0,0,0,1\n").unwrap();
    let o = run(&[
        "sketch",
        "add",
        "--group",
        C4,
        "--seed",
        "5",
        "--ids",
        "--input",
        p(&input),
        "--store",
        p(&store),
        "--json",
    ]);
    assert_eq!(json(&o)["records"], 4);
}

#[test]
fn malformed_rows_name_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    let store = dir.path().join("store.jsonl");
    fs::write(&input, "# header\n1,2,3,4\n1,2,3\n").unwrap();
    let o = run(&[
        "sketch",
        "add",
        "--group",
        C4,
        "--m",
        "4",
        "--input",
        p(&input),
        "--store",
        p(&store),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!store.exists());
}

#[test]
fn query_against_missing_store_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("none.jsonl");
    let o = run(&[
        "sketch",
        "query",
        "--store",
        p(&store),
        "--vector",
        "1,2,3,4",
        "--radius",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn embed_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    fs::write(&input, "1,2,3,4\n0.5,-1,2,7\n").unwrap();
    let args = [
        "embed",
        "--group",
        C4,
        "--omega",
        "3",
        "--m",
        "6",
        "--seed",
        "99",
        "--input",
        p(&input),
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let body: Vec<&str> = std::str::from_utf8(&a.stdout).unwrap().lines().collect();
    assert!(body[0].starts_with("# m=6 seed=99 omega=3"));
    assert_eq!(body.len(), 3);
    assert_eq!(body[1].split(',').count(), 6);
}

#[test]
fn invariant_output_names_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    let out = dir.path().join("z.csv");
    fs::write(&input, "1 0\n").unwrap();
    let o = run(&[
        "invariant",
        "--group",
        r#"{"type":"cyclic","n":2}"#,
        "--omega",
        "1",
        "--input",
        p(&input),
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# kappa_omega=1"));
    let v: f64 = text.lines().nth(1).unwrap().parse().unwrap();
    assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"group":{"type":"cyclic","n":4},"omega":3,"seed":1}"#,
    )
    .unwrap();
    let o = run(&["orbits", "--config", p(&cfg), "--json"]);
    assert_eq!(json(&o)["kappa"], 16);
    let o = run(&["orbits", "--config", p(&cfg), "--omega", "2", "--json"]);
    assert_eq!(json(&o)["kappa"], 4);
}

#[test]
fn dedup_and_delta_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    fs::write(&input, "1,2,3,4\n2,3,4,1\n4,1,2,3\n5,0,0,1\n").unwrap();
    let o = run(&["dedup", "--group", C4, "--input", p(&input), "--json"]);
    let v = json(&o);
    assert_eq!(v["k"], 2);
    assert_eq!(v["class_sizes"], serde_json::json!([1, 3]));
    assert_eq!(v["reduction_factor"], 2.0);

    let o = run(&[
        "delta",
        "--group",
        C4,
        "--omega",
        "2",
        "--input",
        p(&input),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = json(&o)["delta"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&d));
}

#[test]
fn verification_commands() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    // multiples of the all-ones vector: every difference is invariant
    fs::write(&input, "1,1,1,1\n2,2,2,2\n3,3,3,3\n-1.5,-1.5,-1.5,-1.5\n").unwrap();
    let o = run(&[
        "jl-check",
        "--group",
        C4,
        "--omega",
        "2",
        "--m",
        "auto",
        "--trials",
        "50",
        "--input",
        p(&input),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let v = json(&o);
    assert_eq!(v["status"], "OK");
    assert!(v["delta"].as_f64().unwrap() < 1e-12);

    let o = run(&[
        "whitney-check",
        "--group",
        C4,
        "--omega",
        "2",
        "--m",
        "3",
        "--trials",
        "50",
        "--input",
        p(&input),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["injective_trials"], 50);

    let o = run(&["conc-selftest", "--m", "100", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("status: OK"));

    // a tight isometry budget at tiny m must fail verification, not error
    let o = run(&[
        "jl-check",
        "--group",
        C4,
        "--omega",
        "2",
        "--m",
        "1",
        "--epsilon",
        "0.01",
        "--trials",
        "20",
        "--input",
        p(&input),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn bispectrum_modes() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("z.txt");
    let table = dir.path().join("b.txt");
    let back = dir.path().join("r.txt");
    fs::write(&signal, "1\n5\n2\n0.5\n3\n-1\n").unwrap();
    assert_eq!(
        run(&[
            "bispectrum",
            "compute",
            "--input",
            p(&signal),
            "--output",
            p(&table)
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        fs::read_to_string(&table)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count(),
        36
    );
    let o = run(&[
        "bispectrum",
        "invert",
        "--input",
        p(&table),
        "--output",
        p(&back),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut got: Vec<f64> = fs::read_to_string(&back)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();
    let mut want = vec![1.0, 5.0, 2.0, 0.5, 3.0, -1.0];
    // compare as multisets; the shift itself is covered by roundtrip
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9);
    }

    let o = run(&["bispectrum", "roundtrip", "--input", p(&signal), "--json"]);
    assert_eq!(json(&o)["status"], "OK");

    fs::write(&signal, "2\n2\n2\n2\n").unwrap();
    let o = run(&["bispectrum", "roundtrip", "--input", p(&signal)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invertibility"), "{}", stderr(&o));
}

#[test]
fn boxdim_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.txt");
    let rows: String = (0..1000)
        .map(|i| format!("{},{}\n", i as f64 / 999.0, 0.0))
        .collect();
    fs::write(&input, rows).unwrap();
    let o = run(&["boxdim", "--input", p(&input), "--json"]);
    let slope = json(&o)["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.2, "{slope}");
}
