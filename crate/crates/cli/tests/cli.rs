use std::path::PathBuf;
use std::process::{Command, Output};

use superport::{Matrix, SuperportNetwork};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn superport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_detl_on_w_network() {
    let out = superport(&[
        "verify",
        path(&fixture("w-network.json")),
        "--theorem",
        "detl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("det-l: pass"));
}

#[test]
fn verify_all_on_every_fixture() {
    for name in [
        "w-network.json",
        "fig6-square.json",
        "fig7-square.json",
        "fig1-twoport.json",
        "k4.json",
    ] {
        let out = superport(&["verify", path(&fixture(name)), "--theorem", "all"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
    }
}

#[test]
fn cayley_four() {
    let out = superport(&["count", "--cayley", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("16"));
}

#[test]
fn gencayley_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let parts = dir.path().join("parts.json");
    std::fs::write(
        &parts,
        r#"{"parts": [{"size": 2}, {"size": 3, "edges": [[1, 2], [1, 3]]}]}"#,
    )
    .unwrap();
    let out = superport(&["count", "--gencayley", parts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn boxh_unit_resistances() {
    let out = superport(&["boxh", "1", "1", "1", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["A", "B", "C", "D", "E"] {
        assert!(text.contains(&format!("{name} = 1/4")), "{text}");
    }
    assert!(text.contains("responses equal"));
}

#[test]
fn validate_json_round_trips() {
    let fix = fixture("fig1-twoport.json");
    let out = superport(&["validate", path(&fix), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = serde_json::to_string(&v["network"]).unwrap();
    let (net, map) = SuperportNetwork::from_json(&text, false).unwrap();
    assert!(map.is_identity());
    assert_eq!(net.to_json(), std::fs::read_to_string(&fix).unwrap());
}

#[test]
fn relabeling_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("net.json");
    std::fs::write(
        &file,
        r#"{"vertices": 3, "edges": [{"u": 7, "v": 3, "c": "1"}, {"u": 3, "v": 9, "c": "2"}], "superports": [[9, 7]]}"#,
    )
    .unwrap();
    let out = superport(&["validate", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).contains("relabeled: 3->3 7->1 9->2"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn response_json_parses_as_matrix() {
    for show in ["K", "C", "L", "Lext"] {
        let out = superport(&[
            "response",
            path(&fixture("w-network.json")),
            "--show",
            show,
            "--format",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let m: Matrix = serde_json::from_slice(&out.stdout).unwrap();
        assert!(m.is_symmetric(), "{show}");
    }
}

#[test]
fn solve_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("circuit.json");
    std::fs::write(
        &file,
        r#"{"vertices": 3, "edges": [{"u": 1, "v": 3, "c": "1"}, {"u": 3, "v": 2, "c": "1"}],
            "superports": [[1, 2]], "deltas": [{"vertex": 1, "du": "1"}]}"#,
    )
    .unwrap();
    let out = superport(&["solve", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("U1 = 1\nU2 = 0\nU3 = 1/2"), "{text}");
    let json = superport(&["solve", file.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v["solution"].is_object());
}

#[test]
fn forests_stream_one_per_line() {
    let out = superport(&[
        "forests",
        path(&fixture("fig7-square.json")),
        "--kind",
        "valid",
        "--weights",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "2\t2\n3\t5\n");
    let all = superport(&["forests", path(&fixture("k4.json")), "--kind", "trees"]);
    assert_eq!(stdout(&all).lines().count(), 16);
    let rel = superport(&[
        "forests",
        path(&fixture("fig6-square.json")),
        "--kind",
        "relative:1",
        "--format",
        "json",
    ]);
    for line in stdout(&rel).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["edges"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn campaign_is_byte_identical() {
    let run = |seed: &str| {
        superport(&[
            "verify",
            "--campaign",
            "8",
            "--seed",
            seed,
            "--format",
            "json",
        ])
    };
    let a = run("5");
    let b = run("5");
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, run("6").stdout);
    let seq = superport(&[
        "verify",
        "--campaign",
        "8",
        "--seed",
        "5",
        "--format",
        "json",
        "--sequential",
    ]);
    assert_eq!(a.stdout, seq.stdout);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"vertices": 2, "edges": [{"u": 1, "v": 2, "c": "-1"}], "superports": [[1, 2]]}"#,
    )
    .unwrap();
    assert_eq!(
        superport(&["validate", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        superport(&["validate", "/no/such/file.json"]).status.code(),
        Some(2)
    );
    assert_eq!(superport(&["verify"]).status.code(), Some(2));
    assert_eq!(superport(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        superport(&["count", "--cayley", "7"]).status.code(),
        Some(2)
    );
    let singletons = dir.path().join("singletons.json");
    std::fs::write(
        &singletons,
        r#"{"vertices": 2, "edges": [{"u": 1, "v": 2, "c": "1"}], "superports": [[1], [2]]}"#,
    )
    .unwrap();
    assert_eq!(
        superport(&["verify", singletons.to_str().unwrap(), "--theorem", "detl"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn explicit_kw_sets() {
    let out = superport(&[
        "verify",
        path(&fixture("w-network.json")),
        "--x",
        "1",
        "--y",
        "5",
        "--z",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("kenyon-wilson: pass"));
}
