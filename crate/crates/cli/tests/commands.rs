use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn unbiased(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unbiased"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_two_finds_one_cluster() {
    let out = unbiased(&[
        "solve", "--n", "2", "--starts", "100", "--seed", "1", "--json",
    ]);
    assert_eq!(code(&out), 0);
    let records = json(&out);
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["nullity"], 0);
    let re = records[0]["slice_point"]["re"][0].as_f64().unwrap();
    assert!((re + 1.0).abs() < 1e-10);
}

#[test]
fn solve_three_passes_footer_and_writes_files() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    let out = unbiased(&[
        "solve",
        "--n",
        "3",
        "--starts",
        "500",
        "--seed",
        "1",
        "--out",
        path_str(&out_path),
        "--csv",
        path_str(&csv_path),
    ]);
    assert_eq!(code(&out), 0);
    let table = stdout(&out);
    let footer = table.lines().last().unwrap();
    assert!(footer.starts_with("verification at 1e-9"), "{footer}");
    let counts = footer
        .split(": ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap();
    let (passing, total) = counts.split_once('/').unwrap();
    assert_eq!(passing, total);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("n,nullity,basin_count,abs_potential_power\n3,"));
    let records: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(!records.as_array().unwrap().is_empty());
}

#[test]
fn solve_rejects_zero_starts_and_missing_n() {
    assert_eq!(code(&unbiased(&["solve", "--n", "2", "--starts", "0"])), 1);
    assert_eq!(code(&unbiased(&["solve"])), 1);
    assert_eq!(code(&unbiased(&["solve", "--n", "2", "--tol", "-1"])), 1);
    assert_eq!(code(&unbiased(&["nonsense"])), 1);
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = unbiased(&[
            "solve",
            "--n",
            "4",
            "--starts",
            "40",
            "--seed",
            "9",
            "--out",
            path_str(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_examples() {
    let dir = TempDir::new().unwrap();
    let fourier = dir.path().join("f4.json");
    let f4 = unbiased_core::linalg::fourier_matrix(4);
    std::fs::write(&fourier, serde_json::to_string(&f4).unwrap()).unwrap();
    let out = unbiased(&["verify", "--matrix", path_str(&fourier), "--mub"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "re": [1, 1, 1, 2], "im": [0, 0, 0, 0]}"#).unwrap();
    let out = unbiased(&["verify", "--matrix", path_str(&bad), "--json"]);
    assert_eq!(code(&out), 3);
    let report = json(&out);
    assert_eq!(report["unbiased"]["passed"], false);
    assert!(!report["unbiased"]["violations"]
        .as_array()
        .unwrap()
        .is_empty());

    let truncated = dir.path().join("t.json");
    std::fs::write(&truncated, r#"{"n": 2, "re": [1, 1"#).unwrap();
    assert_eq!(
        code(&unbiased(&["verify", "--matrix", path_str(&truncated)])),
        1
    );
}

#[test]
fn polytope_examples() {
    let out = unbiased(&["polytope", "--n", "3", "--json"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["vertex_count"], 6);
    assert_eq!(r["facet_count"], 9);
    assert_eq!(r["lattice_point_count"], 7);
    assert_eq!(r["reflexive"], true);
    assert_eq!(r["terminal"], true);

    let out = unbiased(&["polytope", "--n", "2", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["reflexive"], true);
    assert_eq!(json(&out)["toric_identification"], "projective_line");

    assert_eq!(code(&unbiased(&["polytope", "--n", "9"])), 1);
}

#[test]
fn polytope_writes_certificate_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("cert.csv");
    assert_eq!(
        code(&unbiased(&[
            "polytope",
            "--n",
            "2",
            "--csv",
            path_str(&csv)
        ])),
        0
    );
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "facet,sigma=12,sigma=21\nl11,1,-1\nl12,-1,1\n"
    );
}

#[test]
fn symplectic_examples() {
    let out = unbiased(&[
        "symplectic",
        "--n",
        "3",
        "--trials",
        "100",
        "--seed",
        "7",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["pullback"]["max_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(
        code(&unbiased(&["symplectic", "--n", "2", "--trials", "1"])),
        0
    );
    assert_eq!(
        code(&unbiased(&["symplectic", "--n", "2", "--trials", "0"])),
        1
    );
}

#[test]
fn family_examples() {
    let dir = TempDir::new().unwrap();
    let two = dir.path().join("two.json");
    let out = unbiased(&[
        "solve",
        "--n",
        "2",
        "--starts",
        "20",
        "--out",
        path_str(&two),
    ]);
    assert_eq!(code(&out), 0);
    let out = unbiased(&["family", "--records", path_str(&two), "--json"]);
    assert_eq!(code(&out), 0);
    for entry in json(&out).as_array().unwrap() {
        assert_eq!(entry["report"]["nullity"], 0);
    }

    let four = dir.path().join("four.json");
    let out = unbiased(&[
        "solve",
        "--n",
        "4",
        "--starts",
        "60",
        "--out",
        path_str(&four),
    ]);
    assert_eq!(code(&out), 0);
    let out = unbiased(&["family", "--records", path_str(&four), "--json"]);
    assert_eq!(code(&out), 0);
    let entries = json(&out);
    assert!(entries
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["report"]["nullity"].as_u64().unwrap() >= 1));

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = unbiased(&["family", "--records", path_str(&empty), "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!([]));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&unbiased(&["family", "--records", path_str(&missing)])),
        1
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\njson = true\n\n[solve]\nn = 2\nstarts = 7\n",
    )
    .unwrap();
    let out = unbiased(&["--config", path_str(&cfg), "solve"]);
    assert_eq!(code(&out), 0);
    let records = json(&out);
    let basins: u64 = records
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["basin_count"].as_u64().unwrap())
        .sum();
    assert!(basins <= 7);

    let out = unbiased(&["--config", path_str(&cfg), "solve", "--starts", "0"]);
    assert_eq!(code(&out), 1);

    std::fs::write(&cfg, "[solve]\nbogus = 1\n").unwrap();
    assert_eq!(
        code(&unbiased(&[
            "--config",
            path_str(&cfg),
            "solve",
            "--n",
            "2"
        ])),
        1
    );
}
