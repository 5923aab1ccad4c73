use std::process::{Command, Output};

use serde_json::Value;

const HOPF: &str = r#"
name = "hopf_inline"
basis = ["X", "Y", "Z"]
horizontal = ["X", "Y"]
vertical = ["Z"]

[[brackets]]
left = "X"
right = "Y"
result = { Z = 1.0 }

[[brackets]]
left = "Y"
right = "Z"
result = { X = 1.0 }

[[brackets]]
left = "Z"
right = "X"
result = { Y = 1.0 }

[spectrum]
cutoff = 4
group = "su2"
"#;

fn subgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgap"))
        .args(args)
        .env_remove("SUBGAP_TOLERANCE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_number().unwrap().to_string().parse().unwrap()
}

#[test]
fn list_names_every_builtin() {
    let o = subgap(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for n in [
        "so4_example",
        "su2_hopf",
        "su2_conformal",
        "su2xsu2_example",
        "su2_riemannian",
    ] {
        assert!(out.lines().any(|l| l == n), "{n}");
    }
}

#[test]
fn machine_report_is_deterministic() {
    let args = ["analyze", "--builtin", "so4_example", "--format", "machine"];
    let (a, b) = (subgap(&args), subgap(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    let bound = v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["variant"] == "general")
        .unwrap();
    assert!((number(&bound["outcome"]["value"]) - 2.0 / 15.0).abs() < 1e-15);
}

#[test]
fn verify_passes_on_stored_reports() {
    let o = subgap(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_bless_writes_one_file_per_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgap(&["verify", "--bless", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 5);
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(
        subgap(&["analyze", "--builtin", "nope"]).status.code(),
        Some(1)
    );
    assert_eq!(
        subgap(&["analyze", "--input", "/nonexistent.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(subgap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        subgap(&["analyze", "--builtin", "su2xsu2_example", "--param", "d=1"])
            .status
            .code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        HOPF.replace("vertical = [\"Z\"]", "vertical = [\"W\"]"),
    )
    .unwrap();
    let o = subgap(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains('W'));
}

#[test]
fn inline_input_written_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("hopf.toml");
    let output = dir.path().join("report.json");
    std::fs::write(&input, HOPF).unwrap();
    let o = subgap(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "machine",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(output).unwrap()).unwrap();
    assert_eq!(v["name"], "hopf_inline");
    assert!((number(&v["spectrum"]["result"]["first_gap"]) - 0.5).abs() < 1e-9);
}

#[test]
fn tolerance_from_env_and_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_subgap"));
        c.args(["analyze", "--builtin", "su2_hopf", "--format", "machine"]);
        match env {
            Some(e) => c.env("SUBGAP_TOLERANCE", e),
            None => c.env_remove("SUBGAP_TOLERANCE"),
        };
        if let Some(f) = flag {
            c.args(["--tolerance", f]);
        }
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        number(&v["tolerance"])
    };
    assert_eq!(run(None, None), 1e-9);
    assert_eq!(run(Some("1e-7"), None), 1e-7);
    assert_eq!(run(Some("1e-7"), Some("1e-11")), 1e-11);
}

#[test]
fn param_changes_the_family_member() {
    let o = subgap(&[
        "analyze",
        "--builtin",
        "su2xsu2_example",
        "--param",
        "c=0",
        "--format",
        "machine",
    ]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let bound = number(&v["bounds"][0]["outcome"]["value"]);
    assert!((bound - 6.0 / 11.0).abs() < 1e-12, "{bound}");
}

#[test]
fn spectrum_subcommand() {
    let o = subgap(&[
        "spectrum",
        "--builtin",
        "su2_hopf",
        "--cutoff",
        "3",
        "--format",
        "machine",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "completed");
    assert!((number(&v["result"]["first_gap"]) - 0.5).abs() < 1e-12);
    assert_eq!(v["result"]["multiplicity"], 4);
}

#[test]
fn sweep_subcommand() {
    let o = subgap(&[
        "sweep",
        "--builtin",
        "su2_conformal",
        "--lo",
        "0",
        "--hi",
        "0.5",
        "--tol",
        "1e-6",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let threshold: f64 = out
        .split_whitespace()
        .skip_while(|w| *w != "=")
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(threshold > 0.17 && threshold < 0.175, "{out}");
}
