use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn morrey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morrey")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_weight_square_root() {
    let out = morrey(&["check-weight", "--weight", "power:0.5", "--q", "1", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["gq_member"], true);
    assert!((v["z0"]["sup"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["z0"]["m0"], 3);
    assert!((v["doubling"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn check_weight_flags_divergence() {
    let v = json(&morrey(&["check-weight", "--weight", "min(power:0.5,power:0)"]));
    assert_eq!(v["z0"]["divergent"], true);
    assert!(v["z0"]["sup"].is_null());
}

#[test]
fn norm_of_unit_cube() {
    let args = ["--weight", "power:0.5", "--q", "1", "--fn", "cube:0,1", "--grid", "1,2,256"];
    let strong = morrey(&[&["norm"][..], &args].concat());
    assert_eq!(code(&strong), 0);
    let v = json(&strong);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 0.1);
    assert_eq!(v["policy"]["stride"], 1);
    let weak = json(&morrey(&[&["weak-norm"][..], &args].concat()));
    assert!(weak["value"].as_f64().unwrap() <= v["value"].as_f64().unwrap() * (1.0 + 1e-12));
    assert!(weak["weak_level"].is_number());
}

#[test]
fn vector_counterexample_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = morrey(&["verify", "vector-counterexample", "--p", "2", "--q", "1", "--u", "2", "--m", "2,4,8", "--csv", s(&csv)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["passed"], true);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("family_id,m_or_k,N,in_norm,out_norm,ratio"));
    // three failing rows and three control rows
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn spanne_exact_and_perturbed() {
    assert_eq!(code(&morrey(&["verify", "spanne", "--n", "1", "--p", "2", "--alpha", "0.25"])), 0);
    let out = morrey(&["verify", "spanne", "--alpha", "0.25", "--perturb", "0.1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["holds"], false);
    assert_eq!(code(&morrey(&["verify", "adams", "--p", "2", "--q", "4"])), 0);
}

#[test]
fn exit_codes_for_bad_input() {
    // weight syntax
    assert_eq!(code(&morrey(&["norm", "--weight", "power(", "--fn", "cube:0,1", "--grid", "1,2,64"])), 2);
    // --fn without --grid
    assert_eq!(code(&morrey(&["norm", "--weight", "power:0.5", "--fn", "cube:0,1"])), 2);
    // unknown flag
    assert_eq!(code(&morrey(&["norm", "--bogus", "1"])), 2);
    // unknown criterion
    assert_eq!(code(&morrey(&["suite", "--only", "99"])), 2);
    // grid too fine for a series
    let out = morrey(&["verify", "riesz-counterexample", "--m", "4,8,20"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolution"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# norm of a cube\ncommand = norm\nweight = power:0.5\nq = 2\nfn = cube:0,1\ngrid = 1,2,128\n").unwrap();
    let from_cfg = json(&morrey(&["--config", s(&cfg)]));
    assert_eq!(from_cfg["q"], 2.0);
    let overridden = json(&morrey(&["--config", s(&cfg), "--q", "1"]));
    assert_eq!(overridden["q"], 1.0);
    let direct = json(&morrey(&["norm", "--weight", "power:0.5", "--q", "1", "--fn", "cube:0,1", "--grid", "1,2,128"]));
    assert_eq!(overridden["value"], direct["value"]);

    let out_path = dir.path().join("report.json");
    let out = morrey(&["norm", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let saved: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(saved["value"], from_cfg["value"]);

    fs::write(&cfg, "weight power:0.5\n").unwrap();
    assert_eq!(code(&morrey(&["--config", s(&cfg), "norm"])), 2);
}

#[test]
fn apply_op_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("mf.bin");
    let out = morrey(&["apply-op", "--op", "maximal", "--fn", "cube:0,1", "--grid", "1,4,64", "--save", s(&saved)]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["sup"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let norm = json(&morrey(&["norm", "--weight", "power:0.5", "--fn-file", s(&saved)]));
    assert!(norm["value"].as_f64().unwrap() > 0.0);
    let mismatch = morrey(&["norm", "--weight", "power:0.5", "--fn-file", s(&saved), "--grid", "1,4,32"]);
    assert_eq!(code(&mismatch), 2);
}

#[test]
fn block_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("blocks.json");
    let base = ["make-block", "--weight", "power:0.5", "--q", "2", "--fn", "smooth:3", "--grid", "1,1,32", "--save", s(&blocks)];
    for (cube, lambda) in [("4,4", "1.5"), ("9,2", "-0.5"), ("16,8", "2")] {
        let out = morrey(&[&base[..], &["--cube", cube, "--lambda", lambda, "--append"]].concat());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["certified"], true);
    }
    let regrouped = dir.path().join("regrouped.json");
    let out = morrey(&["regroup", "--weight", "power:0.5", "--q", "2", "--blocks", s(&blocks), "--grid", "1,1,32", "--save", s(&regrouped)]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["input_terms"], 3);
    assert!(v["observed_constant"].as_f64().unwrap() <= 3.0 + 1e-12);
    for file in [&blocks, &regrouped] {
        let out = morrey(&["pairing", "--weight", "power:0.5", "--q", "2", "--blocks", s(file), "--fn", "spikes:2", "--grid", "1,1,32"]);
        assert_eq!(code(&out), 0);
        let p = json(&out);
        assert!(p["l1"].as_f64().unwrap() <= p["bound"].as_f64().unwrap());
    }
}

#[test]
fn suite_subset() {
    let out = morrey(&["suite", "--only", "1,14", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["total"], 2);
    assert_eq!(v["seed"], 3);
}

#[test]
fn membership_and_maximal_verdicts() {
    let out = morrey(&["verify", "membership", "--weight", "power:0.5", "--q", "1"]);
    assert_eq!(code(&out), 0);
    let out = morrey(&["verify", "maximal", "--weight", "power:0.5", "--family", "cube:0,1;smooth:2;annulus:0.5,1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "bounded");
}
