use delta_stab::conditions::UncertaintyModel;
use delta_stab::{RealMatrix, SystemPair};
use delta_stab_cli::files::SystemFile;
use delta_stab_cli::scanfile::read_scan;
use delta_stab_cli::thread_cap;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_delta-stab");

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

fn value(text: &str, key: &str) -> f64 {
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn check_exit_codes() {
    let (code, out) = run(&["check", &data("example.json"), "--method", "thm4", "--k-schedule", "1,2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("result certified"));

    let (code, out) = run(&["check", &data("scalar_unstable.json")]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("verdict=unstable"));
    assert!(out.contains("not_certified (k <= 3)"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"n\": 1,\n  \"A\": [[0.4]\n}");
    let (code, out) = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("line") && out.contains("column"), "{out}");

    let wrong = write(dir.path(), "wrong.json", r#"{"n": 2, "delay_a": 1, "delay_b": 2, "A": [[0.4]], "B": [[0.3]]}"#);
    assert_eq!(run(&["check", wrong.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["check", &data("scalar_stable.json"), "--method", "thm7"]).0, 2);
    assert_eq!(run(&["check", &data("scalar_stable.json"), "--k-schedule", "2,1"]).0, 2);
    assert_eq!(run(&["check", &data("scalar_stable.json"), "--method", "robust"]).0, 2);
}

#[test]
fn check_other_conditions() {
    for method in ["carvalho", "kronecker", "ddmb", "bliman", "thm4schur", "thm4k1"] {
        let (code, out) = run(&["check", &data("scalar_stable.json"), "--method", method]);
        assert_eq!(code, 0, "{method}: {out}");
    }
    let (code, out) = run(&["check", &data("example.json"), "--method", "robust", "--k-schedule", "1"]);
    assert_eq!(code, 1, "r = 1 exceeds the margin: {out}");
    let (code, out) = run(&["check", &data("scalar_stable.json"), "--solver-config", &data("solver_supergradient.json")]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn equal_delays_use_the_sum() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "eq.json", r#"{"n": 1, "delay_a": 1.5, "delay_b": 1.5, "A": [[0.5]], "B": [[0.6]]}"#);
    let (code, out) = run(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("equal delays"));
}

#[test]
fn margin_examples() {
    let (code, out) = run(&["margin", &data("example.json"), "--r-max", "0.01"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(value(&out, "r_star"), 0.01);
    assert!(out.contains("conservative=false"));

    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("probes.csv");
    let (code, out) = run(&["margin", &data("example.json"), "--k", "2", "--transcript", t.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = value(&out, "r_star");
    assert!((r - 0.5001).abs() <= 0.005, "{out}");
    let probes = std::fs::read_to_string(t).unwrap();
    assert!(probes.starts_with("r,status,margin\n"));
    assert_eq!(probes.lines().count(), 1 + value(&out, "iterations") as usize);

    assert_eq!(run(&["margin", &data("scalar_stable.json")]).0, 2);
    assert_eq!(run(&["margin", &data("example.json"), "--tol", "0"]).0, 2);
}

#[test]
fn oracle_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(&["oracle", &data("scalar_stable.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("rho_max=0.700000000000"));
    assert!(circular_distance(value(&out, "argmax_theta"), 0.0) < 1e-6);

    let flip = write(dir.path(), "flip.json", r#"{"n": 1, "delay_a": 1, "delay_b": 2, "A": [[0.4]], "B": [[-0.3]]}"#);
    let csv = dir.path().join("sweep.csv");
    let (code, out) = run(&["oracle", flip.to_str().unwrap(), "--grid", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((value(&out, "rho_max") - 0.7).abs() < 1e-10);
    assert!(circular_distance(value(&out, "argmax_theta"), PI) < 1e-6);
    let table = std::fs::read_to_string(csv).unwrap();
    assert_eq!(table.lines().count(), 65);
    assert!(table.starts_with("theta,rho\n0,"));

    let (code, out) = run(&["oracle", &data("example.json")]);
    assert_eq!(code, 0);
    assert!(value(&out, "rho_max") < 1.0);
    assert_eq!(run(&["oracle", &data("scalar_unstable.json")]).0, 1);

    let edge = write(dir.path(), "edge.json", r#"{"n": 1, "delay_a": 1, "delay_b": 2, "A": [[0.5]], "B": [[0.5]]}"#);
    assert_eq!(run(&["oracle", edge.to_str().unwrap()]).0, 3);
}

#[test]
fn region_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("one.csv");
    let (code, out) = run(&["region", "--range", "0,0,0,0", "--out", out_csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let (methods, rows) = read_scan(&std::fs::read_to_string(&out_csv).unwrap()).unwrap();
    assert_eq!(methods, ["carvalho", "thm4k2", "kronecker"]);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].verdicts.iter().all(|v| v == "certified"));

    let empty = dir.path().join("empty.csv");
    let (code, _) = run(&["region", "--methods", "", "--range", "-0.1,0.1,0,0.1", "--step", "0.1", "--out", empty.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&empty).unwrap();
    assert!(text.starts_with("alpha,beta,rho_max,oracle_verdict\n"));
    assert!(!text.contains('"') && !text.contains('\r'));
    let (_, rows) = read_scan(&text).unwrap();
    let order: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.beta)).collect();
    assert_eq!(order, [(-0.1, 0.0), (-0.1, 0.1), (0.0, 0.0), (0.0, 0.1), (0.1, 0.0), (0.1, 0.1)]);
    for line in text.lines().skip(1) {
        let rho = line.split(',').nth(2).unwrap();
        assert!(rho.chars().filter(char::is_ascii_digit).count() >= 10, "{rho}");
    }

    let from_file = dir.path().join("file.csv");
    let gp = dir.path().join("regions.dat");
    let (code, _) = run(&[
        "region",
        "--template",
        &data("example_template.json"),
        "--methods",
        "thm4k1,blimank1",
        "--range",
        "-0.5,0.5,-0.5,0.5",
        "--step",
        "0.25",
        "--out",
        from_file.to_str().unwrap(),
        "--gnuplot",
        gp.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, rows) = read_scan(&std::fs::read_to_string(&from_file).unwrap()).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.verdicts[0] == r.verdicts[1]));
    let blocks = std::fs::read_to_string(gp).unwrap();
    assert_eq!(blocks.matches("\n\n\n").count(), 2);

    assert_eq!(run(&["region", "--methods", "robust", "--range", "0,0,0,0", "--out", out_csv.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["region", "--range", "0,0,0", "--out", out_csv.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["region", "--range", "0,0,0,0", "--out", "/nonexistent/dir/x.csv"]).0, 2);
}

#[test]
fn thread_setting() {
    assert_eq!(thread_cap(None), Ok(None));
    assert_eq!(thread_cap(Some("0")), Ok(None));
    assert_eq!(thread_cap(Some(" 3 ")), Ok(Some(3)));
    assert!(thread_cap(Some("many")).is_err());
    let out = Command::new(BIN)
        .env("DELTA_STAB_THREADS", "-1")
        .args(["oracle", &data("scalar_stable.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn matrix(n: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), n * n)
        .prop_map(move |v| RealMatrix::from_row_slice(n, n, &v))
}

proptest! {
    #[test]
    fn system_files_round_trip_bit_exactly(
        (a, b, e0) in (1usize..4).prop_flat_map(|n| (matrix(n), matrix(n), prop::collection::vec(-1e3f64..1e3, n))),
        delays in (1e-3f64..10.0, 1e-3f64..10.0),
    ) {
        let n = a.nrows();
        let sys = SystemPair::new(a.clone(), b.clone(), delays.0, delays.1).unwrap();
        let unc = UncertaintyModel::NormBounded { e0: RealMatrix::from_column_slice(n, 1, &e0), a0: a.clone(), b0: b.clone() };
        let text = SystemFile::from_system(&sys, Some(&unc)).to_json();
        let back = SystemFile::parse(&text).unwrap();
        let sys2 = back.system().unwrap();
        let (a2, b2, da, db) = sys2.original();
        prop_assert!(a2.iter().zip(a.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(b2.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert_eq!((da.to_bits(), db.to_bits()), (delays.0.to_bits(), delays.1.to_bits()));
        prop_assert_eq!(back.uncertainty().unwrap(), Some(unc));
    }
}
