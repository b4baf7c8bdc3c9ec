use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use wavebank::cascade::scaling_function;
use wavebank::design::{daubechies4, lifting_recompose, LiftingStep};
use wavebank::filterbank::polyphase_from_filters;
use wavebank::io::{read_signal_csv, write_grid_csv};
use wavebank::operators::{packet_decompose, pyramid_decompose, PacketPartition, Signal};
use wavebank::{Complex64, FilterBank, LaurentPoly, MatLaurentPoly};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavebank"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_bank(dir: &Path, name: &str, bank: &FilterBank) {
    fs::write(dir.join(name), serde_json::to_string(bank).unwrap()).unwrap();
}

fn read_bank(path: &Path) -> FilterBank {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_signal(path: &Path) -> Signal {
    read_signal_csv(fs::read(path).unwrap().as_slice()).unwrap()
}

const SIGNAL: &str = "index,re,im\n-2,1,0\n-1,2,0.5\n0,-1,0\n1,0.5,0.25\n3,3,0\n4,-0.75,1\n";

/// Haar with its high-pass stretched by `z³`: a valid QMF bank whose scaling
/// function has non-orthonormal translates.
fn stretched_haar() -> FilterBank {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    FilterBank::new(2, vec![LaurentPoly::from_real(0, &[r, 0.0, 0.0, r]), LaurentPoly::from_real(0, &[r, 0.0, 0.0, -r])])
        .unwrap()
}

#[test]
fn design_from_projections_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("params.json"), r#"[{"lambda": 0.3, "theta": 1.0}, {"lambda": 0.8, "theta": 4.5}]"#)
        .unwrap();
    assert_eq!(status(&run(dir.path(), &["design", "--projections", "params.json", "-o", "bank.json"])), 0);
    let bank = read_bank(&dir.path().join("bank.json"));
    assert_eq!(bank.scale_n(), 2);
    let out = run(dir.path(), &["verify", "bank.json"]);
    assert_eq!(status(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["polyphase_unitary"], true);
}

#[test]
fn verify_rejects_broken_bank_with_status_one() {
    let dir = TempDir::new().unwrap();
    let ones = LaurentPoly::from_real(0, &[1.0, 1.0]);
    write_bank(dir.path(), "broken.json", &FilterBank::new(2, vec![ones.clone(), ones]).unwrap());
    let out = run(dir.path(), &["verify", "broken.json", "-o", "report.json"]);
    assert_eq!(status(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["qmf"]["max_residual"].as_f64().unwrap() > 1.0);
}

#[test]
fn malformed_input_exits_two_with_line_number() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"N\": 2,\n \"filters\": [oops]}").unwrap();
    let out = run(dir.path(), &["verify", "bad.json"]);
    assert_eq!(status(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    write_bank(dir.path(), "d4.json", &daubechies4());
    fs::write(dir.path().join("sig.csv"), "index,re,im\n0,1,0\n1,x,0\n").unwrap();
    let out = run(dir.path(), &["pyramid", "d4.json", "sig.csv", "-o", "out"]);
    assert_eq!(status(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(status(&run(dir.path(), &["frobnicate"])), 2);
    assert_eq!(status(&run(dir.path(), &["design", "-o", "x.json"])), 2);
    assert_eq!(status(&run(dir.path(), &["verify", "missing.json"])), 2);
    assert_eq!(status(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn cascade_matches_library_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    assert_eq!(status(&run(dir.path(), &["design", "--d4", "-o", "bank.json"])), 0);
    let out = run(
        dir.path(),
        &["cascade", "bank.json", "--j", "10", "--iters", "12", "-o", "phi.csv", "--plot", "phi.svg", "--wavelets", "psi"],
    );
    assert_eq!(status(&out), 0);
    let mut expected = Vec::new();
    write_grid_csv(&mut expected, &scaling_function(&daubechies4(), 10, 12).unwrap().phi).unwrap();
    assert_eq!(fs::read(dir.path().join("phi.csv")).unwrap(), expected);
    let svg = fs::read_to_string(dir.path().join("phi.svg")).unwrap();
    assert!(svg.contains("<polyline"));
    assert!(dir.path().join("psi/psi_1.csv").exists());
    assert!(dir.path().join("psi/psi_1.svg").exists());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["iterations"], 12);
}

#[test]
fn packets_write_one_file_per_leaf() {
    let dir = TempDir::new().unwrap();
    let bank = daubechies4();
    write_bank(dir.path(), "d4.json", &bank);
    fs::write(dir.path().join("sig.csv"), SIGNAL).unwrap();
    let out = run(dir.path(), &["packets", "d4.json", "sig.csv", "--leaves", "1:1,2:0,3:2,3:6", "-o", "leaves"]);
    assert_eq!(status(&out), 0);
    let signal = read_signal_csv(SIGNAL.as_bytes()).unwrap();
    let partition = PacketPartition::new([(1, 1), (2, 0), (3, 2), (3, 6)]);
    let expected = packet_decompose(&signal, &bank, &partition).unwrap();
    let mut names: Vec<String> =
        fs::read_dir(dir.path().join("leaves")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["1_1.csv", "2_0.csv", "3_2.csv", "3_6.csv"]);
    for ((k, n), s) in expected {
        assert_eq!(read_signal(&dir.path().join(format!("leaves/{k}_{n}.csv"))), s);
    }

    let out = run(dir.path(), &["packets", "d4.json", "sig.csv", "--leaves", "1:1,2:0", "-o", "bad"]);
    assert_eq!(status(&out), 2);
}

#[test]
fn pyramid_matches_library() {
    let dir = TempDir::new().unwrap();
    let bank = daubechies4();
    write_bank(dir.path(), "d4.json", &bank);
    fs::write(dir.path().join("sig.csv"), SIGNAL).unwrap();
    let out = run(dir.path(), &["pyramid", "d4.json", "sig.csv", "--levels", "3", "-o", "pyr"]);
    assert_eq!(status(&out), 0);
    let p = pyramid_decompose(&read_signal_csv(SIGNAL.as_bytes()).unwrap(), &bank, 3).unwrap();
    assert_eq!(read_signal(&dir.path().join("pyr/coarse.csv")), p.coarse);
    for (level, details) in p.details.iter().enumerate() {
        assert_eq!(read_signal(&dir.path().join(format!("pyr/detail_{}_1.csv", level + 1))), details[0]);
    }
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["reconstruction_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn transfer_status_follows_orthonormality() {
    let dir = TempDir::new().unwrap();
    write_bank(dir.path(), "haar.json", &FilterBank::haar());
    write_bank(dir.path(), "stretched.json", &stretched_haar());
    let out = run(dir.path(), &["transfer", "haar.json", "--n-max", "400", "--per-grid", "16"]);
    assert_eq!(status(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["spectrum"]["pf_holds"], true);
    assert_eq!(status(&run(dir.path(), &["transfer", "stretched.json", "--n-max", "400", "--per-grid", "16"])), 1);
}

#[test]
fn lift_recomposes_polyphase_matrix() {
    let dir = TempDir::new().unwrap();
    let bank = daubechies4();
    write_bank(dir.path(), "d4.json", &bank);
    assert_eq!(status(&run(dir.path(), &["lift", "d4.json", "-o", "steps.json"])), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("steps.json")).unwrap()).unwrap();
    let steps: Vec<LiftingStep> = serde_json::from_value(v["steps"].clone()).unwrap();
    let c: Complex64 = serde_json::from_value(v["det_factor"]["c"].clone()).unwrap();
    let deg = v["det_factor"]["deg"].as_i64().unwrap() as i32;
    let factor = MatLaurentPoly::from_entries(&[
        vec![LaurentPoly::one(), LaurentPoly::zero()],
        vec![LaurentPoly::zero(), LaurentPoly::monomial(c, deg)],
    ])
    .unwrap();
    let rebuilt = factor.checked_mul(&lifting_recompose(&steps)).unwrap();
    assert!(rebuilt.distance(&polyphase_from_filters(&bank)) < 1e-9);
}

#[test]
fn seed_fixes_random_designs() {
    let dir = TempDir::new().unwrap();
    for (seed, name) in [("7", "a.json"), ("7", "b.json"), ("8", "c.json")] {
        assert_eq!(status(&run(dir.path(), &["--seed", seed, "design", "--random", "3", "-o", name])), 0);
    }
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
    assert_eq!(status(&run(dir.path(), &["verify", "a.json"])), 0);
}

#[test]
fn design_writes_dual_bank() {
    let dir = TempDir::new().unwrap();
    assert_eq!(status(&run(dir.path(), &["design", "--six-tap", "0.4", "-1.2", "-o", "six.json", "--dual", "dual.json"])), 0);
    let primal = read_bank(&dir.path().join("six.json"));
    let dual = read_bank(&dir.path().join("dual.json"));
    assert_eq!(primal.filters().len(), 2);
    assert!(primal.distance(&dual) < 1e-12);
}
