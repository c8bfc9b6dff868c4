use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sonarwave"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn sonarwave")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn metrics_on_reference_gsfm() {
    let spec = example("gsfm_iv_a.json");
    let v = stdout_json(&run(&["metrics", "--spec", spec.to_str().unwrap()]));
    let papr = v["papr_db"].as_f64().unwrap();
    let b98 = v["band_98"].as_f64().unwrap();
    assert!((3.2..=3.3).contains(&papr), "{papr}");
    assert!((b98 - 632.0).abs() <= 0.03 * 632.0, "{b98}");
}

#[test]
fn af_single_cell_is_one() {
    let spec = example("cw.json");
    let out = run(&["af", "--spec", spec.to_str().unwrap(), "--taus", "0", "--etas", "1", "--format", "json"]);
    let v = stdout_json(&out);
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 1);
    assert!((values[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn compare_sweep_gsfm_undominated() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["gsfm", "costas_tukey085", "bpsk_hann", "qpsk"] {
        let file = format!("tbp100_{name}.json");
        std::fs::copy(example("sweep").join(&file), dir.path().join(&file)).unwrap();
    }
    let out = run(&["compare", "--specs", dir.path().to_str().unwrap(), "--band", "auto", "--format", "json"]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let gsfm = rows.iter().find(|r| r["family"] == "gsfm").unwrap();
    assert_eq!(gsfm["undominated"], true);
    assert!(rows.iter().all(|r| r["error"].is_null()));
}

#[test]
fn outputs_are_byte_identical() {
    let spec = example("fig5_sfm.json");
    let spec = spec.to_str().unwrap();
    for args in [
        vec!["gen", "--spec", spec],
        vec!["metrics", "--spec", spec],
        vec!["af", "--spec", spec, "--tau-range", "-0.01,0.01,21", "--v-range", "5,5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn gen_round_trip_preserves_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sig.csv");
    let spec = example("fig7_gsfm.json");
    let spec = spec.to_str().unwrap();
    assert!(run(&["gen", "--spec", spec, "--output", csv.to_str().unwrap()]).status.success());
    let direct = stdout_json(&run(&["metrics", "--spec", spec]));
    let again = stdout_json(&run(&["metrics", "--signal", csv.to_str().unwrap(), "--fc", "2000"]));
    for key in ["papr_db", "se", "band_98", "energy"] {
        let (a, b) = (direct[key].as_f64().unwrap(), again[key].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{key}: {a} vs {b}");
    }
}

#[test]
fn f32bin_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("af.bin");
    let spec = example("fig1_lfm.json");
    let status = run(&[
        "af",
        "--spec",
        spec.to_str().unwrap(),
        "--tau-range",
        "-0.02,0.02,41",
        "--v-range",
        "10,11",
        "--format",
        "f32bin",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let surface = sonarwave::ambiguity::read_f32bin(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!((surface.n_delays, surface.n_etas), (41, 11));
}

#[test]
fn unknown_spec_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family":"gsfm","t":0.5,"f_c":2000,"delta_f":500,"rhoo":2.9,"alpha":253.78}"#).unwrap();
    let out = run(&["metrics", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rhoo"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let neg = dir.path().join("neg.json");
    std::fs::write(&neg, r#"{"family":"lfm","t":-1,"f_c":2000,"delta_f":100}"#).unwrap();
    let out = run(&["gen", "--spec", neg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`t`"));
    // Too few FFT bins for the closed form: a numeric failure.
    let sfm = example("fig5_sfm.json");
    let out = run(&["spectrum", "--spec", sfm.to_str().unwrap(), "--method", "closed", "--nfft", "32768"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn closed_spectrum_matches_fft_near_carrier() {
    let sfm = example("fig5_sfm.json");
    let sfm = sfm.to_str().unwrap();
    let parse = |out: Output| -> Vec<(f64, f64)> {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut r = csv::Reader::from_reader(out.stdout.as_slice());
        r.deserialize().map(|x| x.unwrap()).collect()
    };
    let args = ["spectrum", "--spec", sfm, "--range", "1850,2150", "--nfft", "262144"];
    let fft = parse(run(&args));
    let closed = parse(run(&[&args[..], &["--method", "closed"]].concat()));
    assert_eq!(fft.len(), closed.len());
    for ((f1, a), (f2, b)) in fft.iter().zip(&closed) {
        assert_eq!(f1, f2);
        if *a > -30.0 {
            assert!((a - b).abs() < 0.05, "{f1}: {a} vs {b}");
        }
    }
}

#[test]
fn trw_reference_row_is_zero() {
    let trw = example("trw");
    let out = run(&[
        "trw",
        "--specs",
        trw.join("gsfm_iv.json").to_str().unwrap(),
        trw.join("lfm_ii.json").to_str().unwrap(),
        "--reference",
        "gsfm_iv",
        "--format",
        "json",
    ]);
    let rows = stdout_json(&out);
    assert_eq!(rows[0]["e_tilde_db"].as_f64().unwrap(), 0.0);
    assert!(rows[1]["e_tilde_db"].as_f64().unwrap().is_finite());
    let missing = run(&["trw", "--specs", trw.join("lfm_i.json").to_str().unwrap(), "--reference", "nope"]);
    assert_eq!(missing.status.code(), Some(1));
}
