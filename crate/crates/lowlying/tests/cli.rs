use std::path::{Path, PathBuf};
use std::process::Command;

use lowlying::cli::run;
use tempfile::TempDir;

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_forms.csv")
}

fn run_to(dir: &TempDir, name: &str, args: &[&str]) -> (i32, String) {
    let out = dir.path().join(name);
    let mut argv = vec!["lowlying", "-o", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    let code = run(argv);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn binary(args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lowlying"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn success_exits_zero() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run_to(&dir, "k.json", &["kernels", "--eta", "0.8", "--group", "o"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let (hat, phi0) = (v["phi_hat_0"].as_f64().unwrap(), v["phi_0"].as_f64().unwrap());
    assert!((v["o_prediction"].as_f64().unwrap() - (hat + phi0 / 2.0)).abs() < 1e-12);
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(["lowlying", "bessel-int", "--bogus"]), 2);
    assert_eq!(run(["lowlying", "--T", "10", "bessel-int", "--X", "1"]), 2);
    assert_eq!(run(["lowlying", "--tol", "2", "kernels", "--eta", "0.5"]), 2);
    assert_eq!(run(["lowlying", "--maass-data", "/nonexistent/forms.csv", "validate-data"]), 2);
    assert_eq!(run(["lowlying", "density"]), 2);
    assert_eq!(run(["lowlying", "--help"]), 0);
}

#[test]
fn failed_verification_exits_one() {
    // three forms are too few to bound the spectral tail
    let dir = TempDir::new().unwrap();
    let data = sample();
    let (code, text) = run_to(
        &dir,
        "tv.json",
        &["--maass-data", data.to_str().unwrap(), "trace-verify", "--width", "1.5", "--m-list", "1", "--n-list", "1"],
    );
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v[0]["passed"], false);
    assert_eq!(v[0]["spectral"]["records_used"], 3);
}

#[test]
fn real_process_exit_codes() {
    assert_eq!(binary(&["bessel-int", "--bogus"], &[]).0, 2);
    assert_eq!(binary(&["kernels", "--eta", "0.5"], &[]).0, 0);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let args = |t: &'static str| ["--threads", t, "--T-list", "11,21", "bound-scan", "--which", "small_X"];
    let (c1, one) = run_to(&dir, "a.csv", &args("1"));
    let (c2, two) = run_to(&dir, "b.csv", &args("2"));
    let (c3, again) = run_to(&dir, "c.csv", &args("1"));
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert!(one.starts_with("which,X,T,value,bound,ratio\n"));
    assert_eq!(one, two);
    assert_eq!(one, again);
}

#[test]
fn data_dir_fallback() {
    let dir = TempDir::new().unwrap();
    std::fs::copy(sample(), dir.path().join("fallback_only_forms.csv")).unwrap();
    std::env::set_var(lowlying::data::DATA_DIR_VAR, dir.path());
    let out = TempDir::new().unwrap();
    let (code, text) = run_to(&out, "v.json", &["--maass-data", "fallback_only_forms.csv", "validate-data"]);
    assert_eq!(code, 0);
    assert!(text.contains("\"failure_count\": 0"));
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"T": 5}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let t_of = |text: &str| serde_json::from_str::<serde_json::Value>(text).unwrap()["T"].as_u64().unwrap();
    let (code, text) = run_to(&dir, "a.json", &["--config", cfg, "bessel-int", "--X", "1", "--method", "residue"]);
    assert_eq!((code, t_of(&text)), (0, 5));
    let (code, text) = run_to(&dir, "b.json", &["--config", cfg, "--T", "7", "bessel-int", "--X", "1", "--method", "residue"]);
    assert_eq!((code, t_of(&text)), (0, 7));
    std::fs::write(dir.path().join("bad.json"), r#"{"temperature": 5}"#).unwrap();
    assert_eq!(run(["lowlying", "--config", dir.path().join("bad.json").to_str().unwrap(), "kernels", "--eta", "0.5"]), 2);
}

#[test]
fn environment_sits_below_config_and_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("m8.json");
    std::fs::write(&cfg, r#"{"M": 8}"#).unwrap();
    let base = ["--T", "5", "bessel-int", "--X", "1", "--method", "residue"];
    let (_, m8) = binary(&base, &[]);
    let (_, m12) = binary(&[&["--M", "12"][..], &base[..]].concat(), &[]);
    assert_ne!(m8, m12);
    let (_, env12) = binary(&base, &[("LOWLYING_M", "12")]);
    assert_eq!(env12, m12);
    let (_, file_over_env) = binary(&[&["--config", cfg.to_str().unwrap()][..], &base[..]].concat(), &[("LOWLYING_M", "12")]);
    assert_eq!(file_over_env, m8);
    let (_, flag_over_env) = binary(&[&["--M", "8"][..], &base[..]].concat(), &[("LOWLYING_M", "12")]);
    assert_eq!(flag_over_env, m8);
    assert_eq!(binary(&base, &[("LOWLYING_M", "eight")]).0, 2);
}
