//! End-to-end tests of the `fastmm` binary: outputs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn fastmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastmm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn validate_bundled_scheme() {
    let o = fastmm(&["validate", "--scheme", "strassen"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "valid");
}

#[test]
fn validate_rejects_the_sparse_core() {
    let o = fastmm(&["validate", "--scheme", "altbasis-core"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("invalid"));
}

#[test]
fn gamma_single_value() {
    let o = fastmm(&["gamma", "--scheme", "strassen", "--p", "inf", "--q", "inf"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "12");
}

#[test]
fn bounds_csv_columns() {
    let o = fastmm(&["bounds", "--scheme", "strassen", "--csv"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "scheme,p,q,gamma,amp,q0,exponent,leading_coeff");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..3], &["strassen", "inf", "inf"]);
    assert!((first[7].parse::<f64>().unwrap() - 10.6).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&fastmm(&["frobnicate"])), 2);
    assert_eq!(code(&fastmm(&["validate", "--scheme", "strassen", "--bogus"])), 2);
    assert_eq!(code(&fastmm(&["validate", "--scheme", "no-such-scheme"])), 2);
    assert_eq!(code(&fastmm(&["validate"])), 2);
    assert_eq!(code(&fastmm(&["optimize", "--input", "/nonexistent/file.sms"])), 2);
    assert_eq!(code(&fastmm(&["mm", "--scheme", "strassen", "--size", "30", "--seed", "1"])), 2);
}

#[test]
fn randomized_commands_require_a_seed() {
    for args in [
        &["orbit", "--scheme", "strassen"][..],
        &["mm", "--scheme", "strassen", "--size", "32"][..],
        &["bench", "--sizes", "32"][..],
    ] {
        let o = fastmm(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    }
}

#[test]
fn optimize_and_transpose_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sms = dir.path().join("m.sms");
    std::fs::write(&sms, "3 2 M\n1 1 1\n2 2 1\n3 1 1\n3 2 1\n0 0 0").unwrap();
    let o = fastmm(&["optimize", "--input", sms.to_str().unwrap(), "--mode", "best", "--emit", "text-slp"]);
    assert_eq!(code(&o), 0);
    let slp = stdout(&o);
    assert!(slp.starts_with("# slp inputs=2 outputs=3"));
    assert_eq!(slp.lines().filter(|l| l.contains(" + ") || l.contains(" - ")).count(), 1);
    let slp_path = dir.path().join("p.slp");
    std::fs::write(&slp_path, &slp).unwrap();
    let t = fastmm(&["transpose", "--input", slp_path.to_str().unwrap()]);
    assert_eq!(code(&t), 0);
    let text = stdout(&t);
    assert!(text.starts_with("# slp inputs=3 outputs=2"));
    // adds(sᵀ) = adds(s) + n_out − n_in = 1 + 3 − 2.
    assert_eq!(text.lines().filter(|l| l.contains(" + ") || l.contains(" - ")).count(), 2);
}

#[test]
fn optimize_scheme_counts() {
    let o = fastmm(&["optimize", "--scheme", "winograd", "--emit", "csv-counts"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let total = out.lines().find(|l| l.contains(",total,")).unwrap();
    assert_eq!(total.split(',').nth(5), Some("15"));
}

#[test]
fn sparsify_emits_six_blocks() {
    let o = fastmm(&["sparsify", "--scheme", "accurate"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for name in ["phi", "psi", "nu", "Ls", "Rs", "Ps"] {
        assert!(out.contains(&format!("# {name}\n")), "{name}");
    }
    assert!(out.contains("core additions   12"));
    assert!(out.contains("verified         true"));
}

#[test]
fn mm_reports_error_and_bound() {
    let o = fastmm(&["mm", "--scheme", "strassen", "--size", "64", "--seed", "5", "--dist", "normal"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let field = |name: &str| -> f64 {
        out.lines().find(|l| l.starts_with(name)).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!(field("err_max") > 0.0);
    assert!(field("err_max") <= field("bound"));
    let alt = fastmm(&["mm", "--altbasis", "--size", "64", "--seed", "5"]);
    assert_eq!(code(&alt), 0);
    assert!(stdout(&alt).contains("(altbasis)"));
}

fn bench_csv(dir: &Path, name: &str) -> String {
    let out = dir.join(name);
    let o = fastmm(&[
        "bench",
        "--plans",
        "classical,strassen,altbasis:accurate",
        "--sizes",
        "32,64",
        "--dists",
        "uniform",
        "--trials",
        "3",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn bench_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = bench_csv(dir.path(), "a.csv");
    let b = bench_csv(dir.path(), "b.csv");
    assert_eq!(a, b);
    assert_eq!(a.lines().next().unwrap(), "scheme,plan,m,k,n,levels,dist,trial,err_max,rel_err,bound,ratio,seed");
    assert_eq!(a.lines().count(), 1 + 3 * 2 * 3);
}

#[test]
fn catalog_lists_bundled_schemes() {
    let o = fastmm(&["catalog"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for name in ["strassen", "winograd", "accurate", "powers", "altbasis-core", "smirnov336-accurate"] {
        assert!(out.contains(name), "{name}");
    }
}
