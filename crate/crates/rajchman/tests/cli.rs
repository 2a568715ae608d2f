//! The binary end to end: exit codes, artifacts and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rajchman(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rajchman"));
    cmd.args(args).env_remove("RAJCHMAN_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("RAJCHMAN_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn classify_examples() {
    for (expr, want) in [
        ("logpow(1)", "in"),
        ("powerlaw(0.5)", "not-in"),
        ("steptower", "gap"),
    ] {
        let o = rajchman(&["classify", "--expr", expr], None);
        assert_eq!(code(&o), 0);
        let r = json(&o.stdout);
        assert_eq!(r["result"]["outcome"], want, "{expr}");
        assert_eq!(r["config"]["command"]["expr"], expr);
    }
    let o = rajchman(&["classify", "--expr", "logpow("], None);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o.stderr)["reason"], "parse");
    assert_eq!(code(&rajchman(&["classify"], None)), 3);
    assert_eq!(code(&rajchman(&["--help"], None)), 0);
}

#[test]
fn gauge_dichotomy_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let o = rajchman(
        &[
            "gauge",
            "--h",
            "1/log(1/s)",
            "--profile",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let r = json(&o.stdout);
    assert_eq!(r["result"]["dichotomy"], "not-sigma-finite");
    assert_eq!(r["result"]["profile"]["gamma_above_h"], 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,gamma,argmin_s"));
    assert_eq!(lines.count(), 241);
    let o = rajchman(&["gauge", "--h", "s^0.5"], None);
    assert_eq!(json(&o.stdout)["result"]["dichotomy"], "zero-measure");
}

#[test]
fn build_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = rajchman(
        &[
            "build",
            "--target",
            "logpow(1)",
            "--levels",
            "1",
            "--emit",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = out.join("manifest.json");
    assert_eq!(std::fs::read(&manifest).unwrap(), o.stdout);
    let r = json(&o.stdout);
    assert_eq!(r["result"]["certified"], true);
    assert_eq!(r["result"]["levels"][0]["M"], 512);
    let v = rajchman(&["verify", "--manifest", manifest.to_str().unwrap()], None);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
    assert_eq!(json(&v.stdout)["result"]["violations"], 0);

    // a smaller constant no longer certifies the reloaded spectrum
    let mut doc = r.clone();
    doc["result"]["C"] = Value::from(r["result"]["C"].as_f64().unwrap() * 0.5);
    std::fs::write(&manifest, serde_json::to_string(&doc).unwrap()).unwrap();
    let v = rajchman(&["verify", "--manifest", manifest.to_str().unwrap()], None);
    assert_eq!(code(&v), 2);
    assert!(json(&v.stdout)["result"]["violations"].as_u64().unwrap() > 0);
    assert_eq!(json(&v.stderr)["exit_code"], 2);
}

#[test]
fn refusals_and_caps_exit_two() {
    let o = rajchman(&["build", "--target", "powerlaw(1)"], None);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o.stderr)["reason"], "rejected");
    let o = rajchman(&["build", "--target", "logpow(1)", "--levels", "4"], None);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o.stderr)["reason"], "cap-exceeded");
    let o = rajchman(
        &["build", "--target", "logpow(1)", "--grid-max", "-1"],
        None,
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn second_level_failure_is_reported_with_the_partial_build() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m2");
    let o = rajchman(
        &[
            "build",
            "--target",
            "logpow(1)",
            "--levels",
            "2",
            "--emit",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 2);
    let r = json(&std::fs::read(out.join("manifest.json")).unwrap());
    assert_eq!(r["status"], "verification-failed");
    assert_eq!(r["result"]["certified"], false);
    assert_eq!(r["result"]["failure"]["reason"], "cap-exceeded");
    assert_eq!(r["result"]["levels_completed"], 1);
    let tried: Vec<u64> = r["result"]["attempts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["M"].as_u64().unwrap())
        .collect();
    assert_eq!(tried.last(), Some(&1025));
}

#[test]
fn builds_are_byte_identical_with_and_without_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("m");
    let args = [
        "build",
        "--target",
        "logpow(1)",
        "--levels",
        "1",
        "--grid-max",
        "2000",
        "--emit",
        out.to_str().unwrap(),
    ];
    let cold = rajchman(&args, Some(&cache));
    let spectrum_cold = std::fs::read(out.join("spectrum.json")).unwrap();
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    let warm = rajchman(&args, Some(&cache));
    let plain = rajchman(&args, None);
    assert_eq!(code(&cold), 0);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.stdout, plain.stdout);
    assert_eq!(
        std::fs::read(out.join("spectrum.json")).unwrap(),
        spectrum_cold
    );
}

#[test]
fn multiply_persisted_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, ab) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("ab.json"),
    );
    for (target, out) in [("logpow(1)", &a), ("logpow(2)", &b)] {
        let o = rajchman(
            &[
                "build",
                "--target",
                target,
                "--levels",
                "1",
                "--grid-max",
                "500",
                "--emit",
                out.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(code(&o), 0);
    }
    let sa = a.join("spectrum.json");
    let sb = b.join("spectrum.json");
    let o = rajchman(
        &[
            "multiply",
            sa.to_str().unwrap(),
            sb.to_str().unwrap(),
            "--n-max",
            "6000",
            "--out",
            ab.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o.stdout);
    assert_eq!(r["result"]["n_max"], 6000);
    let s = rajchman::spectrum_io::read(&ab).unwrap();
    assert_eq!(s.n_max, 6000);
    assert_eq!(s.meta.m_list.len(), 2);
}

#[test]
fn certify_out_and_refusal() {
    let o = rajchman(
        &[
            "certify",
            "--target",
            "tauexp(abscos(1))",
            "--grid-max",
            "500",
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let c = &json(&o.stdout)["result"]["certificate"];
    assert_eq!(c["direction"], "not-in");
    assert_eq!(c["violations"], 0);
    assert_eq!(c["dominating_power_law"], "powerlaw(0.5)");
    assert!(c["max_residual"].as_f64().unwrap() <= 0.0);
    let o = rajchman(&["certify", "--target", "tauexp(const(0))"], None);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o.stderr)["reason"], "inapplicable");
}

#[test]
fn emit_plot_series() {
    let o = rajchman(
        &[
            "emit-plot",
            "--expr",
            "tauexp(abscos(1))",
            "--with",
            "powerlaw(0.5),const(1)",
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rows.headers().unwrap().iter().collect::<Vec<_>>(),
        ["xi", "f", "powerlaw(0.5)", "const(1)"]
    );
    for row in rows.records() {
        let v: Vec<f64> = row.unwrap().iter().map(|c| c.parse().unwrap()).collect();
        // the oscillating decay sits between its two envelopes
        assert!(v[2] * (1.0 - 1e-12) <= v[1].max(v[2]) && v[1] <= v[3] * (1.0 + 1e-15));
        assert!(v[1] >= 1.0 / v[0] * (1.0 - 1e-12));
    }
    let o = rajchman(&["emit-plot", "--expr", "steptower"], None);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().len(), 4);
    let mut steps = 0;
    let mut prev = f64::NAN;
    for row in rows.records() {
        let row = row.unwrap();
        let Ok(phi) = row[1].parse::<f64>() else {
            continue;
        };
        let (lo, hi): (f64, f64) = (row[3].parse().unwrap(), row[2].parse().unwrap());
        assert!(
            lo <= phi * (1.0 + 1e-12) && phi <= hi * (1.0 + 1e-12),
            "{row:?}"
        );
        if phi != prev {
            steps += 1;
            prev = phi;
        }
    }
    assert!(steps >= 2);
}

#[test]
fn config_files_drive_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command": {"subcommand": "classify", "expr": "invloglog"}}"#,
    )
    .unwrap();
    let a = rajchman(&["--config", cfg.to_str().unwrap()], None);
    let b = rajchman(&["classify", "--expr", "invloglog"], None);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    std::fs::write(
        &cfg,
        r#"{"command": {"subcommand": "classify", "expr": "invloglog", "extra": 1}}"#,
    )
    .unwrap();
    let bad = rajchman(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(code(&bad), 3);
    assert_eq!(json(&bad.stderr)["reason"], "config");
}
