use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use delay_sl_spectra::output::{read_csv, EigfnRow, SpectrumRow};
use delay_sl_spectra::{ComparisonRow, RunConfig};
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delay-sl-spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn short_c0(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(config("c0.conf")).unwrap();
    let text = text.replace("n_max = 40", "n_max = 8");
    let path = dir.join("c0_short.conf");
    fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn bundled_configs_load() {
    for name in ["c0.conf", "c1.conf", "c2.conf"] {
        let cfg = RunConfig::load(&config(name)).unwrap();
        cfg.spec.validate().unwrap();
    }
}

#[test]
fn solve_writes_spectrum_and_eigenfunctions() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "solve",
        "--config",
        short_c0(tmp.path()).to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let rows: Vec<SpectrumRow> = read_csv(&out_dir.join("spectrum.csv")).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        vec![5, 6, 7, 8]
    );
    // Roots of tan(s pi + pi/4) = s.
    let oracle = [
        4.175170849298237,
        5.189404330925418,
        6.199090732459504,
        7.20610808300944,
    ];
    for (row, want) in rows.iter().zip(oracle) {
        assert!((row.s_n - want).abs() < 1e-7, "{} vs {want}", row.s_n);
        assert_eq!(row.lambda_n, row.s_n * row.s_n);
        assert!(row.bracket_lo <= row.s_n && row.s_n <= row.bracket_hi);
    }

    let eig: Vec<EigfnRow> = read_csv(&out_dir.join("eigfn_5.csv")).unwrap();
    assert_eq!(eig.len(), 802);
    assert_eq!(eig[0].x, 0.0);
    assert_eq!(eig[0].y, 1.0);
    assert_eq!(eig[401].x, eig[400].x);
    assert_eq!(eig.last().unwrap().x, std::f64::consts::PI);
}

#[test]
fn csv_values_round_trip() {
    let tmp = TempDir::new().unwrap();
    let cfg = RunConfig {
        output_dir: tmp.path().to_path_buf(),
        n_max: 8,
        ..RunConfig::load(&config("c2.conf")).unwrap()
    };
    let solved = delay_sl_spectra::run_solve(&cfg).unwrap();
    let rows: Vec<SpectrumRow> = read_csv(&tmp.path().join("spectrum.csv")).unwrap();
    let expected: Vec<SpectrumRow> = solved
        .report
        .records
        .iter()
        .map(SpectrumRow::from)
        .collect();
    assert_eq!(rows, expected);

    let (cmp, _) = delay_sl_spectra::run_compare(&cfg).unwrap();
    let back: Vec<ComparisonRow> = read_csv(&tmp.path().join("compare.csv")).unwrap();
    assert_eq!(back, cmp.rows);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("compare.json")).unwrap())
            .unwrap();
    let from_json: Vec<ComparisonRow> = serde_json::from_value(json["rows"].clone()).unwrap();
    assert_eq!(from_json, cmp.rows);
    assert_eq!(json["sign"], "corrected");
}

#[test]
fn output_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let conf = short_c0(tmp.path());
    let mut bytes = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let out = run(&[
            "compare",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let solve = run(&[
            "solve",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&solve), 0);
        bytes.push(
            ["spectrum.csv", "eigfn_7.csv", "compare.csv", "compare.json"]
                .map(|f| fs::read(dir.join(f)).unwrap()),
        );
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sign_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let conf = short_c0(tmp.path());
    let out = run(&[
        "compare",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--sign",
        "paper",
    ]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("compare.json")).unwrap())
            .unwrap();
    assert_eq!(json["sign"], "paper");
    for row in json["rows"].as_array().unwrap() {
        assert!(row["err_refined"].as_f64().unwrap() > row["err_leading"].as_f64().unwrap());
    }
}

#[test]
fn missing_key_exits_1_and_names_it() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(config("c2.conf"))
        .unwrap()
        .replace("p1 = 1\n", "");
    let path = tmp.path().join("bad.conf");
    fs::write(&path, text).unwrap();
    let out = run(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("p1"));
}

#[test]
fn coupling_violation_exits_1_before_any_check() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(config("c2.conf"))
        .unwrap()
        .replace("delta2 = 2", "delta2 = 3");
    let path = tmp.path().join("bad.conf");
    fs::write(&path, text).unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("coupling"));
    assert!(!out_dir.join("verify.json").exists());
}

#[test]
fn delay_leaving_its_piece_exits_1() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(config("c2.conf"))
        .unwrap()
        .replace("0.4*abs(sin(2*x))", "0.3");
    let path = tmp.path().join("bad.conf");
    fs::write(&path, text).unwrap();
    let out = run(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_usage_exits_1() {
    assert_eq!(code(&run(&["solve"])), 1);
    assert_eq!(code(&run(&["frobnicate", "--config", "x"])), 1);
    assert_eq!(
        code(&run(&["solve", "--config", "/nonexistent/file.conf"])),
        1
    );
}

#[test]
fn window_failure_exits_2_and_keeps_partial_output() {
    // A strong constant potential shifts the low roots out of their windows.
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(config("c0.conf"))
        .unwrap()
        .replace("q = 0", "q = 30")
        .replace("n_min = 5", "n_min = 2")
        .replace("n_max = 40", "n_max = 6");
    let path = tmp.path().join("low.conf");
    fs::write(&path, text).unwrap();
    let out = run(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("n=2") && stderr.contains("no sign change"),
        "{stderr}"
    );
    let rows: Vec<SpectrumRow> = read_csv(&tmp.path().join("spectrum.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![4, 5]);
    assert!(tmp.path().join("eigfn_4.csv").exists());
    assert!(!tmp.path().join("eigfn_2.csv").exists());
}

#[test]
fn verify_writes_report_and_exits_0_with_failures() {
    let tmp = TempDir::new().unwrap();
    let out = run(&[
        "verify",
        "--config",
        config("c2.conf").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    let checks = json["checks"].as_array().unwrap();
    let any_fail = checks.iter().any(|c| c["status"] == "fail");
    assert_eq!(json["overall"], if any_fail { "fail" } else { "pass" });
    let decay = checks
        .iter()
        .find(|c| c["name"] == "decay_integrals")
        .unwrap();
    assert!(decay["detail"].as_str().unwrap().contains("slopes"));
}
