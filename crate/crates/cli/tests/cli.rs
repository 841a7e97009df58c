use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL_GRID: [&str; 8] = [
    "--beta-range",
    "6",
    "--beta-step",
    "0.05",
    "--alpha-range",
    "2",
    "--alpha-step",
    "0.1",
];

fn ncq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncq"))
        .args(args)
        .output()
        .expect("ncq runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_grid<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(SMALL_GRID).collect()
}

#[test]
fn simulate_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = ncq(&[
            "simulate",
            "--state",
            "squeezed:0.2,5.0",
            "--phases",
            "12",
            "--samples",
            "1000",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(a.join("quadratures.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 12 * 1000);
    assert_eq!(text, fs::read_to_string(b.join("quadratures.csv")).unwrap());
    let meta = read_json(&a.join("quadratures.json"));
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["config"]["seed"], 42);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn simulate_records_a_drawn_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&[
        "simulate",
        "--state",
        "vacuum",
        "--samples",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let meta = read_json(&dir.path().join("quadratures.json"));
    assert!(meta["seed"].is_u64());
    assert_eq!(meta["seed"], meta["config"]["seed"]);
}

#[test]
fn missing_state_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&["simulate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage: ncq simulate"));
    let o = ncq(&["pipeline", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = ncq(&["simulate", "--state", "vacuum", "--samples", "1", "--seed", "1", "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn pipeline_squeezed_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ncq(&with_grid(&["pipeline", "--state", "squeezed:0.2,5.0", "--width", "1.2,1.5", "--out", out]));
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("verdict.json"));
    assert_eq!(v["nonclassical"], true);
    let m12 = v["widths"][0]["min_value"].as_f64().unwrap();
    let m15 = v["widths"][1]["min_value"].as_f64().unwrap();
    assert!(m12 < 0.0 && m15 < m12, "{m12} {m15}");
    for name in ["p_w1.2.csv", "p_w1.2.json", "section_w1.5.csv", "section_w1.5.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let header = fs::read_to_string(dir.path().join("p_w1.2.csv")).unwrap();
    assert!(header.starts_with("alpha_r,alpha_i,p,sigma\n"));
    assert_eq!(header.lines().count(), 1 + 41 * 41);
}

#[test]
fn pipeline_coherent_has_no_negativity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ncq(&with_grid(&["pipeline", "--state", "coherent:1", "--width", "1.2", "--out", out]));
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("verdict.json"));
    assert_eq!(v["widths"][0]["verdict"], "no negativity");
    assert_eq!(v["nonclassical"], false);
}

#[test]
fn pipeline_sampled_is_significant_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = ncq(&with_grid(&[
            "pipeline",
            "--state",
            "squeezed:0.2,5.0",
            "--samples",
            "20000",
            "--seed",
            "42",
            "--width",
            "1.2",
            "--out",
            out.to_str().unwrap(),
        ]));
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let v = read_json(&a.join("verdict.json"));
    assert_eq!(v["nonclassical"], true);
    assert!(v["widths"][0]["ratio"].as_f64().unwrap() >= 5.0);
    for name in ["p_w1.2.csv", "section_w1.2.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn pipeline_reads_simulated_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ncq(&["simulate", "--state", "squeezed:0.2,5.0", "--samples", "5000", "--seed", "3", "--out", out]);
    assert!(o.status.success());
    let data = dir.path().join("quadratures.csv");
    let o = ncq(&with_grid(&[
        "pipeline",
        "--data",
        data.to_str().unwrap(),
        "--width",
        "1.5",
        "--error-method",
        "bound",
        "--out",
        out,
    ]));
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = read_json(&dir.path().join("p_w1.5.json"));
    assert_eq!(meta["source"], "sampled");
    assert_eq!(meta["n_samples"], 5000);
}

#[test]
fn truncated_beta_grid_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&[
        "pipeline",
        "--state",
        "squeezed:0.2,5.0",
        "--filter",
        "gaussian-s",
        "--width",
        "0",
        "--beta-range",
        "2",
        "--beta-step",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("transform:"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        "state = squeezed:0.2,5.0\nwidth = 1.2\nbeta_range = 6\nbeta_step = 0.05\nalpha_range = 2\nalpha_step = 0.1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ncq(&["pipeline", "--config", cfg.to_str().unwrap(), "--width", "1.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("p_w1.5.csv").exists());
    assert!(!out.join("p_w1.2.csv").exists());
    let v = read_json(&out.join("verdict.json"));
    assert_eq!(v["provenance"]["config"]["beta-range"], 6.0);

    fs::write(&cfg, "widht = 1.2\n").unwrap();
    let o = ncq(&["pipeline", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn figures_write_four_and_two_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(ncq(&with_grid(&["fig1", "--out", out])).status.success());
    assert!(ncq(&with_grid(&["fig2", "--out", out])).status.success());
    let peak = |name: &str| {
        fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(peak("fig1_w1.5_squeezed.csv") > peak("fig1_w1.2_squeezed.csv"));
    for w in ["1.2", "1.5"] {
        assert!(dir.path().join(format!("fig1_w{w}_unsqueezed.csv")).exists());
        let text = fs::read_to_string(dir.path().join(format!("fig2_w{w}.csv"))).unwrap();
        assert!(text.starts_with("t,p,sigma\n"));
    }
}

#[test]
fn bochner_two_point_determinant() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&[
        "bochner",
        "--state",
        "squeezed:0.2,5.0",
        "--points",
        "0,0;1,0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("bochner.json"));
    let d = v["result"]["statistic"].as_f64().unwrap();
    assert!((d + 1.225_541).abs() < 1e-6, "{d}");
    assert_eq!(v["result"]["verdict"], "nonclassical");
}

#[test]
fn bochner_thermal_scan_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&with_grid(&["bochner", "--state", "thermal:1", "--out", dir.path().to_str().unwrap()]));
    assert!(o.status.success());
    let v = read_json(&dir.path().join("bochner.json"));
    assert_eq!(v["result"]["verdict"], "inconclusive");
}

#[test]
fn malformed_points_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&["bochner", "--state", "thermal:1", "--points", "0,0;1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--points"));
}

#[test]
fn filter_check_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = ncq(&["filter-check", "--width", "1,2", "--lemma-u", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("filter_check.json"));
    assert_eq!(v["conditions"]["a"], "pass");
    assert_eq!(v["lemma"]["all_hold"], true);
    let table = fs::read_to_string(dir.path().join("radial_table.csv")).unwrap();
    assert!(table.starts_with("r,omega,slope\n"));
    assert!(dir.path().join("radial_table.json").exists());
}

#[test]
fn unknown_filter_is_a_usage_error() {
    let o = ncq(&["filter-check", "--filter", "boxcar"]);
    assert_eq!(o.status.code(), Some(2));
}
