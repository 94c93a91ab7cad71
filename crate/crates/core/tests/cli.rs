use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GOLDEN: &str = include_str!("../data/paper_sec5.meas");

fn hsps(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsps"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("HSPS_OUT_DIR")
        .output()
        .expect("spawn hsps")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], key: &str, col: usize) -> f64 {
    table
        .iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no row {key}"))[col]
        .parse()
        .unwrap()
}

#[test]
fn characterize_golden_file() {
    let dir = TempDir::new().unwrap();
    let meas = write(dir.path(), "in.meas", GOLDEN);
    let o = hsps(
        dir.path(),
        &["characterize", "--config", meas.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("characterization.txt")).unwrap();
    assert!(text.contains("[coupling]") && text.contains("[distribution]"));
    assert!(dir.path().join("characterization.csv").exists());
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = write(dir.path(), "a.meas", &GOLDEN.replace("r_i = 130", "# r_i"));
    let o = hsps(
        dir.path(),
        &["characterize", "--config", missing.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r_i"), "{}", stderr(&o));

    let bad = write(
        dir.path(),
        "b.meas",
        &GOLDEN.replace("r_c = 7200", "r_c = 9e4"),
    );
    let o = hsps(
        dir.path(),
        &["characterize", "--config", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = hsps(dir.path(), &["sweep", "--grid", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsps(dir.path(), &["sweep", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsps(
        dir.path(),
        &["characterize", "--config", "/nonexistent.meas"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_sim_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "bad.sim", "[coupling]\ngamma_c = 0.9\n");
    for cmd in ["simulate", "validate"] {
        let o = hsps(dir.path(), &[cmd, "--config", sim.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}: {}", stderr(&o));
        assert!(stderr(&o).contains("gamma_c"), "{}", stderr(&o));
    }
}

#[test]
fn inference_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    // multimode rate below the dark rate leaves no signal
    let meas = write(
        dir.path(),
        "c.meas",
        &GOLDEN
            .replace("r_p = 218e3", "r_p = 88e3")
            .replace("r_s_dark = 90", "r_s_dark = 87990"),
    );
    let o = hsps(
        dir.path(),
        &["characterize", "--config", meas.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn sweep_grid_edges() {
    let dir = TempDir::new().unwrap();
    let o = hsps(dir.path(), &["sweep", "--grid", "0.1:0.9:0", "--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = rows(&dir.path().join("g2_curves.csv"));
    assert_eq!(t.len(), 1);
    assert_eq!(t[0][0], "b0");

    let o = hsps(dir.path(), &["sweep", "--grid", "0.98:1:3", "--quiet"]);
    assert!(o.status.success());
    let t = rows(&dir.path().join("g2_curves.csv"));
    assert_eq!(t.len(), 4);
    assert_eq!(t[2][0], "0.99");
    assert!(t[2][2].parse::<f64>().unwrap() > 1.0);
    assert_eq!(t[3][2], "diverged");
}

#[test]
fn crossings_flag_missing_roots() {
    let dir = TempDir::new().unwrap();
    let o = hsps(
        dir.path(),
        &["crossings", "--p-cor", "1,1e-6,1e-12", "--quiet"],
    );
    assert!(o.status.success());
    let t = rows(&dir.path().join("crossings.csv"));
    assert_eq!(t[1][2], "ok");
    assert!((t[1][1].parse::<f64>().unwrap() - 0.555).abs() < 0.01);
    assert_eq!(t[2][2], "ok");
    assert!(t[2][1].parse::<f64>().unwrap() > 0.0);
    assert_eq!(t[3][1..], ["", "no-crossing"]);
}

#[test]
fn simulate_reference_setup() {
    let dir = TempDir::new().unwrap();
    let tags = dir.path().join("tags.bin");
    let o = hsps(
        dir.path(),
        &[
            "simulate",
            "--config",
            concat!(env!("CARGO_MANIFEST_DIR"), "/data/reference.sim"),
            "--duration",
            "0.5",
            "--measure",
            "--time-tags",
            tags.to_str().unwrap(),
            "--quiet",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let h = rows(&dir.path().join("sim_histogram.csv"));
    for (n, reference) in [("0", 0.514), ("1", 0.483)] {
        let p = column(&h, n, 2);
        let se = column(&h, n, 3);
        assert!((p - reference).abs() < 3.0 * se, "P({n}) = {p} +- {se}");
    }
    let r = rows(&dir.path().join("sim_rates.csv"));
    let written = fs::metadata(&tags).unwrap().len();
    assert!(written > 0 && written % 9 == 0);
    let clicks = column(&r, "signal_click_rate", 1) * 0.5;
    assert!(written / 9 > clicks as u64);

    let meas = fs::read_to_string(dir.path().join("simulated.meas")).unwrap();
    let back = hsps::io::MeasurementFile::parse(&meas).unwrap();
    assert_eq!(back.integration_time, 0.5);
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hsps"))
        .args(["crossings", "--quiet"])
        .env("HSPS_OUT_DIR", dir.path().join("nested"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("nested/crossings.csv").exists());
}

#[test]
fn small_validation_passes() {
    let dir = TempDir::new().unwrap();
    let o = hsps(
        dir.path(),
        &[
            "validate",
            "--gates",
            "20000",
            "--round-trip-seconds",
            "2",
            "--seed",
            "5",
            "--quiet",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = rows(&dir.path().join("validation.csv"));
    assert!(t.len() > 60);
    assert!(t[1..].iter().all(|r| r[5] == "yes"));
}

#[test]
fn delay_scan_finds_the_twin() {
    let dir = TempDir::new().unwrap();
    let sim = write(dir.path(), "short.sim", "[run]\nduration = 0.1 s\n");
    let o = hsps(
        dir.path(),
        &[
            "delay-scan",
            "--config",
            sim.to_str().unwrap(),
            "--grid",
            "80:120:5",
            "--quiet",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = rows(&dir.path().join("delay_scan.csv"));
    let rate = |d: &str| column(&t, d, 2);
    assert!(rate("100") > 20.0 * rate("80").max(rate("120")).max(1.0));
}
