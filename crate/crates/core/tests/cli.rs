use std::process::Command;

use hardy_henon::harness::{parse_config, presets, read_store};
use hardy_henon::spectral::write_snapshot;
use hardy_henon::{Field, Grid};

fn hh() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hh"));
    c.env("HH_THREADS", "2");
    c
}

fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_match_presets() {
    for cfg in presets::all() {
        let name = serde_json::to_value(cfg.kind).unwrap();
        let path = configs_dir().join(format!("{}.toml", name.as_str().unwrap()));
        assert_eq!(parse_config(&path).unwrap(), cfg, "{}", path.display());
    }
}

#[test]
fn run_writes_reports_and_store() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::uniqueness_cross();
    cfg.grid.points = 256;
    let path = dir.path().join("u.toml");
    std::fs::write(&path, cfg.emit().unwrap()).unwrap();
    let out = dir.path().join("out");
    let st = hh().args(["run", "--config"]).arg(&path).arg("--out").arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stdout));
    assert!(out.join("refinement.csv").exists());
    assert!(out.join("picard_distances.svg").exists());
    assert_eq!(read_store(&out.join("runs.store")).unwrap().len(), 1);
}

#[test]
fn malformed_config_exits_2_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = presets::decay().emit().unwrap().replace("growth_cap", "growth_cpa");
    std::fs::write(&path, text).unwrap();
    let st = hh().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("growth_cpa"));
    let st = hh().args(["scan", "--config"]).arg(configs_dir().join("decay.toml")).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn failing_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::local_lambda();
    // small data cannot blow up, so the large-amplitude expectation fails
    cfg.knobs.amplitudes = vec![0.001, 0.01];
    let path = dir.path().join("l.toml");
    std::fs::write(&path, cfg.emit().unwrap()).unwrap();
    let st = hh().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
}

#[test]
fn kernel_csv_and_fit() {
    let st = hh().args(["kernel", "--m", "1", "--n", "1", "--rmax", "8", "--points", "81"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let text = String::from_utf8(st.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,g"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((first[1] - (4.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
    assert!(text.contains("# fit stretched exponential: L = 2.0"));
}

#[test]
fn norms_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 8, 2.0).unwrap();
    let f = Field::from_vec(g, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
    let base = dir.path().join("ind");
    write_snapshot(&base, &f, 0.0).unwrap();
    let st = hh().args(["norms", "--p", "2", "--q", "inf", "--field"]).arg(base.with_extension("bin")).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let text = String::from_utf8(st.stdout).unwrap();
    let line = text.lines().nth(1).unwrap();
    let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
    // indicator of a set of measure 2: ||1_E||_{2,inf} = 2^{1/2}
    assert!((v - 2f64.sqrt()).abs() < 1e-12, "{line}");
    assert!(line.ends_with(&format!(",2,inf,{v}")));
}

#[test]
fn verify_lorentz_suite() {
    let st = hh().args(["verify", "--suite", "lorentz"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&st.stdout).contains("criterion  4 PASS"));
}
