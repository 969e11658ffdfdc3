use hardy_henon::harness::config::{DataSpec, ExperimentConfig};
use hardy_henon::harness::{execute, presets, store};

fn json_without_time(cfg: &ExperimentConfig) -> String {
    let mut rec = execute(cfg).unwrap();
    rec.wall_time = 0.0;
    store::record_line(&rec).unwrap()
}

#[test]
fn local_lambda_small_completes_large_blows_up() {
    let rec = execute(&presets::local_lambda()).unwrap();
    assert!(rec.passed(), "{:#?}", rec.checks);
    assert_eq!(rec.checks.len(), 4);
}

#[test]
fn local_lambda_zero_data() {
    let mut cfg = presets::local_lambda();
    cfg.knobs.amplitudes = vec![0.0];
    let rec = execute(&cfg).unwrap();
    let traj = &rec.trajectories["A=0"];
    assert!(rec.cells[0].outcome.unwrap().completed());
    assert!(traj.iter().all(|r| r.lambda_norm == Some(0.0)));
}

#[test]
fn weakstar_slopes_exceed_rate() {
    let rec = execute(&presets::weakstar_init()).unwrap();
    assert!(rec.passed(), "{:#?} {:?}", rec.checks, rec.notes);
}

#[test]
fn weakstar_linear_flow_is_order_one() {
    let mut cfg = presets::weakstar_init();
    cfg.evolve.linear = true;
    let rec = execute(&cfg).unwrap();
    for k in ["slope_bump_1", "slope_bump_3", "slope_gaussian_2"] {
        let s = rec.metrics[k];
        assert!(s > 0.9 && s < 1.1, "{k} = {s}");
    }
}

#[test]
fn decay_zero_data_has_zero_norms() {
    let mut cfg = presets::decay();
    cfg.grid.points = 1024;
    cfg.grid.extent = 64.0;
    cfg.data = DataSpec::Zero;
    let rec = execute(&cfg).unwrap();
    assert!(rec.passed());
    assert!(rec.trajectories["u"].iter().all(|r| r.l_qc == Some(0.0) && r.sup == 0.0));
}

#[test]
fn decay_linear_gaussian_slope() {
    let mut cfg = presets::decay();
    cfg.spec.m = 1.0;
    cfg.spec.alpha = 0.0;
    cfg.spec.p = 5.0;
    cfg.grid.points = 4096;
    cfg.grid.extent = 256.0;
    cfg.evolve.linear = true;
    cfg.evolve.t_end = 400.0;
    cfg.evolve.dt = 1.0;
    cfg.evolve.record_dt = Some(10.0);
    cfg.evolve.tdelta_q = None;
    cfg.knobs.fit_window = Some([100.0, 400.0]);
    let rec = execute(&cfg).unwrap();
    let q_c = rec.metrics["q_c"];
    let want = -0.5 * (1.0 - 1.0 / q_c);
    let got = rec.metrics["lqc_slope"];
    assert!((got - want).abs() <= 0.05 * want.abs(), "{got} vs {want}");
}

#[test]
fn stability_identical_data_gives_zero_difference() {
    let mut cfg = presets::stability();
    cfg.grid.points = 1024;
    cfg.grid.extent = 64.0;
    cfg.evolve.t_end = 1.0;
    cfg.knobs.perturbation = None;
    let rec = execute(&cfg).unwrap();
    assert!(rec.passed(), "{:?}", rec.checks);
    assert!(rec.tables["difference"].rows.iter().all(|r| r[1] == 0.0));
}

#[test]
fn self_similar_zero_data_is_flagged() {
    let mut cfg = presets::self_similar();
    cfg.data = DataSpec::Homogeneous { eps0: 0.0, eps: 0.0, cell_mean: true };
    let rec = execute(&cfg).unwrap();
    assert!(rec.checks.is_empty());
    assert!(rec.notes.iter().any(|n| n.contains("degenerate")));
}

#[test]
fn fujita_boundary_cell_is_excluded() {
    let mut cfg = presets::fujita_scan();
    cfg.knobs.p_grid = vec![1.4];
    let rec = execute(&cfg).unwrap();
    assert!(rec.cells.is_empty());
    assert!(rec.notes.iter().any(|n| n.contains("excluded")));
}

#[test]
fn identical_configs_give_identical_records() {
    let mut cfg = presets::uniqueness_cross();
    cfg.grid.points = 256;
    assert_eq!(json_without_time(&cfg), json_without_time(&cfg));
    let mut q = presets::qualitative();
    q.grid.points = 512;
    q.grid.extent = 16.0;
    assert_eq!(json_without_time(&q), json_without_time(&q));
}

#[test]
fn smoothing_rejects_bad_exponents() {
    let mut cfg = presets::smoothing();
    cfg.knobs.p1 = Some(1.05);
    assert!(matches!(execute(&cfg), Err(hardy_henon::Error::Config { .. })));
}
