//! Built-in experiment configurations (also shipped under `configs/`).

use super::config::*;
use crate::evolve::{EvolveConfig, PicardConfig, Scheme};
use crate::params::{FKind, ProblemSpec};

fn spec(n: usize, m: f64, alpha: f64, p: f64, f_kind: FKind) -> ProblemSpec {
    ProblemSpec {
        n,
        m,
        alpha,
        p,
        f_kind,
        c_f: 1.0,
    }
}

fn base(kind: ExperimentKind, spec: ProblemSpec, points: usize, extent: f64, ev: EvolveConfig, data: DataSpec) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        kind,
        spec,
        grid: GridConfig { points, extent },
        evolve: ev,
        data,
        knobs: Knobs::default(),
    }
}

fn logspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    let (la, lb) = (a.log10(), b.log10());
    (0..k)
        .map(|i| {
            let v = 10f64.powf(la + (lb - la) * i as f64 / (k - 1) as f64);
            // trim representation noise so emitted configs stay readable
            (v * 1e12).round() / 1e12
        })
        .collect()
}

pub fn scaling_invariance() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.01, 1.0);
    ev.norms = false;
    let mut c = base(
        ExperimentKind::ScalingInvariance,
        spec(1, 0.25, 0.1, 3.0, FKind::Signed),
        2048,
        64.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.5, width: 1.0 },
    );
    c.knobs.sigma = Some(2.0);
    c
}

pub fn self_similar() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.02, 10.0);
    ev.norms = false;
    ev.record_dt = Some(0.5);
    let mut c = base(
        ExperimentKind::SelfSimilar,
        spec(1, 0.25, 0.1, 3.0, FKind::Signed),
        1 << 18,
        16384.0,
        ev,
        DataSpec::Homogeneous { eps0: 0.1, eps: 0.0, cell_mean: true },
    );
    c.knobs.times = (1..=10).map(|t| t as f64).collect();
    c.knobs.inner_fraction = Some(0.25);
    c
}

pub fn decay() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.01, 10.0);
    ev.record_dt = Some(0.25);
    ev.tdelta_q = Some(10.0);
    let mut c = base(
        ExperimentKind::Decay,
        spec(1, 0.25, 0.1, 3.0, FKind::Unsigned),
        1 << 14,
        1024.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.2, width: 1.0 },
    );
    c.knobs.drop_target = Some(0.1);
    c.knobs.fit_window = Some([5.0, 10.0]);
    c
}

pub fn stability() -> ExperimentConfig {
    let mut c = decay();
    c.kind = ExperimentKind::Stability;
    c.evolve.tdelta_q = None;
    c.knobs.fit_window = None;
    c.knobs.perturbation = Some(DataSpec::Gaussian { amplitude: 0.1, width: 0.5 });
    c
}

pub fn fujita_scan() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.02, 30.0);
    ev.record_dt = Some(1.0);
    let mut c = base(
        ExperimentKind::FujitaScan,
        spec(1, 0.25, 0.1, 1.5, FKind::Unsigned),
        1 << 16,
        4096.0,
        ev,
        DataSpec::DominatedGaussian { c0: 0.05 },
    );
    c.knobs.p_grid = vec![1.1, 1.2, 1.3, 1.5, 1.7, 2.0];
    c.knobs.blowup_data = Some(DataSpec::Gaussian { amplitude: 1.0, width: 1.0 });
    c
}

pub fn qualitative() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.01, 1.0);
    ev.record_dt = Some(0.1);
    ev.snap_records = true;
    ev.norms = false;
    ev.eps_weight = Some(0.5);
    let mut c = base(
        ExperimentKind::Qualitative,
        spec(1, 1.0, 0.1, 2.0, FKind::Unsigned),
        2048,
        32.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.5, width: 1.0 },
    );
    c.knobs.m_list = vec![0.5, 1.0];
    c
}

pub fn smoothing() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.01, 10.0);
    ev.norms = false;
    let mut c = base(
        ExperimentKind::Smoothing,
        spec(1, 0.25, 0.1, 3.0, FKind::Unsigned),
        1 << 20,
        8192.0,
        ev,
        DataSpec::Zero,
    );
    c.knobs.p1 = Some(3.0);
    c.knobs.p2 = Some(4.0);
    c.knobs.family = vec![
        DataSpec::Gaussian { amplitude: 1.0, width: 5.0 },
        DataSpec::Indicator { amplitude: 1.0, radius: 5.0 },
        DataSpec::TruncatedPower { amplitude: 1.0, exponent: 1.0 / 3.0, radius: 2000.0 },
    ];
    c.knobs.times = logspace(1e-2, 10.0, 25);
    c.knobs.fit_window = Some([1.0, 10.0]);
    c
}

pub fn local_lambda() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(0.01, 1.0);
    ev.record_dt = Some(0.05);
    let mut c = base(
        ExperimentKind::LocalLambda,
        spec(1, 1.0, -1.0, 2.0, FKind::Unsigned),
        1024,
        20.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.01, width: 1.0 },
    );
    c.knobs.amplitudes = vec![0.01, 50.0];
    c
}

pub fn weakstar_init() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(5e-4, 0.1);
    ev.norms = false;
    let mut c = base(
        ExperimentKind::WeakstarInit,
        spec(1, 0.25, 0.1, 3.0, FKind::Signed),
        4096,
        64.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.5, width: 1.0 },
    );
    c.knobs.times = logspace(1e-3, 1e-1, 9);
    c.knobs.fit_window = Some([1e-3, 1e-1]);
    c
}

pub fn uniqueness_cross() -> ExperimentConfig {
    let mut ev = EvolveConfig::new(1.0 / 256.0, 1.0);
    ev.norms = false;
    ev.scheme = Scheme::Etd2rk;
    ev.picard = PicardConfig { iters: 8, slices: 64 };
    let mut c = base(
        ExperimentKind::UniquenessCross,
        spec(1, 0.25, 0.25, 2.0, FKind::Unsigned),
        1024,
        64.0,
        ev,
        DataSpec::Gaussian { amplitude: 0.01, width: 1.0 },
    );
    c.knobs.slices = vec![16, 32, 64];
    c.knobs.reference_dt = Some(1.0 / 1024.0);
    c
}

/// Every preset, one per experiment kind.
pub fn all() -> Vec<ExperimentConfig> {
    vec![
        scaling_invariance(),
        self_similar(),
        decay(),
        fujita_scan(),
        stability(),
        qualitative(),
        smoothing(),
        local_lambda(),
        weakstar_init(),
        uniqueness_cross(),
    ]
}
