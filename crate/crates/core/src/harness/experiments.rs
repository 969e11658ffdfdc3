//! Experiment drivers. Each run produces a self-describing [`RunRecord`].

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataSpec, ExperimentConfig, ExperimentKind};
use super::in_pool;
use crate::error::{Error, Result};
use crate::evolve::{integrate, picard_solve, EvolveConfig, NormRecord, RunOutcome, Scheme, Snapshot, Trajectory};
use crate::lorentz::{self, LorentzExponents};
use crate::params::{regime_check, FKind, ProblemSpec, RegimeReport};
use crate::spectral::{singular_weight, Field, Grid, Spectral};
use crate::weakform::psi;

pub const RECORD_FORMAT: &str = "hh-run-v1";

/// A pass/fail assertion with the measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

/// Status of one integration inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub param: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RunOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Named columns of derived values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(cols: &[&str]) -> Table {
        Table {
            columns: cols.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Everything an experiment produced. Non-finite numbers serialise as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format: String,
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub regime: RegimeReport,
    pub cells: Vec<Cell>,
    pub trajectories: BTreeMap<String, Vec<NormRecord>>,
    pub tables: BTreeMap<String, Table>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Seconds; the only field that varies between identical runs.
    pub wall_time: f64,
}

impl RunRecord {
    fn new(cfg: &ExperimentConfig) -> RunRecord {
        RunRecord {
            format: RECORD_FORMAT.into(),
            kind: cfg.kind,
            config: cfg.clone(),
            regime: regime_check(&cfg.spec, None, cfg.evolve.tdelta_q),
            cells: Vec::new(),
            trajectories: BTreeMap::new(),
            tables: BTreeMap::new(),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn metric(&mut self, k: &str, v: f64) {
        self.metrics.insert(k.into(), v);
    }

    fn check_le(&mut self, name: &str, value: f64, threshold: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
        });
    }

    fn check_lt(&mut self, name: &str, value: f64, threshold: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value < threshold,
            value,
            threshold,
        });
    }

    fn check_ge(&mut self, name: &str, value: f64, threshold: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
        });
    }

    fn check_flag(&mut self, name: &str, ok: bool) {
        self.checks.push(Check {
            name: name.into(),
            passed: ok,
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
        });
    }

    fn cell(&mut self, label: impl Into<String>, param: f64, r: std::result::Result<RunOutcome, String>) {
        let (outcome, error) = match r {
            Ok(o) => (Some(o), None),
            Err(e) => (None, Some(e)),
        };
        self.cells.push(Cell {
            label: label.into(),
            param,
            outcome,
            error,
        });
    }
}

/// Run one experiment on a pool sized by `HH_THREADS`.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rec = RunRecord::new(cfg);
    in_pool(|| match cfg.kind {
        ExperimentKind::ScalingInvariance => exp_scaling(cfg, &mut rec),
        ExperimentKind::SelfSimilar => exp_self_similar(cfg, &mut rec),
        ExperimentKind::Decay => exp_decay(cfg, &mut rec),
        ExperimentKind::FujitaScan => exp_fujita_scan(cfg, &mut rec),
        ExperimentKind::Stability => exp_stability(cfg, &mut rec),
        ExperimentKind::Qualitative => exp_qualitative(cfg, &mut rec),
        ExperimentKind::Smoothing => exp_smoothing(cfg, &mut rec),
        ExperimentKind::LocalLambda => exp_local_lambda(cfg, &mut rec),
        ExperimentKind::WeakstarInit => exp_weakstar_init(cfg, &mut rec),
        ExperimentKind::UniquenessCross => exp_uniqueness_cross(cfg, &mut rec),
    })?;
    rec.wall_time = start.elapsed().as_secs_f64();
    Ok(rec)
}

fn with_m(spec: &ProblemSpec, m: f64) -> ProblemSpec {
    ProblemSpec { m, ..*spec }
}

fn with_p(spec: &ProblemSpec, p: f64) -> ProblemSpec {
    ProblemSpec { p, ..*spec }
}

fn push_time(ev: &mut EvolveConfig, t: f64) {
    if !ev.snap_times.iter().any(|&s| (s - t).abs() <= 1e-12 * t.max(1.0)) {
        ev.snap_times.push(t);
    }
}

fn snapshot_at(traj: &Trajectory, t: f64) -> Option<&Field> {
    traj.snapshots
        .iter()
        .find(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0))
        .map(|s| &s.field)
}

/// Least-squares slope of `ln y` against `ln t` over `t ∈ [lo, hi]`.
pub fn loglog_slope(ts: &[f64], ys: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12) && **t > 0.0 && y.abs() > 0.0)
        .map(|(t, y)| (t.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Four-point Lagrange interpolation of a periodic 1-D field.
pub fn cubic_interp(f: &Field, x: f64) -> f64 {
    let g = f.grid;
    let n = g.points as i64;
    let s = (x + g.extent) / g.h();
    let i = s.floor();
    let u = s - i;
    let i = i as i64;
    let at = |k: i64| f.data[k.rem_euclid(n) as usize];
    let (a, b, c, d) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    let w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    let w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    let w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    w0 * a + w1 * b + w2 * c + w3 * d
}

fn exp_scaling(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let sigma = cfg
        .knobs
        .sigma
        .ok_or_else(|| Error::config("knobs.sigma", "scaling_invariance needs sigma"))?;
    if !(sigma > 0.0) {
        return Err(Error::config("knobs.sigma", "must be positive"));
    }
    let spec = cfg.spec;
    let gamma = spec.exponents()?.gamma;
    let ga = cfg.grid()?;
    let gb = Grid::new(spec.n, ga.points, ga.extent / sigma)?;
    let ua = cfg.data.sample(ga, &spec)?;
    let ub = cfg.data.sample_scaled(gb, &spec, sigma)?;
    let ts = sigma.powf(2.0 * spec.m);
    let amp = sigma.powf(gamma);
    let mut ea = cfg.evolve.clone();
    let t_end = ea.t_end;
    push_time(&mut ea, t_end);
    let mut eb = ea.clone();
    eb.dt /= ts;
    eb.t_end /= ts;
    eb.dt_min /= ts;
    eb.u_max *= amp;
    eb.record_dt = eb.record_dt.map(|r| r / ts);
    eb.snap_times = eb.snap_times.iter().map(|t| t / ts).collect();
    eb.eps_weight = eb.eps_weight.map(|e| e / sigma);
    let (ra, rb) = rayon::join(|| integrate(&ua, &spec, &ea), || integrate(&ub, &spec, &eb));
    let (ta, oa) = ra?;
    let (tb, ob) = rb?;
    rec.cell("base", 1.0, Ok(oa));
    rec.cell("rescaled", sigma, Ok(ob));
    rec.trajectories.insert("base".into(), ta.records.clone());
    rec.trajectories.insert("rescaled".into(), tb.records.clone());
    let mut table = Table::new(&["t", "rel_err"]);
    let mut worst: f64 = 0.0;
    for (sa, sb) in ta.snapshots.iter().zip(&tb.snapshots) {
        let scale = amp * sa.field.sup();
        let err = sa
            .field
            .data
            .iter()
            .zip(&sb.field.data)
            .fold(0.0f64, |m, (a, b)| m.max((b - amp * a).abs()));
        let rel = if scale > 0.0 { err / scale } else { err };
        worst = worst.max(rel);
        table.rows.push(vec![sa.t, rel]);
    }
    rec.tables.insert("scaling".into(), table);
    rec.metric("sigma", sigma);
    rec.metric("max_rel_err", worst);
    if !(oa.completed() && ob.completed()) {
        rec.notes.push("a run did not complete; compared up to the last common snapshot".into());
    }
    rec.check_flag("matching_status", oa.status == ob.status || (oa.blew_up() && ob.blew_up()));
    rec.check_le("scaling_commutation", worst, 1e-6);
    Ok(())
}

/// `ρ(t) = sup_{|x|<=R} |u(x,t) - t^{-γ/2m} u(t^{-1/2m}x, 1)| / ||u(t)||_∞` for `t >= 1`.
pub fn self_similar_residual(snaps: &[Snapshot], gamma: f64, m: f64, radius: f64) -> Result<Vec<(f64, f64)>> {
    let one = snaps
        .iter()
        .find(|s| (s.t - 1.0).abs() <= 1e-9)
        .ok_or_else(|| Error::Insufficient("no snapshot at t = 1".into()))?;
    let g = one.field.grid;
    if g.n != 1 {
        return Err(Error::InvalidParameter("rescaling residual is implemented for n = 1".into()));
    }
    let mut out = Vec::new();
    for s in snaps.iter().filter(|s| s.t >= 1.0 - 1e-9) {
        let sup = s.field.sup();
        if !(sup > 0.0) {
            return Err(Error::Degenerate(format!("u vanishes at t = {}", s.t)));
        }
        let a = s.t.powf(-gamma / (2.0 * m));
        let b = s.t.powf(-1.0 / (2.0 * m));
        let mut worst: f64 = 0.0;
        for i in 0..g.points {
            let x = g.coord(i);
            if x.abs() > radius {
                continue;
            }
            let d = s.field.data[i] - a * cubic_interp(&one.field, b * x);
            worst = worst.max(d.abs());
        }
        out.push((s.t, worst / sup));
    }
    Ok(out)
}

fn exp_self_similar(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let DataSpec::Homogeneous { eps0, .. } = cfg.data else {
        return Err(Error::config("data.kind", "self_similar needs homogeneous data"));
    };
    let spec = cfg.spec;
    if spec.n != 1 {
        return Err(Error::config("spec.n", "self_similar comparisons are implemented for n = 1"));
    }
    if !rec.regime.global_b1.holds {
        rec.notes.push(format!("global_b1 does not hold ({})", rec.regime.global_b1.reason));
    }
    let times = &cfg.knobs.times;
    if !times.iter().any(|&t| (t - 1.0).abs() <= 1e-12) || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::config("knobs.times", "need positive times including t = 1"));
    }
    let frac = cfg.knobs.inner_fraction.unwrap_or(0.25);
    let radius = frac * cfg.grid.extent;
    rec.metric("inner_radius", radius);
    rec.metric("t_first", times.iter().cloned().fold(f64::INFINITY, f64::min));
    rec.metric("t_last", times.iter().cloned().fold(0.0, f64::max));
    if eps0 == 0.0 {
        rec.notes.push("degenerate input: zero data, residual undefined".into());
        return Ok(());
    }
    let ex = spec.exponents()?;
    let u0 = cfg.data.sample(cfg.grid()?, &spec)?;
    let mut ev = cfg.evolve.clone();
    for &t in times {
        push_time(&mut ev, t);
    }
    let (traj, out) = integrate(&u0, &spec, &ev)?;
    rec.cell("u", eps0, Ok(out));
    rec.trajectories.insert("u".into(), traj.records.clone());
    rec.check_flag("completed", out.completed());
    if !out.completed() {
        return Ok(());
    }
    let rho = self_similar_residual(&traj.snapshots, ex.gamma, spec.m, radius)?;
    let mut table = Table::new(&["t", "rho"]);
    let mut worst: f64 = 0.0;
    for (t, r) in rho {
        worst = worst.max(r);
        table.rows.push(vec![t, r]);
    }
    rec.tables.insert("rho".into(), table);
    rec.metric("max_rho", worst);
    rec.check_lt("rescaling_residual", worst, 0.05);
    Ok(())
}

fn exp_decay(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    let ex = spec.exponents()?;
    let target = cfg.knobs.drop_target.unwrap_or(0.1);
    let u0 = cfg.data.sample(cfg.grid()?, &spec)?;
    let mut ev = cfg.evolve.clone();
    ev.norms = true;
    let (traj, out) = integrate(&u0, &spec, &ev)?;
    rec.cell("u", 0.0, Ok(out));
    let l: Vec<f64> = traj.records.iter().map(|r| r.l_qc.unwrap_or(0.0)).collect();
    let ts = traj.times();
    rec.trajectories.insert("u".into(), traj.records.clone());
    rec.metric("q_c", ex.q_c);
    if let Some(q) = ev.tdelta_q {
        rec.metric("delta", ex.delta(q));
    }
    rec.check_flag("completed", out.completed());
    let l0 = l[0];
    if l0 == 0.0 {
        rec.notes.push("zero data".into());
        rec.check_flag("norms_vanish", l.iter().all(|&v| v == 0.0));
        return Ok(());
    }
    let lf = *l.last().unwrap();
    rec.metric("lqc_initial", l0);
    rec.metric("lqc_final", lf);
    let rise = l.windows(2).map(|w| (w[1] - w[0]) / l0).fold(f64::NEG_INFINITY, f64::max);
    rec.metric("max_relative_increase", rise);
    rec.check_le("monotone_trend", rise, 1e-9);
    rec.check_lt("final_over_initial", lf / l0, target);
    let predicted = -(spec.n as f64 / (2.0 * spec.m)) * (1.0 - 1.0 / ex.q_c);
    rec.metric("heat_slope_prediction", predicted);
    if let Some([a, b]) = cfg.knobs.fit_window {
        if let Some(s) = loglog_slope(&ts, &l, a, b) {
            rec.metric("lqc_slope", s);
        }
    }
    Ok(())
}

fn sup_decaying(records: &[NormRecord]) -> bool {
    let sup: Vec<f64> = records.iter().map(|r| r.sup).collect();
    let half = sup.len() / 2;
    sup.len() >= 2
        && sup[sup.len() - 1] < sup[0]
        && sup[half..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn exp_fujita_scan(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    if spec.f_kind != FKind::Unsigned {
        return Err(Error::config("spec.f_kind", "fujita_scan needs unsigned F"));
    }
    if cfg.knobs.p_grid.is_empty() {
        return Err(Error::config("knobs.p_grid", "empty p-grid"));
    }
    let p_f = 1.0 + (2.0 * spec.m - spec.alpha) / spec.n as f64;
    rec.metric("p_f", p_f);
    let grid = cfg.grid()?;
    let mut ps = Vec::new();
    for &p in &cfg.knobs.p_grid {
        if p == p_f {
            rec.notes.push(format!("p = {p} equals p_F and is excluded"));
        } else {
            ps.push(p);
        }
    }
    let below = cfg.knobs.blowup_data.as_ref().unwrap_or(&cfg.data);
    let results: Vec<(f64, Result<(Trajectory, RunOutcome)>)> = ps
        .par_iter()
        .map(|&p| {
            let sp = with_p(&spec, p);
            let r = sp.validate().and_then(|_| {
                let data = if p < p_f { below } else { &cfg.data };
                let u0 = data.sample(grid, &sp)?;
                integrate(&u0, &sp, &cfg.evolve)
            });
            (p, r)
        })
        .collect();
    let mut blow = Vec::new();
    let mut survive = Vec::new();
    let (mut n_below, mut ok_below, mut n_above, mut ok_above) = (0, 0, 0, 0);
    for (p, r) in results {
        let label = format!("p={p}");
        match r {
            Ok((traj, out)) => {
                if out.blew_up() {
                    blow.push(p);
                } else if out.completed() {
                    survive.push(p);
                }
                if p < p_f {
                    n_below += 1;
                    ok_below += out.blew_up() as usize;
                } else {
                    n_above += 1;
                    let ok = out.completed() && sup_decaying(&traj.records);
                    ok_above += ok as usize;
                    if out.blew_up() {
                        rec.notes.push(format!(
                            "p = {p} blew up; data not small, outside every global statement"
                        ));
                    }
                }
                rec.trajectories.insert(label.clone(), traj.records);
                rec.cell(label, p, Ok(out));
            }
            Err(e) => {
                if p < p_f {
                    n_below += 1;
                } else {
                    n_above += 1;
                }
                rec.cell(label, p, Err(e.to_string()));
            }
        }
    }
    if let Some(&pb) = blow.iter().max_by(|a, b| a.total_cmp(b)) {
        if let Some(&ps) = survive.iter().filter(|&&q| q > pb).min_by(|a, b| a.total_cmp(b)) {
            let p_hat = 0.5 * (pb + ps);
            rec.metric("p_hat", p_hat);
            rec.metric("p_hat_minus_p_f", p_hat - p_f);
        }
    }
    rec.check_ge("below_p_f_blow_up", ok_below as f64, n_below as f64);
    rec.check_ge("above_p_f_complete_decaying", ok_above as f64, n_above as f64);
    Ok(())
}

fn exp_stability(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    let ex = spec.exponents()?;
    if cfg.evolve.record_dt.is_none() {
        return Err(Error::config("evolve.record_dt", "stability compares snapshots at record times"));
    }
    let target = cfg.knobs.drop_target.unwrap_or(0.1);
    let grid = cfg.grid()?;
    let u0 = cfg.data.sample(grid, &spec)?;
    let v0 = match &cfg.knobs.perturbation {
        Some(d) => {
            let w = d.sample(grid, &spec)?;
            Field::from_vec(grid, u0.data.iter().zip(&w.data).map(|(a, b)| a + b).collect())?
        }
        None => {
            rec.notes.push("no perturbation: v_0 = u_0".into());
            u0.clone()
        }
    };
    let mut ev = cfg.evolve.clone();
    ev.snap_records = true;
    let (ru, rv) = rayon::join(|| integrate(&u0, &spec, &ev), || integrate(&v0, &spec, &ev));
    let (tu, ou) = ru?;
    let (tv, ov) = rv?;
    rec.cell("u", 0.0, Ok(ou));
    rec.cell("v", 1.0, Ok(ov));
    rec.trajectories.insert("u".into(), tu.records.clone());
    rec.trajectories.insert("v".into(), tv.records.clone());
    rec.check_flag("completed", ou.completed() && ov.completed());
    let e = LorentzExponents { p: ex.q_c, q: f64::INFINITY };
    let mut table = Table::new(&["t", "weak_qc_difference"]);
    for (a, b) in tu.snapshots.iter().zip(&tv.snapshots) {
        let d = Field::from_vec(grid, a.field.data.iter().zip(&b.field.data).map(|(x, y)| x - y).collect())?;
        let r = lorentz::rearrange(&d);
        let v = if r.values.is_empty() { 0.0 } else { r.lorentz_norm(e)? };
        table.rows.push(vec![a.t, v]);
    }
    let diffs = table.column("weak_qc_difference").unwrap_or_default();
    rec.tables.insert("difference".into(), table);
    let Some(&d0) = diffs.first() else {
        return Err(Error::Insufficient("no snapshots recorded".into()));
    };
    if d0 == 0.0 {
        rec.check_flag("difference_vanishes", diffs.iter().all(|&v| v == 0.0));
        return Ok(());
    }
    let df = *diffs.last().unwrap();
    rec.metric("difference_initial", d0);
    rec.metric("difference_final", df);
    rec.check_lt("final_over_initial", df / d0, target);
    Ok(())
}

fn exp_qualitative(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    let grid = cfg.grid()?;
    let mut ev = cfg.evolve.clone();
    ev.snap_records = true;
    let ms = if cfg.knobs.m_list.is_empty() { vec![spec.m] } else { cfg.knobs.m_list.clone() };
    let runs: Vec<(f64, Result<(Trajectory, RunOutcome)>)> = ms
        .par_iter()
        .map(|&m| {
            let sp = with_m(&spec, m);
            let r = sp.validate().and_then(|_| {
                let u0 = cfg.data.sample(grid, &sp)?;
                integrate(&u0, &sp, &ev)
            });
            (m, r)
        })
        .collect();
    let mut table = Table::new(&["m", "min_over_sup", "monotone_violation"]);
    for (m, r) in runs {
        let (traj, out) = r?;
        let sup0 = traj.snapshots[0].field.sup();
        let mut low = f64::INFINITY;
        let mut viol = f64::NEG_INFINITY;
        for s in &traj.snapshots {
            low = low.min(s.field.min() / sup0);
            if grid.n == 1 {
                for i in grid.origin()..grid.points - 1 {
                    viol = viol.max((s.field.data[i + 1] - s.field.data[i]) / sup0);
                }
            }
        }
        table.rows.push(vec![m, low, viol]);
        rec.trajectories.insert(format!("m={m}"), traj.records);
        rec.cell(format!("m={m}"), m, Ok(out));
        if m <= 1.0 {
            rec.check_ge(&format!("positivity_m={m}"), low, -1e-10);
            if grid.n == 1 {
                rec.check_le(&format!("monotone_m={m}"), viol, 1e-8);
            }
        } else {
            rec.notes.push(format!("m = {m} > 1: positivity is not expected"));
        }
    }
    rec.tables.insert("positivity".into(), table);

    // radial symmetry on a small square grid
    let g2 = Grid::new(2, 64, 8.0)?;
    let mut sym = Table::new(&["m", "asymmetry"]);
    let mut ev2 = EvolveConfig::new(0.01, 0.2);
    ev2.eps_weight = cfg.evolve.eps_weight;
    ev2.norms = false;
    ev2.snap_times = vec![0.2];
    for m in [0.25, 0.5, 1.0, 2.0] {
        let sp = ProblemSpec { n: 2, m, ..spec };
        let u0 = cfg.data.sample(g2, &sp)?;
        let (traj, _) = integrate(&u0, &sp, &ev2)?;
        let u = &traj.snapshots.last().ok_or_else(|| Error::Insufficient("no snapshot".into()))?.field;
        let a = asymmetry(u) / u.sup().max(f64::MIN_POSITIVE);
        sym.rows.push(vec![m, a]);
        rec.check_le(&format!("symmetry_m={m}"), a, 1e-12);
    }
    rec.tables.insert("symmetry".into(), sym);

    // sign change of the m = 2 linear flow
    if grid.n == 1 {
        let sp = Spectral::new(grid);
        let bump = Field::radial(grid, |r| psi(r / 2.0));
        let u = sp.semigroup(&bump, 1.0, 2.0)?;
        let ratio = u.min() / bump.sup();
        rec.metric("m2_min_over_sup", ratio);
        rec.check_lt("m2_sign_change", ratio, -1e-6);
    }
    Ok(())
}

/// Largest deviation under the axis reflections and the diagonal swap of a 2-D field.
pub fn asymmetry(u: &Field) -> f64 {
    let g = u.grid;
    let n = g.points;
    let refl = |i: usize| (n - i) % n;
    let mut worst: f64 = 0.0;
    if g.n == 1 {
        for i in 0..n {
            worst = worst.max((u.data[i] - u.data[refl(i)]).abs());
        }
        return worst;
    }
    for i in 0..n {
        for j in 0..n {
            let v = u.data[g.ravel(&[i, j])];
            for w in [
                u.data[g.ravel(&[j, i])],
                u.data[g.ravel(&[refl(i), j])],
                u.data[g.ravel(&[i, refl(j)])],
            ] {
                worst = worst.max((v - w).abs());
            }
        }
    }
    worst
}

fn exp_smoothing(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    let (n, a, m) = (spec.n as f64, spec.alpha, spec.m);
    let p1 = cfg.knobs.p1.ok_or_else(|| Error::config("knobs.p1", "smoothing needs p1"))?;
    let p2 = cfg.knobs.p2.ok_or_else(|| Error::config("knobs.p2", "smoothing needs p2"))?;
    if !(n - a > 0.0 && p1 > n / (n - a)) {
        return Err(Error::config("knobs.p1", format!("need p1 > n/(n-alpha) = {}", n / (n - a))));
    }
    if !(p2 > n * p1 / (n + a * p1)) {
        return Err(Error::config("knobs.p2", format!("need p2 > n p1/(n + alpha p1) = {}", n * p1 / (n + a * p1))));
    }
    if cfg.knobs.family.is_empty() || cfg.knobs.times.is_empty() {
        return Err(Error::config("knobs.family", "need a test family and evaluation times"));
    }
    let theta = (n / (2.0 * m)) * (1.0 / p1 - 1.0 / p2) + a / (2.0 * m);
    rec.metric("theta", theta);
    let grid = cfg.grid()?;
    let w = singular_weight(grid, a, cfg.evolve.eps_weight.unwrap_or(grid.h() / 2.0))?;
    let times = cfg.knobs.times.clone();
    let rows: Vec<Result<(String, f64, Vec<f64>)>> = cfg
        .knobs
        .family
        .par_iter()
        .map(|d| {
            let f = d.sample(grid, &spec)?;
            let weak = lorentz::rearrange(&f).weak_quasinorm(p1);
            let wf = Field::from_vec(grid, f.data.iter().zip(&w.data).map(|(x, y)| x * y).collect())?;
            let sp = Spectral::new(grid);
            let norms = times
                .iter()
                .map(|&t| Ok(lorentz::lebesgue_norm(&sp.semigroup(&wf, t, m)?, p2)))
                .collect::<Result<Vec<f64>>>()?;
            Ok((family_label(d), weak, norms))
        })
        .collect();
    let mut table = Table::new(&["t"]);
    let mut cols = vec![times.clone()];
    for r in rows {
        let (label, weak, norms) = r?;
        if !(weak > 0.0) {
            rec.notes.push(format!("{label}: zero function skipped"));
            continue;
        }
        let ratio: Vec<f64> = times.iter().zip(&norms).map(|(t, v)| t.powf(theta) * v / weak).collect();
        let hi = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
        rec.metric(&format!("span_{label}"), hi / lo);
        rec.check_lt(&format!("bounded_{label}"), hi / lo, 10.0);
        if label == "truncated_power" {
            if let Some([t0, t1]) = cfg.knobs.fit_window {
                let s = loglog_slope(&times, &norms, t0, t1)
                    .ok_or_else(|| Error::Insufficient("slope window holds fewer than two times".into()))?;
                rec.metric("unweighted_slope", s);
                rec.check_le("unweighted_slope", (s + theta).abs() / theta, 0.1);
            }
        }
        table.columns.push(format!("ratio_{label}"));
        table.columns.push(format!("norm_{label}"));
        cols.push(ratio);
        cols.push(norms);
    }
    table.rows = (0..times.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    rec.tables.insert("smoothing".into(), table);
    Ok(())
}

fn family_label(d: &DataSpec) -> String {
    match d {
        DataSpec::Zero => "zero",
        DataSpec::Gaussian { .. } => "gaussian",
        DataSpec::Homogeneous { .. } => "homogeneous",
        DataSpec::Indicator { .. } => "indicator",
        DataSpec::TruncatedPower { .. } => "truncated_power",
        DataSpec::DominatedGaussian { .. } => "dominated_gaussian",
        DataSpec::Bump { .. } => "bump",
    }
    .into()
}

fn exp_local_lambda(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    if !(spec.alpha < 0.0) {
        return Err(Error::config("spec.alpha", "local_lambda needs alpha < 0"));
    }
    let grid = cfg.grid()?;
    let mut ev = cfg.evolve.clone();
    ev.norms = true;
    let data: Vec<(f64, DataSpec)> = if cfg.knobs.amplitudes.is_empty() {
        vec![(1.0, cfg.data.clone())]
    } else {
        let DataSpec::Gaussian { width, .. } = cfg.data else {
            return Err(Error::config("data.kind", "amplitude sweeps need gaussian data"));
        };
        cfg.knobs
            .amplitudes
            .iter()
            .map(|&amplitude| (amplitude, DataSpec::Gaussian { amplitude, width }))
            .collect()
    };
    let lo = data.iter().map(|d| d.0).fold(f64::INFINITY, f64::min);
    let hi = data.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);
    let runs: Vec<(f64, Result<(Trajectory, RunOutcome)>)> = data
        .par_iter()
        .map(|(a, d)| (*a, d.sample(grid, &spec).and_then(|u0| integrate(&u0, &spec, &ev))))
        .collect();
    for (a, r) in runs {
        let (traj, out) = r?;
        let lam: Vec<f64> = traj.records.iter().map(|r| r.lambda_norm.unwrap_or(0.0)).collect();
        let label = format!("A={a}");
        if data.len() > 1 && a == lo {
            let l0 = lam[0];
            let peak = lam.iter().cloned().fold(0.0, f64::max);
            rec.check_flag(&format!("completed_{label}"), out.completed());
            rec.check_le(&format!("bounded_{label}"), peak, 2.0 * l0);
        } else if data.len() > 1 && a == hi {
            rec.check_flag(&format!("blowup_{label}"), out.blew_up());
            rec.check_flag(
                &format!("lambda_growth_{label}"),
                lam.len() >= 2 && lam.windows(2).all(|w| w[1] > w[0]),
            );
        }
        rec.trajectories.insert(label.clone(), traj.records);
        rec.cell(label, a, Ok(out));
    }
    Ok(())
}

fn exp_weakstar_init(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    if !rec.regime.global_b1.holds {
        rec.notes.push(format!("global_b1 does not hold ({})", rec.regime.global_b1.reason));
    }
    let times = &cfg.knobs.times;
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::config("knobs.times", "need at least two positive times"));
    }
    let grid = cfg.grid()?;
    let u0 = cfg.data.sample(grid, &spec)?;
    let mut ev = cfg.evolve.clone();
    for &t in times {
        push_time(&mut ev, t);
    }
    let (traj, out) = integrate(&u0, &spec, &ev)?;
    rec.cell("u", 0.0, Ok(out));
    rec.check_flag("completed", out.completed());
    let phis = [
        ("bump_1", Field::radial(grid, psi)),
        ("bump_3", Field::radial(grid, |r| psi(r / 3.0))),
        ("gaussian_2", Field::radial(grid, |r| (-(r / 2.0).powi(2)).exp())),
    ];
    let cell = grid.cell_measure();
    let mut table = Table::new(&["t"]);
    table.columns.extend(phis.iter().map(|p| p.0.to_string()));
    for &t in times {
        let Some(u) = snapshot_at(&traj, t) else { continue };
        let mut row = vec![t];
        for (_, phi) in &phis {
            let s: f64 = (0..u.data.len()).map(|i| (u.data[i] - u0.data[i]) * phi.data[i]).sum();
            row.push(s * cell);
        }
        table.rows.push(row);
    }
    let target = 0.8 * spec.alpha / (2.0 * spec.m);
    let [t0, t1] = cfg.knobs.fit_window.unwrap_or([times[0], *times.last().unwrap()]);
    let ts = table.column("t").unwrap_or_default();
    for (name, _) in &phis {
        let ys = table.column(name).unwrap_or_default();
        match loglog_slope(&ts, &ys, t0, t1) {
            Some(s) => {
                rec.metric(&format!("slope_{name}"), s);
                rec.check_ge(&format!("slope_{name}"), s, target);
            }
            None => rec.notes.push(format!("{name}: pairing vanishes, no slope")),
        }
    }
    rec.tables.insert("pairings".into(), table);
    Ok(())
}

fn exp_uniqueness_cross(cfg: &ExperimentConfig, rec: &mut RunRecord) -> Result<()> {
    let spec = cfg.spec;
    let t_end = cfg.evolve.t_end;
    let u0 = cfg.data.sample(cfg.grid()?, &spec)?;
    let run_etd = |dt: f64| -> Result<Field> {
        let mut ev = cfg.evolve.clone();
        ev.scheme = Scheme::Etd2rk;
        ev.dt = dt;
        ev.dt_min = ev.dt_min.min(dt);
        ev.norms = false;
        ev.snap_times = vec![t_end];
        let (traj, out) = integrate(&u0, &spec, &ev)?;
        if !out.completed() {
            return Err(Error::Insufficient(format!("ETD run stopped: {:?}", out.status)));
        }
        snapshot_at(&traj, t_end)
            .cloned()
            .ok_or_else(|| Error::Insufficient("missing final snapshot".into()))
    };
    let etd = run_etd(cfg.evolve.dt)?;
    let pic = picard_solve(&u0, &spec, t_end, &cfg.evolve)?;
    let last = pic.slices.last().unwrap();
    let err = last.sup_dist(&etd);
    rec.metric("picard_vs_etd", err);
    rec.check_le("picard_vs_etd", err, 1e-4);
    let mut dist = Table::new(&["iteration", "distance"]);
    for (i, d) in pic.distances.iter().enumerate() {
        dist.rows.push(vec![(i + 1) as f64, *d]);
    }
    rec.tables.insert("picard_distances".into(), dist);
    rec.check_flag(
        "contraction",
        pic.distances.len() >= 2 && pic.distances.last() < pic.distances.first(),
    );
    if !cfg.knobs.slices.is_empty() {
        let rdt = cfg.knobs.reference_dt.unwrap_or(cfg.evolve.dt / 4.0);
        let reference = run_etd(rdt)?;
        let mut table = Table::new(&["slices", "error"]);
        let errs = cfg
            .knobs
            .slices
            .par_iter()
            .map(|&s| {
                let mut ev = cfg.evolve.clone();
                ev.picard.slices = s;
                let r = picard_solve(&u0, &spec, t_end, &ev)?;
                Ok(r.slices.last().unwrap().sup_dist(&reference))
            })
            .collect::<Result<Vec<f64>>>()?;
        for (&s, &e) in cfg.knobs.slices.iter().zip(&errs) {
            table.rows.push(vec![s as f64, e]);
        }
        rec.tables.insert("refinement".into(), table);
        rec.check_flag("refinement_improves", errs.windows(2).all(|w| w[1] < w[0]));
    }
    Ok(())
}
