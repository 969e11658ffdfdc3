//! Mild-solution time integration: exponential time differencing and Picard iteration.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{self, LorentzExponents};
use crate::params::{derive_exponents, ProblemSpec};
use crate::spectral::{phi1, phi2, singular_weight, Field, Grid, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Etd1,
    Etd2rk,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub iters: usize,
    pub slices: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { iters: 8, slices: 64 }
    }
}

fn d_u_max() -> f64 {
    1e8
}
fn d_dt_min() -> f64 {
    1e-12
}
fn d_growth() -> f64 {
    10.0
}
fn d_true() -> bool {
    true
}
fn d_scheme() -> Scheme {
    Scheme::Etd2rk
}

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "d_scheme")]
    pub scheme: Scheme,
    #[serde(default = "d_u_max")]
    pub u_max: f64,
    #[serde(default = "d_dt_min")]
    pub dt_min: f64,
    #[serde(default = "d_growth")]
    pub growth_cap: f64,
    #[serde(default = "d_true")]
    pub dealias: bool,
    /// Record norms every `record_dt`; every accepted step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snap_times: Vec<f64>,
    /// Keep a snapshot at every record time.
    #[serde(default)]
    pub snap_records: bool,
    /// Weight regularisation; `h/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_weight: Option<f64>,
    #[serde(default)]
    pub picard: PicardConfig,
    /// Compute the Lorentz norms at record times.
    #[serde(default = "d_true")]
    pub norms: bool,
    /// Auxiliary exponent for the `t^δ`-weighted weak norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdelta_q: Option<f64>,
    /// Turn the nonlinearity off (linear flow).
    #[serde(default)]
    pub linear: bool,
}

impl EvolveConfig {
    pub fn new(dt: f64, t_end: f64) -> EvolveConfig {
        EvolveConfig {
            dt,
            t_end,
            scheme: Scheme::Etd2rk,
            u_max: 1e8,
            dt_min: 1e-12,
            growth_cap: 10.0,
            dealias: true,
            record_dt: None,
            snap_times: Vec::new(),
            snap_records: false,
            eps_weight: None,
            picard: PicardConfig::default(),
            norms: true,
            tdelta_q: None,
            linear: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, m: String| Err(Error::config(k, m));
        if !(self.dt > 0.0) {
            return bad("dt", format!("{} must be positive", self.dt));
        }
        if !(self.t_end > 0.0) {
            return bad("t_end", format!("{} must be positive", self.t_end));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt) {
            return bad("dt_min", format!("need 0 < dt_min <= dt, got {}", self.dt_min));
        }
        if !(self.u_max > 0.0) {
            return bad("u_max", "must be positive".into());
        }
        if !(self.growth_cap > 1.0) {
            return bad("growth_cap", "must exceed 1".into());
        }
        if let Some(r) = self.record_dt {
            if !(r > 0.0) {
                return bad("record_dt", "must be positive".into());
            }
        }
        if self.picard.slices < 8 {
            return bad("picard.slices", "need at least 8 slices".into());
        }
        Ok(())
    }
}

/// Norms of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub t: f64,
    pub sup: f64,
    pub l_qc: Option<f64>,
    pub weak_qc_quasinorm: Option<f64>,
    pub weak_qc_norm: Option<f64>,
    pub lambda_norm: Option<f64>,
    pub tdelta_lq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<NormRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> Option<&NormRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    Blowup { t_star: f64, uncertainty: f64 },
    StepUnderflow { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: Status,
    pub t_final: f64,
    pub final_dt: f64,
    pub max_sup: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl RunOutcome {
    pub fn blew_up(&self) -> bool {
        matches!(self.status, Status::Blowup { .. })
    }
    pub fn completed(&self) -> bool {
        matches!(self.status, Status::Completed)
    }
}

/// Norms of `u` at time `t`.
pub fn record_norms(u: &Field, t: f64, spec: &ProblemSpec, cfg: &EvolveConfig) -> NormRecord {
    let mut rec = NormRecord {
        t,
        sup: u.sup(),
        l_qc: None,
        weak_qc_quasinorm: None,
        weak_qc_norm: None,
        lambda_norm: None,
        tdelta_lq: None,
    };
    if !cfg.norms {
        return rec;
    }
    if spec.alpha < 0.0 {
        rec.lambda_norm = Some(lorentz::lambda_norm(u, spec).0);
    }
    let Ok(ex) = derive_exponents(spec) else {
        return rec;
    };
    if ex.q_c > 0.0 {
        let r = lorentz::rearrange(u);
        rec.l_qc = Some(lorentz::lebesgue_norm(u, ex.q_c));
        rec.weak_qc_quasinorm = Some(r.weak_quasinorm(ex.q_c));
        if ex.q_c > 1.0 {
            rec.weak_qc_norm = r
                .lorentz_norm(LorentzExponents { p: ex.q_c, q: f64::INFINITY })
                .ok();
        }
        if let Some(q) = cfg.tdelta_q {
            if q > 1.0 {
                rec.tdelta_lq = r
                    .lorentz_norm(LorentzExponents { p: q, q: f64::INFINITY })
                    .ok()
                    .map(|v| t.powf(ex.delta(q)) * v);
            }
        }
    }
    rec
}

struct Mults {
    e: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

/// Spectral solver bound to one grid and spec.
pub struct Solver {
    pub sp: Spectral,
    pub spec: ProblemSpec,
    pub weight: Field,
    symbol: Vec<f64>,
    dealias: bool,
    linear: bool,
    cache: Vec<(u64, Arc<Mults>)>,
}

/// Working state: physical values and their spectrum.
#[derive(Clone)]
pub struct State {
    pub u: Vec<f64>,
    pub uh: Vec<Complex64>,
}

impl Solver {
    pub fn new(grid: Grid, spec: ProblemSpec, cfg: &EvolveConfig) -> Result<Solver> {
        spec.validate()?;
        if grid.n != spec.n {
            return Err(Error::InvalidParameter(format!(
                "grid dimension {} differs from spec dimension {}",
                grid.n, spec.n
            )));
        }
        let eps = cfg.eps_weight.unwrap_or(grid.h() / 2.0);
        let sp = Spectral::new(grid);
        let symbol = sp.symbol(spec.m);
        Ok(Solver {
            weight: singular_weight(grid, spec.alpha, eps)?,
            sp,
            spec,
            symbol,
            dealias: cfg.dealias,
            linear: cfg.linear,
            cache: Vec::new(),
        })
    }

    pub fn grid(&self) -> Grid {
        self.sp.grid
    }

    /// `|xi|^{2m}` per mode.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn state(&self, u: &Field) -> State {
        let mut uh = vec![Complex64::default(); u.data.len()];
        self.sp.forward_into(&u.data, &mut uh);
        State { u: u.data.clone(), uh }
    }

    /// Spectrum of `w F(u)`, dealiased when configured.
    pub fn nonlinear_hat(&self, u: &[f64], out: &mut [Complex64]) -> Result<()> {
        if self.linear {
            out.fill(Complex64::default());
            return Ok(());
        }
        for ((o, &v), &w) in out.iter_mut().zip(u).zip(&self.weight.data) {
            let f = w * self.spec.f(v);
            if !f.is_finite() {
                return Err(Error::NonFinite("nonlinear term".into()));
            }
            *o = Complex64::new(f, 0.0);
        }
        self.sp.forward_into_inplace(out);
        if self.dealias {
            self.sp.dealias_coeffs(out);
        }
        Ok(())
    }

    fn mults(&mut self, dt: f64) -> Arc<Mults> {
        let key = dt.to_bits();
        if let Some((_, m)) = self.cache.iter().find(|(k, _)| *k == key) {
            return m.clone();
        }
        let mut e = Vec::with_capacity(self.symbol.len());
        let mut p1 = Vec::with_capacity(self.symbol.len());
        let mut p2 = Vec::with_capacity(self.symbol.len());
        for &s in &self.symbol {
            let z = -dt * s;
            e.push(z.exp());
            p1.push(dt * phi1(z));
            p2.push(dt * phi2(z));
        }
        let m = Arc::new(Mults { e, p1, p2 });
        if self.cache.len() >= 6 {
            self.cache.remove(0);
        }
        self.cache.push((key, m.clone()));
        m
    }

    /// Advance `st` by `dt`.
    pub fn advance(&mut self, st: &mut State, dt: f64, scheme: Scheme) -> Result<()> {
        let m = self.mults(dt);
        let len = st.u.len();
        let mut nu = vec![Complex64::default(); len];
        self.nonlinear_hat(&st.u, &mut nu)?;
        let mut ah: Vec<Complex64> = (0..len)
            .map(|i| st.uh[i] * m.e[i] + nu[i] * m.p1[i])
            .collect();
        match scheme {
            Scheme::Etd1 | Scheme::Picard => {
                st.uh.copy_from_slice(&ah);
            }
            Scheme::Etd2rk => {
                let mut a = vec![0.0; len];
                self.sp.inverse_into(&mut ah.clone(), &mut a);
                let mut na = vec![Complex64::default(); len];
                self.nonlinear_hat(&a, &mut na)?;
                for i in 0..len {
                    ah[i] += (na[i] - nu[i]) * m.p2[i];
                }
                st.uh.copy_from_slice(&ah);
            }
        }
        self.sp.inverse_into(&mut ah, &mut st.u);
        Ok(())
    }

    /// One step from a field.
    pub fn step(&mut self, u: &Field, dt: f64, scheme: Scheme) -> Result<Field> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("dt = {dt} must be positive")));
        }
        let mut st = self.state(u);
        self.advance(&mut st, dt, scheme)?;
        Ok(Field {
            grid: u.grid,
            data: st.u,
        })
    }
}

impl Spectral {
    /// Forward transform of a complex buffer in place.
    pub fn forward_into_inplace(&self, buf: &mut [Complex64]) {
        let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
        self.forward_into(&re, buf);
    }
}

/// `w_eps F(u)` in physical space.
pub fn nonlinear_term(u: &Field, spec: &ProblemSpec, eps: f64, dealias: bool) -> Result<Field> {
    let mut cfg = EvolveConfig::new(1.0, 1.0);
    cfg.eps_weight = Some(eps);
    cfg.dealias = dealias;
    let s = Solver::new(u.grid, *spec, &cfg)?;
    let mut buf = vec![Complex64::default(); u.data.len()];
    s.nonlinear_hat(&u.data, &mut buf)?;
    let mut out = vec![0.0; u.data.len()];
    s.sp.inverse_into(&mut buf, &mut out);
    if !dealias {
        // skip the transform round trip
        out = u
            .data
            .iter()
            .zip(&s.weight.data)
            .map(|(&v, &w)| w * spec.f(v))
            .collect();
    }
    Ok(Field {
        grid: u.grid,
        data: out,
    })
}

fn event_times(cfg: &EvolveConfig) -> Vec<(f64, bool, bool)> {
    // (time, record, snapshot)
    let mut ev: Vec<(f64, bool, bool)> = Vec::new();
    if let Some(r) = cfg.record_dt {
        let k = (cfg.t_end / r + 1e-9).floor() as usize;
        for i in 1..=k {
            ev.push(((i as f64 * r).min(cfg.t_end), true, cfg.snap_records));
        }
    }
    for &s in &cfg.snap_times {
        if s > 0.0 && s <= cfg.t_end {
            ev.push((s, false, true));
        }
    }
    ev.push((cfg.t_end, true, cfg.snap_records));
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool, bool)> = Vec::new();
    for e in ev {
        match merged.last_mut() {
            Some(l) if (l.0 - e.0).abs() <= 1e-12 * e.0.max(1.0) => {
                l.1 |= e.1;
                l.2 |= e.2;
            }
            _ => merged.push(e),
        }
    }
    merged
}

/// Integrate from `u0` to `cfg.t_end`.
pub fn integrate(u0: &Field, spec: &ProblemSpec, cfg: &EvolveConfig) -> Result<(Trajectory, RunOutcome)> {
    cfg.validate()?;
    let mut solver = Solver::new(u0.grid, *spec, cfg)?;
    integrate_with(&mut solver, u0, cfg)
}

/// [`integrate`] reusing a prepared solver.
pub fn integrate_with(solver: &mut Solver, u0: &Field, cfg: &EvolveConfig) -> Result<(Trajectory, RunOutcome)> {
    cfg.validate()?;
    if cfg.scheme == Scheme::Picard {
        return integrate_picard(solver, u0, cfg);
    }
    let spec = solver.spec;
    let grid = u0.grid;
    let mut traj = Trajectory::default();
    traj.records.push(record_norms(u0, 0.0, &spec, cfg));
    if cfg.snap_records || cfg.snap_times.contains(&0.0) {
        traj.snapshots.push(Snapshot { t: 0.0, field: u0.clone() });
    }
    let events = event_times(cfg);
    let mut st = solver.state(u0);
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut sup = u0.sup();
    let mut max_sup = sup;
    let mut steps = 0;
    let mut rejected = 0;
    let mut recent: Vec<f64> = vec![sup];
    let mut ev = 0;
    let mut last_h = dt;
    let status = loop {
        if ev >= events.len() {
            break Status::Completed;
        }
        let target = events[ev].0;
        let mut h = dt.min(target - t);
        let hit = target - (t + h) <= 1e-9 * dt;
        if hit {
            h = target - t;
        }
        if h <= 0.0 {
            t = target;
            ev += 1;
            continue;
        }
        let mut trial = st.clone();
        let ok = solver.advance(&mut trial, h, cfg.scheme).is_ok();
        let new_sup = if ok {
            trial.u.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
        } else {
            f64::NAN
        };
        let growth = if sup > 1e-300 { new_sup / sup } else { 1.0 };
        if !new_sup.is_finite() || !(growth <= cfg.growth_cap) {
            rejected += 1;
            dt *= 0.5;
            if dt < cfg.dt_min {
                let growing = recent.windows(2).all(|w| w[1] > w[0]) && recent.len() >= 3;
                break if growing {
                    Status::Blowup { t_star: t, uncertainty: last_h }
                } else {
                    Status::StepUnderflow { t }
                };
            }
            continue;
        }
        steps += 1;
        last_h = h;
        if new_sup > cfg.u_max {
            let frac = ((cfg.u_max / sup).ln() / (new_sup / sup).ln()).clamp(0.0, 1.0);
            let t_star = t + frac * h;
            t += h;
            max_sup = max_sup.max(new_sup);
            let f = Field { grid, data: trial.u };
            traj.records.push(record_norms(&f, t, &spec, cfg));
            break Status::Blowup { t_star, uncertainty: h };
        }
        st = trial;
        t = if hit { target } else { t + h };
        sup = new_sup;
        max_sup = max_sup.max(sup);
        recent.push(sup);
        if recent.len() > 4 {
            recent.remove(0);
        }
        if dt < cfg.dt && growth <= cfg.growth_cap.sqrt() {
            dt = (2.0 * dt).min(cfg.dt);
        }
        let on_event = hit;
        if on_event || cfg.record_dt.is_none() {
            let (rec, snap) = if on_event { (events[ev].1, events[ev].2) } else { (true, false) };
            let f = Field { grid, data: st.u.clone() };
            if rec || cfg.record_dt.is_none() {
                traj.records.push(record_norms(&f, t, &spec, cfg));
            }
            if snap {
                traj.snapshots.push(Snapshot { t, field: f });
            }
        }
        if on_event {
            ev += 1;
        }
    };
    Ok((
        traj,
        RunOutcome {
            status,
            t_final: t,
            final_dt: dt,
            max_sup,
            steps,
            rejected,
        },
    ))
}

/// Output of [`picard_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    /// `d_i = max_j ||u_{i+1}(t_j) - u_i(t_j)||_∞`.
    pub distances: Vec<f64>,
    pub times: Vec<f64>,
    /// Final iterate on the slice lattice.
    pub slices: Vec<Field>,
}

/// Successive approximations on the lattice `t_j = jT/S`.
pub fn picard_solve(u0: &Field, spec: &ProblemSpec, t_end: f64, cfg: &EvolveConfig) -> Result<PicardResult> {
    let mut solver = Solver::new(u0.grid, *spec, cfg)?;
    picard_with(&mut solver, u0, t_end, cfg.picard)
}

fn picard_with(solver: &mut Solver, u0: &Field, t_end: f64, pc: PicardConfig) -> Result<PicardResult> {
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("horizon {t_end} must be positive")));
    }
    if pc.slices < 8 {
        return Err(Error::InvalidParameter("need at least 8 slices".into()));
    }
    let grid = u0.grid;
    let len = grid.len();
    let s = pc.slices;
    let ds = t_end / s as f64;
    let times: Vec<f64> = (0..=s).map(|j| j as f64 * ds).collect();
    let sym = solver.symbol().to_vec();
    let e_full: Vec<f64> = sym.iter().map(|&l| (-ds * l).exp()).collect();
    let e_half: Vec<f64> = sym.iter().map(|&l| ds * (-0.5 * ds * l).exp()).collect();
    let u0h = solver.state(u0).uh;
    // u_1(t_j) = E(t_j) u0
    let base: Vec<Vec<f64>> = times
        .iter()
        .map(|&tj| {
            let mut c: Vec<Complex64> = u0h.iter().zip(&sym).map(|(c, &l)| c * (-tj * l).exp()).collect();
            let mut out = vec![0.0; len];
            solver.sp.inverse_into(&mut c, &mut out);
            out
        })
        .collect();
    let mut cur = base.clone();
    let mut distances = Vec::new();
    let mut ih = vec![Complex64::default(); len];
    let mut m_prev = vec![Complex64::default(); len];
    let mut m_next = vec![Complex64::default(); len];
    let mut tmp = vec![0.0; len];
    for _ in 0..pc.iters {
        ih.fill(Complex64::default());
        solver.nonlinear_hat(&cur[0], &mut m_prev)?;
        let mut d: f64 = 0.0;
        for j in 0..s {
            solver.nonlinear_hat(&cur[j + 1], &mut m_next)?;
            for i in 0..len {
                ih[i] = ih[i] * e_full[i] + (m_prev[i] + m_next[i]) * (0.5 * e_half[i]);
            }
            let mut c = ih.clone();
            solver.sp.inverse_into(&mut c, &mut tmp);
            let slot = &mut cur[j + 1];
            for i in 0..len {
                let v = base[j + 1][i] + tmp[i];
                d = d.max((v - slot[i]).abs());
                slot[i] = v;
            }
            std::mem::swap(&mut m_prev, &mut m_next);
        }
        if !d.is_finite() {
            return Err(Error::NonFinite("Picard iterate".into()));
        }
        distances.push(d);
        let k = distances.len();
        if k >= 4 && (k - 3..k).all(|i| distances[i] > distances[i - 1]) {
            return Err(Error::NonContraction(distances));
        }
    }
    Ok(PicardResult {
        distances,
        times,
        slices: cur.into_iter().map(|data| Field { grid, data }).collect(),
    })
}

fn integrate_picard(solver: &mut Solver, u0: &Field, cfg: &EvolveConfig) -> Result<(Trajectory, RunOutcome)> {
    let spec = solver.spec;
    let res = picard_with(solver, u0, cfg.t_end, cfg.picard)?;
    let mut traj = Trajectory::default();
    let mut max_sup: f64 = 0.0;
    for (t, f) in res.times.iter().zip(&res.slices) {
        max_sup = max_sup.max(f.sup());
        traj.records.push(record_norms(f, *t, &spec, cfg));
        if cfg.snap_records {
            traj.snapshots.push(Snapshot { t: *t, field: f.clone() });
        }
    }
    Ok((
        traj,
        RunOutcome {
            status: Status::Completed,
            t_final: cfg.t_end,
            final_dt: cfg.t_end / cfg.picard.slices as f64,
            max_sup,
            steps: cfg.picard.slices * cfg.picard.iters,
            rejected: 0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::FKind;

    fn grid1(n: usize, l: f64) -> Grid {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let g = grid1(64, 10.0);
        let spec = ProblemSpec::new(1, 0.25, 0.25, 2.0, FKind::Unsigned).unwrap();
        let cfg = EvolveConfig::new(0.1, 1.0);
        let (traj, out) = integrate(&Field::zeros(g), &spec, &cfg).unwrap();
        assert!(out.completed());
        assert!(traj.records.iter().all(|r| r.sup == 0.0));
        let mut s = Solver::new(g, spec, &cfg).unwrap();
        assert_eq!(s.step(&Field::zeros(g), 0.3, Scheme::Etd2rk).unwrap().sup(), 0.0);
    }

    #[test]
    fn nonlinear_term_examples() {
        let g = grid1(8, 4.0);
        let spec = ProblemSpec::new(1, 1.0, 1.0, 3.0, FKind::Signed).unwrap();
        let u = Field::radial(g, |_| 2.0);
        let n = nonlinear_term(&u, &spec, 1e-100, false).unwrap();
        // |x| = 2 sits two cells from the origin
        assert!((n.data[g.origin() + 2] - 4.0).abs() < 1e-12);
        let spec0 = ProblemSpec::new(1, 1.0, 0.0, 2.0, FKind::Signed).unwrap();
        let u = Field::from_fn(g, |x| x[0] - 0.5);
        let n = nonlinear_term(&u, &spec0, 0.0, false).unwrap();
        for (a, b) in n.data.iter().zip(&u.data) {
            assert_eq!(*a, b * b.abs());
        }
        assert_eq!(nonlinear_term(&Field::zeros(g), &spec, 0.1, true).unwrap().sup(), 0.0);
    }

    #[test]
    fn linear_gaussian_sup_decay() {
        let g = grid1(1024, 40.0);
        let spec = ProblemSpec::new(1, 1.0, 0.0, 2.0, FKind::Signed).unwrap();
        let mut cfg = EvolveConfig::new(0.25, 3.0);
        cfg.linear = true;
        cfg.record_dt = Some(0.5);
        let u0 = Field::radial(g, |r| (-r * r / 4.0).exp());
        let (traj, out) = integrate(&u0, &spec, &cfg).unwrap();
        assert!(out.completed());
        assert_eq!(traj.records.len(), 7);
        for r in &traj.records {
            assert!((r.sup - (1.0 + r.t).powf(-0.5)).abs() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn snapshots_at_requested_times() {
        let g = grid1(64, 10.0);
        let spec = ProblemSpec::new(1, 1.0, 0.0, 2.0, FKind::Signed).unwrap();
        let mut cfg = EvolveConfig::new(0.03, 1.0);
        cfg.snap_times = vec![0.0, 0.1, 0.5, 1.0];
        let u0 = Field::radial(g, |r| (-r * r).exp());
        let (traj, _) = integrate(&u0, &spec, &cfg).unwrap();
        let ts: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.1, 0.5, 1.0]);
        assert!(traj.records.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn subcritical_blowup() {
        let g = grid1(4096, 256.0);
        let spec = ProblemSpec::new(1, 0.25, 0.25, 1.15, FKind::Unsigned).unwrap();
        let mut cfg = EvolveConfig::new(0.05, 200.0);
        cfg.norms = false;
        cfg.record_dt = Some(1.0);
        let u0 = Field::radial(g, |r| (-r * r).exp());
        let (_, out) = integrate(&u0, &spec, &cfg).unwrap();
        assert!(out.blew_up(), "{out:?}");
    }

    #[test]
    fn picard_trivial_and_contracting() {
        let g = grid1(256, 32.0);
        let spec = ProblemSpec::new(1, 0.25, 0.25, 2.0, FKind::Unsigned).unwrap();
        let mut cfg = EvolveConfig::new(0.01, 1.0);
        cfg.linear = true;
        let u0 = Field::radial(g, |r| 0.01 * (-r * r).exp());
        let r = picard_solve(&u0, &spec, 1.0, &cfg).unwrap();
        assert_eq!(r.distances[0], 0.0);
        cfg.linear = false;
        let r = picard_solve(&u0, &spec, 1.0, &cfg).unwrap();
        for i in 2..r.distances.len() - 1 {
            let (a, b) = (r.distances[i], r.distances[i + 1]);
            assert!(b < a || b < 1e-17, "{:?}", r.distances);
        }
    }
}
