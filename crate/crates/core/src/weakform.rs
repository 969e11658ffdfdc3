//! Weak-formulation residuals and the rescaled test function functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{EvolveConfig, Snapshot};
use crate::params::{fujita_bound_exponent, ProblemSpec};
use crate::spectral::{singular_weight, Field, Spectral};

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn bump_prime(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp() / (s * s)
    } else {
        0.0
    }
}

/// Smooth step: 1 on `[0,1]`, 0 on `[2,∞)`.
pub fn psi(tau: f64) -> f64 {
    if tau <= 1.0 {
        return 1.0;
    }
    if tau >= 2.0 {
        return 0.0;
    }
    let a = bump(2.0 - tau);
    a / (a + bump(tau - 1.0))
}

pub fn psi_prime(tau: f64) -> f64 {
    if tau <= 1.0 || tau >= 2.0 {
        return 0.0;
    }
    let (a, b) = (bump(2.0 - tau), bump(tau - 1.0));
    let (da, db) = (-bump_prime(2.0 - tau), bump_prime(tau - 1.0));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// A space-time test function sampled on the grid.
pub trait TestFunction {
    fn value(&self, x: &[f64], t: f64) -> f64;
    fn time_derivative(&self, x: &[f64], t: f64) -> f64;
    /// Radius of a ball containing the spatial support.
    fn support_radius(&self) -> f64;
}

/// `ψ_R(x,t) = ψ(t/R)^{p'} ψ(|x|^{2m}/R)^{2m p'}` with `p' = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiR {
    pub r: f64,
    pub m: f64,
    pub p: f64,
}

impl PsiR {
    pub fn new(r: f64, spec: &ProblemSpec) -> Result<PsiR> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("R = {r} must be positive")));
        }
        Ok(PsiR {
            r,
            m: spec.m,
            p: spec.p,
        })
    }

    fn pp(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn space(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        psi(r2.powf(self.m) / self.r).powf(2.0 * self.m * self.pp())
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        psi(t / self.r).powf(self.pp()) * self.space(x)
    }
}

impl TestFunction for PsiR {
    fn value(&self, x: &[f64], t: f64) -> f64 {
        self.eval(x, t)
    }

    fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        let tau = t / self.r;
        let pp = self.pp();
        let s = psi(tau);
        if s == 0.0 {
            return 0.0;
        }
        pp * s.powf(pp - 1.0) * psi_prime(tau) / self.r * self.space(x)
    }

    fn support_radius(&self) -> f64 {
        (2.0 * self.r).powf(1.0 / (2.0 * self.m))
    }
}

/// Time-independent radial bump `ψ(|x|/ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub radius: f64,
}

impl TestFunction for Bump {
    fn value(&self, x: &[f64], _t: f64) -> f64 {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        psi(r / self.radius)
    }

    fn time_derivative(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Terms of the weak identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    /// LHS − RHS.
    pub residual: f64,
    /// `∫∫ u(-∂_tψ + (-Δ)^m ψ)`.
    pub lhs: f64,
    /// `∫ u_0 ψ(·,0)`.
    pub initial: f64,
    /// `∫ u(T) ψ(·,T)` at the last snapshot.
    pub terminal: f64,
    /// `∫∫ w F(u) ψ`.
    pub source: f64,
    pub scale: f64,
}

/// Residual of `∫∫u(-∂_tψ + (-Δ)^mψ) = ∫u_0ψ(0) - ∫u(T)ψ(T) + ∫∫wF(u)ψ` over the snapshots.
///
/// Snapshots must start at `t = 0`; `cfg` is the configuration of the run that produced them
/// (weight regularisation and whether the nonlinearity was on).
pub fn weak_residual(
    snaps: &[Snapshot],
    spec: &ProblemSpec,
    tf: &dyn TestFunction,
    cfg: &EvolveConfig,
) -> Result<WeakResidual> {
    if !spec.m_is_integer() {
        return Err(Error::InvalidParameter(format!(
            "weak formulation needs integer m, got {}",
            spec.m
        )));
    }
    if snaps.len() < 2 || snaps[0].t != 0.0 {
        return Err(Error::Insufficient("need snapshots starting at t = 0".into()));
    }
    if snaps.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidParameter("snapshot times must increase".into()));
    }
    let grid = snaps[0].field.grid;
    if tf.support_radius() >= grid.extent - grid.h() {
        return Err(Error::Support(format!(
            "support radius {} reaches the box edge {}",
            tf.support_radius(),
            grid.extent
        )));
    }
    let sp = Spectral::new(grid);
    let w = singular_weight(grid, spec.alpha, cfg.eps_weight.unwrap_or(grid.h() / 2.0))?;
    let cell = grid.cell_measure();
    let mut lin = Vec::with_capacity(snaps.len());
    let mut src = Vec::with_capacity(snaps.len());
    let mut first = 0.0;
    let mut last = 0.0;
    for (k, s) in snaps.iter().enumerate() {
        let t = s.t;
        let psi_t = Field::from_fn(grid, |x| tf.value(x, t));
        let dpsi = Field::from_fn(grid, |x| tf.time_derivative(x, t));
        let apsi = sp.fractional_laplacian(&psi_t, spec.m);
        let u = &s.field.data;
        let mut l = 0.0;
        let mut n = 0.0;
        let mut b = 0.0;
        for i in 0..u.len() {
            l += u[i] * (apsi.data[i] - dpsi.data[i]);
            if !cfg.linear {
                n += w.data[i] * spec.f(u[i]) * psi_t.data[i];
            }
            b += u[i] * psi_t.data[i];
        }
        lin.push(l * cell);
        src.push(n * cell);
        if k == 0 {
            first = b * cell;
        }
        last = b * cell;
    }
    let trap = |v: &[f64]| -> f64 {
        snaps
            .windows(2)
            .zip(v.windows(2))
            .map(|(s, y)| 0.5 * (s[1].t - s[0].t) * (y[0] + y[1]))
            .sum()
    };
    let lhs = trap(&lin);
    let source = trap(&src);
    let residual = lhs - (first - last + source);
    Ok(WeakResidual {
        residual,
        lhs,
        initial: first,
        terminal: last,
        source,
        scale: lhs.abs().max(first.abs()).max(source.abs()),
    })
}

/// One row of the rescaled test function table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FujitaRow {
    pub r: f64,
    pub mass_term: f64,
    pub bound_exponent: f64,
    /// `R^{exponent}`.
    pub bound: f64,
}

/// `∫ u_0 ψ_R(·,0)` and the R-scaling of its upper bound.
pub fn fujita_functional(spec: &ProblemSpec, u0: &Field, r_list: &[f64]) -> Result<Vec<FujitaRow>> {
    let e = fujita_bound_exponent(spec);
    r_list
        .iter()
        .map(|&r| {
            let tf = PsiR::new(r, spec)?;
            let g = u0.grid;
            let s: f64 = (0..g.len())
                .map(|i| u0.data[i] * tf.eval(&g.point(i)[..g.n], 0.0))
                .sum();
            Ok(FujitaRow {
                r,
                mass_term: s * g.cell_measure(),
                bound_exponent: e,
                bound: r.powf(e),
            })
        })
        .collect()
}
