//! The rescaled kernel `g(x) = g_m(x, 1)` in physical space.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Sampled radial profile of the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub m: f64,
    pub n: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub quad_tol: f64,
    /// Achieved error estimate per radius.
    pub errors: Vec<f64>,
}

/// Default absolute tolerance for profile quadrature.
pub const QUAD_TOL: f64 = 1e-14;

/// Largest accepted error estimate per sample.
pub const MAX_POINT_ERROR: f64 = 1e-10;

/// Frequency beyond which `e^{-ρ^{2m}} < 1e-16`.
pub fn rho_max(m: f64) -> f64 {
    (16.0 * 10f64.ln()).powf(1.0 / (2.0 * m))
}

/// `J0(x)` from `(1/π) ∫_0^π cos(x sin θ) dθ` by the trapezoid rule.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    let k = (x.ceil() as usize + 40).max(32);
    let h = PI / k as f64;
    // both endpoints contribute cos(0) = 1 with weight 1/2
    let mut s = 1.0;
    for j in 1..k {
        s += (x * (j as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// `∫_0^{ρmax} f(ρ) dρ` split into panels no wider than a quarter wavelength of `cos(rρ)`.
fn radial_integral(m: f64, r: f64, tol: f64, f: impl Fn(f64) -> f64) -> Result<quad::Quad> {
    let top = rho_max(m);
    let panels = ((top * r / (0.5 * PI)).ceil() as usize).max(4);
    quad::integrate_panels(f, 0.0, top, panels, tol, 1e-13)
}

fn point(m: f64, n: usize, r: f64, tol: f64) -> Result<(f64, f64)> {
    let two_m = 2.0 * m;
    let env = |rho: f64| (-rho.powf(two_m)).exp();
    let q = match n {
        1 => {
            let q = radial_integral(m, r, tol * PI, |rho| (r * rho).cos() * env(rho))?;
            (q.value / PI, q.error / PI)
        }
        2 => {
            let c = 2.0 * PI;
            let q = radial_integral(m, r, tol * c, |rho| bessel_j0(r * rho) * rho * env(rho))?;
            (q.value / c, q.error / c)
        }
        3 => {
            let c = 2.0 * PI * PI;
            let q = if r == 0.0 {
                radial_integral(m, r, tol * c, |rho| rho * rho * env(rho))?
            } else {
                let q = radial_integral(m, r, tol * c * r, |rho| rho * (r * rho).sin() * env(rho))?;
                quad::Quad {
                    value: q.value / r,
                    error: q.error / r,
                }
            };
            (q.value / c, q.error / c)
        }
        _ => return Err(Error::InvalidParameter(format!("dimension {n}"))),
    };
    if q.1 > MAX_POINT_ERROR {
        return Err(Error::Quadrature {
            achieved: q.1,
            target: MAX_POINT_ERROR,
        });
    }
    Ok(q)
}

/// `g(r)` at each radius.
pub fn kernel_profile(m: f64, n: usize, radii: &[f64]) -> Result<KernelTable> {
    kernel_profile_tol(m, n, radii, QUAD_TOL)
}

pub fn kernel_profile_tol(m: f64, n: usize, radii: &[f64], tol: f64) -> Result<KernelTable> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("m = {m}")));
    }
    if radii.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::InvalidParameter("radii must be nonnegative".into()));
    }
    let pts: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| point(m, n, r, tol))
        .collect::<Result<_>>()?;
    Ok(KernelTable {
        m,
        n,
        radii: radii.to_vec(),
        values: pts.iter().map(|p| p.0).collect(),
        errors: pts.iter().map(|p| p.1).collect(),
        quad_tol: tol,
    })
}

/// Non-oscillating envelope of the 1-D kernel.
///
/// For `m ≤ 1` this is `g` itself. For even integer `m`, rotating the sine part onto the
/// imaginary axis gives `Ψ(r) = ∫ e^{irρ - ρ^{2m}} dρ - i ∫ e^{-rs - s^{2m}} ds` with
/// `g = Re Ψ / π`, and `|Ψ|/π` bounds `|g|` without the zeros.
pub fn envelope_profile(m: f64, radii: &[f64]) -> Result<KernelTable> {
    if m <= 1.0 {
        return kernel_profile(m, 1, radii);
    }
    if m.fract() != 0.0 || (m as i64) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "analytic envelope needs m <= 1 or even integer m, got {m}"
        )));
    }
    let two_m = 2.0 * m;
    let tol = QUAD_TOL;
    let pts: Vec<(f64, f64)> = radii
        .par_iter()
        .map(|&r| {
            let env = |x: f64| (-x.powf(two_m)).exp();
            let c = radial_integral(m, r, tol, |x| (r * x).cos() * env(x))?;
            let s = radial_integral(m, r, tol, |x| (r * x).sin() * env(x))?;
            let b = quad::integrate(|x| (-r * x).exp() * env(x), 0.0, rho_max(m), tol, 1e-14)?;
            let im = s.value - b.value;
            Ok(((c.value * c.value + im * im).sqrt() / PI, (c.error + s.error + b.error) / PI))
        })
        .collect::<Result<_>>()?;
    Ok(KernelTable {
        m,
        n: 1,
        radii: radii.to_vec(),
        values: pts.iter().map(|p| p.0).collect(),
        errors: pts.iter().map(|p| p.1).collect(),
        quad_tol: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    StretchedExponential,
    Polynomial,
}

/// Fit of `log|g| ≈ c + b ln r - d r^L` (stretched exponential) or `c - N ln(1+r)` (polynomial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    pub exponent: f64,
    pub rate: f64,
    pub log_prefactor: f64,
    pub power: f64,
    /// RMS residual in log space.
    pub residual: f64,
    pub points: usize,
    pub pinned: bool,
}

/// Noise floor below which samples are ignored.
pub const NOISE_FLOOR: f64 = 1e-14;

fn usable(table: &KernelTable, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    table
        .radii
        .iter()
        .zip(&table.values)
        .filter(|(&r, &v)| r >= lo && r <= hi && r > 0.0 && v.abs() > NOISE_FLOOR)
        .map(|(&r, &v)| (r, v.abs().ln()))
        .unzip()
}

/// Least squares for `y ≈ Σ β_j φ_j`; returns coefficients and RMS residual.
fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = cols.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, z)| x * z).sum();
        }
        a[i][k] = cols[i].iter().zip(y).map(|(x, z)| x * z).sum();
    }
    // Gaussian elimination with partial pivoting
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        a.swap(c, piv);
        if a[c][c].abs() < 1e-300 {
            return None;
        }
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    let ss: f64 = (0..y.len())
        .map(|i| {
            let fit: f64 = (0..k).map(|j| beta[j] * cols[j][i]).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    Some((beta, (ss / y.len() as f64).sqrt()))
}

fn fit_fixed_l(r: &[f64], y: &[f64], l: f64) -> Option<(Vec<f64>, f64)> {
    let ones = vec![1.0; r.len()];
    let lnr: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let rl: Vec<f64> = r.iter().map(|x| -x.powf(l)).collect();
    lstsq(&[ones, lnr, rl], y)
}

/// Stretched-exponential fit on `[lo, hi]`; `pin = Some(L)` fixes the exponent.
pub fn decay_fit(table: &KernelTable, lo: f64, hi: f64, pin: Option<f64>) -> Result<DecayFit> {
    let (r, y) = usable(table, lo, hi);
    if r.len() < 6 || r.last().unwrap() / r[0] < 1.5 {
        return Err(Error::Insufficient(format!(
            "{} usable samples in [{lo}, {hi}]",
            r.len()
        )));
    }
    let eval = |l: f64| fit_fixed_l(&r, &y, l).map(|f| f.1).unwrap_or(f64::INFINITY);
    let l = match pin {
        Some(l) => l,
        None => {
            // coarse scan then golden section
            let grid: Vec<f64> = (0..=60).map(|i| 1.0 + i as f64 * 0.05).collect();
            let best = grid
                .iter()
                .copied()
                .min_by(|a, b| eval(*a).total_cmp(&eval(*b)))
                .unwrap();
            let (mut a, mut b) = ((best - 0.05).max(0.5), best + 0.05);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if eval(c) < eval(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            0.5 * (a + b)
        }
    };
    let (beta, res) = fit_fixed_l(&r, &y, l)
        .ok_or_else(|| Error::Insufficient("singular normal equations".into()))?;
    Ok(DecayFit {
        kind: DecayKind::StretchedExponential,
        exponent: l,
        rate: beta[2],
        log_prefactor: beta[0],
        power: beta[1],
        residual: res,
        points: r.len(),
        pinned: pin.is_some(),
    })
}

/// Fit `log|g| ≈ c - N ln(1+r)` over the usable tail.
pub fn polynomial_fit(table: &KernelTable, lo: f64, hi: f64) -> Result<DecayFit> {
    let (r, y) = usable(table, lo, hi);
    if r.len() < 4 {
        return Err(Error::Insufficient(format!("{} usable samples", r.len())));
    }
    let ones = vec![1.0; r.len()];
    let l: Vec<f64> = r.iter().map(|x| -(1.0 + x).ln()).collect();
    let (beta, res) =
        lstsq(&[ones, l], &y).ok_or_else(|| Error::Insufficient("singular normal equations".into()))?;
    Ok(DecayFit {
        kind: DecayKind::Polynomial,
        exponent: beta[1],
        rate: 0.0,
        log_prefactor: beta[0],
        power: 0.0,
        residual: res,
        points: r.len(),
        pinned: false,
    })
}

/// Minimum sampled value and first radius where `g < 0`.
pub fn sign_analysis(table: &KernelTable) -> (f64, Option<f64>) {
    let min = table.values.iter().copied().fold(f64::INFINITY, f64::min);
    let first = table
        .radii
        .iter()
        .zip(&table.values)
        .find(|(_, &v)| v < 0.0)
        .map(|(&r, _)| r);
    (min, first)
}

/// `sup_k (1+r_k)^N |g(r_k)|`.
pub fn polynomial_envelope(table: &KernelTable, power: f64) -> f64 {
    table
        .radii
        .iter()
        .zip(&table.values)
        .fold(0.0, |m, (&r, &v)| m.max((1.0 + r).powf(power) * v.abs()))
}

/// One sample of the convolution bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvSample {
    pub lambda: f64,
    pub y: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvBound {
    pub ratio: f64,
    pub samples: Vec<ConvSample>,
    pub cutoff: f64,
}

/// Cubic interpolation on a uniform table starting at 0.
fn interp_uniform(vals: &[f64], dr: f64, r: f64) -> f64 {
    let x = r / dr;
    let i = x.floor() as isize;
    let t = x - i as f64;
    let at = |j: isize| -> f64 {
        let j = j.unsigned_abs();
        vals.get(j).copied().unwrap_or(0.0)
    };
    let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
}

/// `sup (1+|y|)^η ∫ |g(x)| (1+|y-λx|)^{-η} dx` over the samples (1-D).
pub fn conv_bound_ratio(m: f64, n: usize, eta: f64, lambdas: &[f64], ys: &[f64]) -> Result<ConvBound> {
    if n != 1 {
        return Err(Error::InvalidParameter("convolution bound implemented for n = 1".into()));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta}")));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l <= 2.0)) {
        return Err(Error::InvalidParameter("lambda must lie in (0, 2]".into()));
    }
    // tabulate g until it drops under the noise floor (or a fixed cap for heavy tails)
    let dr = 0.01;
    let cap = if m >= 1.0 { 40.0 } else { 200.0 };
    let radii: Vec<f64> = (0..=(cap / dr) as usize).map(|i| i as f64 * dr).collect();
    let table = kernel_profile(m, 1, &radii)?;
    let cutoff = if m >= 1.0 {
        let last = table.values.iter().rposition(|v| v.abs() > NOISE_FLOOR).unwrap_or(0);
        radii[(last + 4).min(radii.len() - 1)]
    } else {
        cap
    };
    let g = |x: f64| interp_uniform(&table.values, dr, x.abs()).abs();
    let mut samples = Vec::new();
    for &lam in lambdas {
        for &y in ys {
            let f = |x: f64| g(x) * (1.0 + (y - lam * x).abs()).powf(-eta);
            let mut cuts = vec![-cutoff, 0.0, cutoff];
            let kink = y / lam;
            if kink.abs() < cutoff && kink != 0.0 {
                cuts.push(kink);
            }
            cuts.sort_by(f64::total_cmp);
            let mut lhs = 0.0;
            for w in cuts.windows(2) {
                lhs += quad::integrate_panels(f, w[0], w[1], ((w[1] - w[0]) / 0.5).ceil() as usize, 1e-13, 1e-11)?.value;
            }
            samples.push(ConvSample {
                lambda: lam,
                y,
                ratio: lhs * (1.0 + y.abs()).powf(eta),
            });
        }
    }
    let ratio = samples.iter().fold(0.0f64, |m, s| m.max(s.ratio));
    Ok(ConvBound {
        ratio,
        samples,
        cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(r: f64) -> f64 {
        (4.0 * PI).powf(-0.5) * (-r * r / 4.0).exp()
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-14);
        assert!((bessel_j0(2.404825557695773)).abs() < 1e-14);
        assert!((bessel_j0(30.0) - (-0.08636798358104)).abs() < 1e-12);
    }

    #[test]
    fn heat_kernel_oracle() {
        let radii: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let t = kernel_profile(1.0, 1, &radii).unwrap();
        for (r, v) in radii.iter().zip(&t.values) {
            assert!((v - gauss(*r)).abs() < 1e-12, "r = {r}");
        }
        assert!((t.values[10] - 0.103777).abs() < 1e-6);
    }

    #[test]
    fn heat_kernel_higher_dims() {
        for n in [2usize, 3] {
            let t = kernel_profile(1.0, n, &[0.0, 1.0, 3.0]).unwrap();
            for (r, v) in t.radii.iter().zip(&t.values) {
                let want = (4.0 * PI).powf(-(n as f64) / 2.0) * (-r * r / 4.0).exp();
                assert!((v - want).abs() < 1e-11, "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn biharmonic_origin() {
        let t = kernel_profile(2.0, 1, &[0.0]).unwrap();
        assert!((t.values[0] - 0.28851686930823484).abs() < 1e-12);
    }

    #[test]
    fn sign_examples() {
        let radii: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let (min, neg) = sign_analysis(&kernel_profile(1.0, 1, &radii).unwrap());
        assert!(neg.is_none() && min > 0.0);
        let (_, neg) = sign_analysis(&kernel_profile(0.5, 1, &radii).unwrap());
        assert!(neg.is_none());
        let (min, neg) = sign_analysis(&kernel_profile(2.0, 1, &radii).unwrap());
        assert!(min < -1e-6);
        let r0 = neg.unwrap();
        assert!(r0 > 3.0 && r0 < 4.0, "{r0}");
    }

    #[test]
    fn cauchy_kernel_for_half_order() {
        // m = 1/2 gives the Poisson kernel 1/(π(1+r²))
        let t = kernel_profile(0.5, 1, &[0.0, 1.0, 5.0]).unwrap();
        for (r, v) in t.radii.iter().zip(&t.values) {
            assert!((v - 1.0 / (PI * (1.0 + r * r))).abs() < 1e-10);
        }
    }

    #[test]
    fn envelope_matches_real_part() {
        let radii: Vec<f64> = (1..20).map(|i| i as f64 * 0.4).collect();
        let g = kernel_profile(2.0, 1, &radii).unwrap();
        let e = envelope_profile(2.0, &radii).unwrap();
        for (a, b) in g.values.iter().zip(&e.values) {
            assert!(a.abs() <= b + 1e-14);
        }
        assert!(envelope_profile(3.0, &radii).is_err());
    }

    #[test]
    fn gaussian_decay_fits() {
        let radii: Vec<f64> = (0..=60).map(|i| 2.0 + i as f64 * 0.1).collect();
        let t = kernel_profile(1.0, 1, &radii).unwrap();
        let free = decay_fit(&t, 2.0, 8.0, None).unwrap();
        assert!((free.exponent - 2.0).abs() < 0.05, "{free:?}");
        let pinned = decay_fit(&t, 2.0, 8.0, Some(2.0)).unwrap();
        assert!(pinned.residual < 1e-3);
        assert!((pinned.rate - 0.25).abs() < 1e-6);
        assert!(decay_fit(&t, 100.0, 200.0, None).is_err());
    }

    #[test]
    fn conv_bound_is_stable() {
        let c = conv_bound_ratio(1.0, 1, 3.0, &[0.1, 1.0, 2.0], &[20.0, 40.0]).unwrap();
        for lam in [0.1, 1.0, 2.0] {
            let at = |y: f64| c.samples.iter().find(|s| s.lambda == lam && s.y == y).unwrap().ratio;
            assert!((at(40.0) / at(20.0) - 1.0).abs() < 0.1);
        }
        // eta = 0 gives the L1 norm (= 1 for the positive heat kernel)
        let c = conv_bound_ratio(1.0, 1, 0.0, &[1.0], &[0.0, 5.0, 30.0]).unwrap();
        for s in &c.samples {
            assert!((s.ratio - 1.0).abs() < 1e-8);
        }
        // y = 0 is dominated by the total mass
        let c = conv_bound_ratio(1.0, 1, 3.0, &[1.0], &[0.0]).unwrap();
        assert!(c.ratio <= 1.0);
        assert!(conv_bound_ratio(1.0, 1, 3.0, &[3.0], &[0.0]).is_err());
    }
}
