//! Periodic grids, fields, Fourier transforms and multipliers.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)^n` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub points: usize,
    pub extent: f64,
}

impl Grid {
    pub fn new(n: usize, points: usize, extent: f64) -> Result<Grid> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!("grid dimension {n} not in 1..=3")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("points = {points} is not a power of two")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidParameter(format!("extent = {extent} must be positive")));
        }
        Ok(Grid { n, points, extent })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    /// Coordinate of index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.h()
    }

    /// Per-axis indices of a flat (row-major) index.
    #[inline]
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.n).rev() {
            out[a] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn ravel(&self, ix: &[usize]) -> usize {
        ix.iter().take(self.n).fold(0, |acc, &i| acc * self.points + i)
    }

    /// Coordinates of a flat index (unused axes are zero).
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ix = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.coord(ix[a]);
        }
        x
    }

    /// Minimum-image radius of every cell.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let x = self.point(i);
                (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
            })
            .collect()
    }

    /// Flat index of the origin.
    pub fn origin(&self) -> usize {
        self.ravel(&[self.points / 2; 3])
    }

    /// Signed integer wavenumber of FFT index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }
}

/// Real samples on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Field {
        Field {
            data: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Field { grid, data })
    }

    /// Sample `f(x)` at every cell; `x` has `n` entries.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Field {
        let data = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.n]))
            .collect();
        Field { grid, data }
    }

    /// Radial profile `f(|x|)`.
    pub fn radial(grid: Grid, f: impl Fn(f64) -> f64) -> Field {
        let data = grid.radii().into_iter().map(f).collect();
        Field { grid, data }
    }

    pub fn sup(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Cell sum times cell measure.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_measure()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |a - b|`.
    pub fn sup_dist(&self, other: &Field) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Fourier coefficients of a real field (unnormalised forward DFT).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub coeffs: Vec<Complex64>,
}

/// FFT plans and wavenumber tables for one grid.
pub struct Spectral {
    pub grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    xi2: Vec<f64>,
    kabs: Vec<usize>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Spectral {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.points);
        let inv = planner.plan_fft_inverse(grid.points);
        let scale = std::f64::consts::PI / grid.extent;
        let mut xi2 = Vec::with_capacity(grid.len());
        let mut kabs = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let ix = grid.unravel(idx);
            let mut s = 0.0;
            let mut km = 0;
            for &i in ix.iter().take(grid.n) {
                let k = grid.wavenumber(i);
                let xi = scale * k as f64;
                s += xi * xi;
                km = km.max(k.unsigned_abs() as usize);
            }
            xi2.push(s);
            kabs.push(km);
        }
        Spectral {
            grid,
            fwd,
            inv,
            xi2,
            kabs,
        }
    }

    /// `|xi|^2` per mode.
    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }

    /// `|xi|^{2m}` per mode.
    pub fn symbol(&self, m: f64) -> Vec<f64> {
        self.xi2.iter().map(|&s| if s == 0.0 { 0.0 } else { s.powf(m) }).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        plan.process_with_scratch(buf, &mut scratch);
        if self.grid.n == 1 {
            return;
        }
        let mut line = vec![Complex64::default(); n];
        let total = buf.len();
        for axis in 0..self.grid.n - 1 {
            let stride = n.pow((self.grid.n - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = buf[start + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, l) in line.iter().enumerate() {
                        buf[start + j * stride] = *l;
                    }
                }
            }
        }
    }

    pub fn forward_into(&self, data: &[f64], out: &mut [Complex64]) {
        for (o, &d) in out.iter_mut().zip(data) {
            *o = Complex64::new(d, 0.0);
        }
        self.transform(out, &self.fwd);
    }

    /// Inverse transform; `buf` is used as workspace.
    pub fn inverse_into(&self, buf: &mut [Complex64], out: &mut [f64]) {
        self.transform(buf, &self.inv);
        let s = 1.0 / self.grid.len() as f64;
        for (o, c) in out.iter_mut().zip(buf.iter()) {
            *o = c.re * s;
        }
    }

    pub fn forward(&self, f: &Field) -> SpectralField {
        let mut coeffs = vec![Complex64::default(); self.grid.len()];
        self.forward_into(&f.data, &mut coeffs);
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn inverse(&self, s: &SpectralField) -> Field {
        let mut buf = s.coeffs.clone();
        let mut data = vec![0.0; self.grid.len()];
        self.inverse_into(&mut buf, &mut data);
        Field {
            grid: self.grid,
            data,
        }
    }

    /// Multiply the spectrum of `f` by `mult(|xi|^2)`.
    pub fn apply(&self, f: &Field, mult: impl Fn(f64) -> f64) -> Field {
        let mut s = self.forward(f);
        for (c, &x) in s.coeffs.iter_mut().zip(&self.xi2) {
            *c *= mult(x);
        }
        self.inverse(&s)
    }

    /// `e^{-t(-Δ)^m} f`.
    pub fn semigroup(&self, f: &Field, t: f64, m: f64) -> Result<Field> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        Ok(self.apply(f, |x2| if x2 == 0.0 { 1.0 } else { (-t * x2.powf(m)).exp() }))
    }

    /// `φ_k(-t(-Δ)^m) f`.
    pub fn phi(&self, f: &Field, t: f64, m: f64, k: u8) -> Result<Field> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("phi requires t > 0, got {t}")));
        }
        let phik = match k {
            1 => phi1,
            2 => phi2,
            _ => return Err(Error::InvalidParameter(format!("phi order {k}"))),
        };
        Ok(self.apply(f, |x2| phik(-t * if x2 == 0.0 { 0.0 } else { x2.powf(m) })))
    }

    /// `(-Δ)^m f`.
    pub fn fractional_laplacian(&self, f: &Field, m: f64) -> Field {
        self.apply(f, |x2| if x2 == 0.0 { 0.0 } else { x2.powf(m) })
    }

    /// Zero every mode with some `|k| > N/3`.
    pub fn dealias(&self, s: &mut SpectralField) {
        self.dealias_coeffs(&mut s.coeffs);
    }

    pub fn dealias_coeffs(&self, c: &mut [Complex64]) {
        let n = self.grid.points;
        for (v, &k) in c.iter_mut().zip(&self.kabs) {
            if 3 * k > n {
                *v = Complex64::default();
            }
        }
    }

    /// Mask of retained modes under the two-thirds rule.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let n = self.grid.points;
        self.kabs.iter().map(|&k| 3 * k <= n).collect()
    }
}

pub fn to_spectral(f: &Field) -> SpectralField {
    Spectral::new(f.grid).forward(f)
}

pub fn from_spectral(s: &SpectralField) -> Field {
    Spectral::new(s.grid).inverse(s)
}

pub fn semigroup_apply(f: &Field, t: f64, m: f64) -> Result<Field> {
    Spectral::new(f.grid).semigroup(f, t, m)
}

pub fn phi_apply(f: &Field, t: f64, m: f64, k: u8) -> Result<Field> {
    Spectral::new(f.grid).phi(f, t, m, k)
}

pub fn dealias(mut s: SpectralField) -> SpectralField {
    Spectral::new(s.grid).dealias(&mut s);
    s
}

const SERIES_TERMS: i32 = 24;

/// `φ1(z) = (e^z - 1)/z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1.0 {
        series(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// `φ2(z) = (e^z - 1 - z)/z^2`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 1.0 {
        series(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `sum_j z^j / (j+k)!`
fn series(z: f64, k: i32) -> f64 {
    let mut coef = 1.0;
    for j in 1..=k {
        coef /= j as f64;
    }
    let mut terms = [0.0; SERIES_TERMS as usize];
    let mut c = coef;
    for (j, t) in terms.iter_mut().enumerate() {
        *t = c;
        c /= (j as i32 + 1 + k) as f64;
    }
    terms.iter().rev().fold(0.0, |acc, &t| acc * z + t)
}

/// `(r^2 + eps^2)^{-alpha/2}`.
pub fn singular_weight(grid: Grid, alpha: f64, eps: f64) -> Result<Field> {
    if eps < 0.0 {
        return Err(Error::InvalidParameter(format!("eps = {eps} < 0")));
    }
    if alpha > 0.0 && eps == 0.0 {
        return Err(Error::Domain("alpha > 0 needs eps > 0 at the origin cell".into()));
    }
    if alpha == 0.0 {
        return Ok(Field {
            grid,
            data: vec![1.0; grid.len()],
        });
    }
    Ok(Field::radial(grid, |r| (r * r + eps * eps).powf(-alpha / 2.0)))
}

/// Regularization length for which the origin cell of `|x|^{-gamma}` equals its 1-D cell mean.
pub fn cell_mean_eps(grid: Grid, gamma: f64) -> f64 {
    0.5 * grid.h() * (1.0 - gamma).powf(1.0 / gamma)
}

/// Homogeneous data `eps0 (r^2 + eps^2)^{-gamma/2}`.
///
/// Returns the field and whether the origin had to be regularised with `eps = h/2`.
pub fn homogeneous_data(grid: Grid, eps0: f64, gamma: f64, eps: f64) -> Result<(Field, bool)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let mut f = Field::radial(grid, |r| eps0 * (r * r + eps * eps).powf(-gamma / 2.0));
    let warned = eps == 0.0;
    if warned {
        let e = grid.h() / 2.0;
        f.data[grid.origin()] = eps0 * e.powf(-gamma);
    }
    Ok((f, warned))
}

/// Exact power law off the origin, with the origin cell set to the 1-D cell mean.
pub fn homogeneous_data_cell_mean(grid: Grid, eps0: f64, gamma: f64) -> Result<Field> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("cell mean needs 0 < gamma < 1, got {gamma}")));
    }
    let e = cell_mean_eps(grid, gamma);
    Ok(Field::radial(grid, |r| eps0 * if r == 0.0 { e } else { r }.powf(-gamma)))
}

/// Sidecar header of a field snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format: String,
    pub n: usize,
    pub points: usize,
    pub extent: f64,
    pub time: f64,
}

pub const SNAPSHOT_FORMAT: &str = "hh-field-v1";

/// Write `<base>.bin` (little-endian f64 raster) and `<base>.toml`.
pub fn write_snapshot(base: &Path, f: &Field, time: f64) -> Result<()> {
    let hdr = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        n: f.grid.n,
        points: f.grid.points,
        extent: f.grid.extent,
        time,
    };
    let mut bytes = Vec::with_capacity(8 * f.data.len());
    for v in &f.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(base.with_extension("bin"), bytes)?;
    let text = toml::to_string(&hdr).map_err(|e| Error::config("snapshot", e.to_string()))?;
    std::fs::write(base.with_extension("toml"), text)?;
    Ok(())
}

/// Read a snapshot written by [`write_snapshot`]; `path` may name either file.
pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let text = std::fs::read_to_string(path.with_extension("toml"))?;
    let hdr: SnapshotHeader =
        toml::from_str(&text).map_err(|e| Error::config("snapshot header", e.to_string()))?;
    if hdr.format != SNAPSHOT_FORMAT {
        return Err(Error::config("format", format!("unsupported version {}", hdr.format)));
    }
    let grid = Grid::new(hdr.n, hdr.points, hdr.extent)?;
    let bytes = std::fs::read(path.with_extension("bin"))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: bytes.len() / 8,
        });
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((Field { grid, data }, hdr.time))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn g1(n: usize, l: f64) -> Grid {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let g = g1(16, 3.0);
        let s = to_spectral(&Field::radial(g, |_| 2.5));
        assert!((s.coeffs[0].re - 40.0).abs() < 1e-12);
        assert!(s.coeffs[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cosine_mode() {
        let g = g1(32, 4.0);
        let f = Field::from_fn(g, |x| (std::f64::consts::PI * x[0] / 4.0).cos());
        let s = to_spectral(&f);
        for (i, c) in s.coeffs.iter().enumerate() {
            if i == 1 || i == 31 {
                assert!((c.norm() - 16.0).abs() < 1e-10);
            } else {
                assert!(c.norm() < 1e-10);
            }
        }
        assert!((s.coeffs[1] - s.coeffs[31].conj()).norm() < 1e-12);
    }

    #[test]
    fn roundtrip_random_3d() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = Field::from_fn(g, |_| rng.random_range(-1.0..1.0));
        let back = from_spectral(&to_spectral(&f));
        assert!(back.sup_dist(&f) <= 1e-12 * f.sup());
    }

    #[test]
    fn size_mismatch() {
        assert!(Field::from_vec(g1(8, 1.0), vec![0.0; 7]).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
    }

    #[test]
    fn gaussian_heat_oracle() {
        let g = g1(512, 20.0);
        let f = Field::radial(g, |r| (-r * r / 4.0).exp());
        let u = semigroup_apply(&f, 1.0, 1.0).unwrap();
        assert!((u.data[g.origin()] - 0.5f64.sqrt()).abs() < 1e-8);
        assert_eq!(semigroup_apply(&f, 0.0, 1.0).unwrap(), f);
        assert!(semigroup_apply(&f, -1.0, 1.0).is_err());
    }

    #[test]
    fn multiplier_on_single_mode() {
        // |xi| = 2 with L = pi: k = 2
        let g = g1(16, std::f64::consts::PI);
        let f = Field::from_fn(g, |x| (2.0 * x[0]).cos());
        let u = semigroup_apply(&f, 0.25, 1.0).unwrap();
        let i = 3;
        assert!((u.data[i] / f.data[i] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
        assert!((phi1(-1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let z = -1e-6;
        assert!((phi1(z) - z.exp_m1() / z).abs() < 1e-12);
        assert!((phi2(z) - (z.exp_m1() - z) / (z * z)).abs() < 1e-6);
        // continuity across the branch switch
        let (a, b) = (-1.0 + 1e-13, -1.0 - 1e-13);
        assert!((phi1(a) - phi1(b)).abs() < 1e-13);
        assert!((phi2(a) - phi2(b)).abs() < 1e-13);
        assert!((phi2(-1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let g = g1(8, 1.0);
        assert!(phi_apply(&Field::zeros(g), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn weight_examples() {
        let g = g1(8, 4.0);
        let w = singular_weight(g, 1.0, 0.0);
        assert!(w.is_err());
        let w = singular_weight(g, 1.0, 0.1).unwrap();
        assert!((w.data[g.origin()] - 10.0).abs() < 1e-12);
        assert!((w.data[g.origin() + 2] - 0.5).abs() < 1e-3);
        let w = singular_weight(g, -1.0, 0.0).unwrap();
        assert!((w.data[g.origin() + 3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_examples() {
        let g = g1(16, 8.0);
        let (f, warned) = homogeneous_data(g, 1.0, 0.5, 0.0).unwrap();
        assert!(warned);
        assert!((f.data[g.origin() + 4] - 0.5).abs() < 1e-15);
        // value at 2x is 2^{-gamma} times the value at x
        let r = f.data[g.origin() + 4] / f.data[g.origin() + 2];
        assert!((r - 2f64.powf(-0.5)).abs() < 1e-15);
        assert!(f.is_finite());
    }

    #[test]
    fn dealias_examples() {
        let sp = Spectral::new(g1(32, 1.0));
        let mut z = SpectralField { grid: sp.grid, coeffs: vec![Complex64::default(); 32] };
        sp.dealias(&mut z);
        assert!(z.coeffs.iter().all(|c| c.norm() == 0.0));
        let mut s = SpectralField { grid: sp.grid, coeffs: vec![Complex64::default(); 32] };
        s.coeffs[1] = Complex64::new(0.0, -16.0);
        s.coeffs[31] = Complex64::new(0.0, 16.0);
        let before = s.clone();
        sp.dealias(&mut s);
        assert_eq!(s, before);
        let mut s = SpectralField { grid: sp.grid, coeffs: vec![Complex64::default(); 32] };
        s.coeffs[15] = Complex64::new(8.0, 0.0);
        s.coeffs[17] = Complex64::new(8.0, 0.0);
        sp.dealias(&mut s);
        assert!(s.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn snapshot_roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(2, 8, 1.7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = Field::from_fn(g, |_| rng.random::<f64>() * 1e-300 + rng.random::<f64>());
        let base = dir.path().join("snap");
        write_snapshot(&base, &f, 0.1 + 0.2).unwrap();
        let (back, t) = read_snapshot(&base).unwrap();
        assert_eq!(t.to_bits(), (0.1f64 + 0.2).to_bits());
        assert!(back.data.iter().zip(&f.data).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back.grid, g);
    }

    #[test]
    fn radial_symmetry_exact() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let f = Field::radial(g, |r| (-r * r).exp() * (1.0 + r));
        let u = semigroup_apply(&f, 0.3, 0.75).unwrap();
        let n = g.points;
        let mut worst: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                let a = u.data[g.ravel(&[i, j])];
                worst = worst.max((a - u.data[g.ravel(&[j, i])]).abs());
                worst = worst.max((a - u.data[g.ravel(&[n - i, j])]).abs());
            }
        }
        assert!(worst <= 1e-14 * u.sup(), "{worst}");
    }

    fn random_field(seed: u64, g: Grid) -> Field {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(g, |_| rng.random_range(-1.0..1.0))
    }

    proptest! {
        #[test]
        fn semigroup_property(seed in 0u64..1000, s in 0.0f64..1.0, t in 0.0f64..1.0, m in 0.2f64..2.0) {
            let g = g1(64, 5.0);
            let sp = Spectral::new(g);
            let f = random_field(seed, g);
            let a = sp.semigroup(&sp.semigroup(&f, s, m).unwrap(), t, m).unwrap();
            let b = sp.semigroup(&f, s + t, m).unwrap();
            prop_assert!(a.sup_dist(&b) <= 1e-12 * f.sup().max(1e-300));
        }

        #[test]
        fn mass_conserved(seed in 0u64..1000, t in 0.0f64..5.0, m in 0.2f64..2.0) {
            let g = g1(64, 5.0);
            let f = random_field(seed, g);
            let u = semigroup_apply(&f, t, m).unwrap();
            prop_assert!((u.integral() - f.integral()).abs() <= 1e-12 * f.data.iter().map(|v| v.abs()).sum::<f64>());
        }

        #[test]
        fn positivity_for_m_le_one(seed in 0u64..1000, t in 0.01f64..2.0, mi in 0usize..3) {
            let m = [0.25, 0.5, 1.0][mi];
            let g = g1(128, 8.0);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let c: f64 = rng.random_range(-3.0..3.0);
            let f = Field::from_fn(g, |x| (-(x[0] - c).powi(2)).exp());
            let u = semigroup_apply(&f, t, m).unwrap();
            prop_assert!(u.min() >= -1e-12 * f.sup());
        }
    }
}
