//! Rearrangement-invariant norms of gridded fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemSpec;
use crate::quad;
use crate::spectral::Field;

/// Decreasing rearrangement of a simple function: `f*(s) = values[k]` on
/// `[ends[k-1], ends[k])` (with `ends[-1] = 0`) and zero beyond the last end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRearrangement {
    pub ends: Vec<f64>,
    pub values: Vec<f64>,
}

/// Lorentz exponents; `q = f64::INFINITY` selects the weak norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzExponents {
    pub p: f64,
    pub q: f64,
}

impl StepRearrangement {
    /// Rearrange cell values, each carrying measure `cell`.
    pub fn from_values(values: &[f64], cell: f64) -> StepRearrangement {
        let mut v: Vec<f64> = values.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        v.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut ends = Vec::new();
        let mut vals = Vec::new();
        let mut count = 0usize;
        for (i, &x) in v.iter().enumerate() {
            count += 1;
            if i + 1 == v.len() || v[i + 1] != x {
                ends.push(count as f64 * cell);
                vals.push(x);
            }
        }
        StepRearrangement { ends, values: vals }
    }

    pub fn support(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    fn start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.ends[k - 1]
        }
    }

    /// Running integrals of `f*` at each end.
    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        (0..self.values.len())
            .map(|k| {
                acc += self.values[k] * (self.ends[k] - self.start(k));
                acc
            })
            .collect()
    }

    /// `|{f* > lambda}|`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        let j = self.values.partition_point(|&v| v > lambda);
        if j == 0 {
            0.0
        } else {
            self.ends[j - 1]
        }
    }

    /// `f**(s) = (1/s) ∫_0^s f*`.
    pub fn maximal(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("f** needs s > 0, got {s}")));
        }
        let cum = self.cumulative();
        let k = self.ends.partition_point(|&e| e <= s);
        let integral = if k == self.values.len() {
            cum.last().copied().unwrap_or(0.0)
        } else {
            let before = if k == 0 { 0.0 } else { cum[k - 1] };
            before + self.values[k] * (s - self.start(k))
        };
        Ok(integral / s)
    }

    /// `sup_k v_k s_k^{1/p}`.
    pub fn weak_quasinorm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.ends)
            .fold(0.0, |m, (&v, &s)| m.max(v * s.powf(1.0 / p)))
    }

    /// The `f**`-based Lorentz norm.
    pub fn lorentz_norm(&self, e: LorentzExponents) -> Result<f64> {
        let LorentzExponents { p, q } = e;
        if !(p > 1.0) {
            return Err(Error::Domain(format!("Lorentz norm needs p > 1, got {p}")));
        }
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("Lorentz norm needs q >= 1, got {q}")));
        }
        if self.values.is_empty() {
            return Ok(0.0);
        }
        let cum = self.cumulative();
        if q.is_infinite() {
            // on each piece s^{1/p}(c/s + v) has only an interior minimum
            return Ok(self
                .ends
                .iter()
                .zip(&cum)
                .fold(0.0, |m, (&s, &c)| m.max(c * s.powf(1.0 / p - 1.0))));
        }
        let mut total = 0.0;
        for k in 0..self.values.len() {
            let v = self.values[k];
            let (a, b) = (self.start(k), self.ends[k]);
            if k == 0 {
                total += v.powf(q) * b.powf(q / p) * p / q;
                continue;
            }
            let c = cum[k - 1] - v * a;
            // substitute s = e^y to tame the wide dynamic range of s
            let g = |y: f64| {
                let s = y.exp();
                (s.powf(1.0 / p) * (c / s + v)).powf(q)
            };
            let r = quad::integrate(g, a.ln(), b.ln(), 0.0, 1e-10)?;
            total += r.value;
        }
        let m = *cum.last().unwrap();
        let sk = self.support();
        let expo = q * (1.0 / p - 1.0);
        if expo >= 0.0 {
            return Err(Error::Divergent("tail of the Lorentz integral".into()));
        }
        total += m.powf(q) * sk.powf(expo) / (-expo);
        if !total.is_finite() {
            return Err(Error::Divergent("Lorentz integral overflow".into()));
        }
        Ok(total.powf(1.0 / q))
    }
}

pub fn rearrange(f: &Field) -> StepRearrangement {
    StepRearrangement::from_values(&f.data, f.grid.cell_measure())
}

pub fn distribution(r: &StepRearrangement, lambda: f64) -> f64 {
    r.distribution(lambda)
}

pub fn maximal_fn(r: &StepRearrangement, s: f64) -> Result<f64> {
    r.maximal(s)
}

pub fn lorentz_norm(r: &StepRearrangement, e: LorentzExponents) -> Result<f64> {
    r.lorentz_norm(e)
}

pub fn weak_quasinorm(r: &StepRearrangement, p: f64) -> f64 {
    r.weak_quasinorm(p)
}

/// Measure of `{|f| > lambda}` straight from the cells.
pub fn field_distribution(f: &Field, lambda: f64) -> f64 {
    f.data.iter().filter(|v| v.abs() > lambda).count() as f64 * f.grid.cell_measure()
}

/// Strong `L^q` norm.
pub fn lebesgue_norm(f: &Field, q: f64) -> f64 {
    if q.is_infinite() {
        return f.sup();
    }
    (f.data.iter().map(|v| v.abs().powf(q)).sum::<f64>() * f.grid.cell_measure()).powf(1.0 / q)
}

/// `max (1+|x|)^{-alpha/(p-1)} |f(x)|`.
///
/// Returns the norm and whether `alpha >= 0` (where the weight does not decay).
pub fn lambda_norm(f: &Field, spec: &ProblemSpec) -> (f64, bool) {
    let e = -spec.alpha / (spec.p - 1.0);
    let v = f
        .grid
        .radii()
        .iter()
        .zip(&f.data)
        .fold(0.0f64, |m, (&r, &u)| m.max((1.0 + r).powf(e) * u.abs()));
    (v, spec.alpha >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::FKind;
    use crate::spectral::Grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn step321() -> StepRearrangement {
        StepRearrangement::from_values(&[3.0, 1.0, 2.0], 1.0)
    }

    fn indicator(v: f64) -> StepRearrangement {
        StepRearrangement { ends: vec![v], values: vec![1.0] }
    }

    #[test]
    fn rearrange_examples() {
        let r = step321();
        assert_eq!(r.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(r.ends, vec![1.0, 2.0, 3.0]);
        let c = StepRearrangement::from_values(&[2.0; 5], 0.5);
        assert_eq!(c.values, vec![2.0]);
        assert_eq!(c.ends, vec![2.5]);
        let i = StepRearrangement::from_values(&[0.0, 1.0, 1.0, 0.0], 2.0);
        assert_eq!((i.values.clone(), i.ends.clone()), (vec![1.0], vec![4.0]));
    }

    #[test]
    fn distribution_examples() {
        let r = step321();
        assert_eq!(r.distribution(1.5), 2.0);
        assert_eq!(r.distribution(0.0), 3.0);
        assert_eq!(r.distribution(3.0), 0.0);
        assert_eq!(r.distribution(7.0), 0.0);
    }

    #[test]
    fn maximal_examples() {
        let i = indicator(4.0);
        assert_relative_eq!(i.maximal(8.0).unwrap(), 0.5);
        assert_relative_eq!(i.maximal(4.0).unwrap(), 1.0);
        assert_relative_eq!(i.maximal(1.0).unwrap(), 1.0);
        assert_relative_eq!(step321().maximal(2.0).unwrap(), 2.5);
        assert!(i.maximal(0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let i = indicator(16.0);
        let e = LorentzExponents { p: 2.0, q: f64::INFINITY };
        assert_relative_eq!(i.lorentz_norm(e).unwrap(), 4.0);
        assert_relative_eq!(i.weak_quasinorm(2.0), 4.0);
        assert_relative_eq!(step321().weak_quasinorm(2.0), 3.0);
        let z = StepRearrangement::from_values(&[0.0; 4], 1.0);
        assert_eq!(z.lorentz_norm(e).unwrap(), 0.0);
        assert_eq!(z.lorentz_norm(LorentzExponents { p: 2.0, q: 3.0 }).unwrap(), 0.0);
        assert!(i.lorentz_norm(LorentzExponents { p: 1.0, q: 2.0 }).is_err());
    }

    #[test]
    fn finite_q_indicator_closed_form() {
        // f** = 1 on [0,V], V/s after: integral = V^{q/p} (p/q + 1/(q(1-1/p)))
        let (v, p, q) = (3.0f64, 2.0f64, 3.0f64);
        let want = (v.powf(q / p) * (p / q + 1.0 / (q * (1.0 - 1.0 / p)))).powf(1.0 / q);
        let got = indicator(v).lorentz_norm(LorentzExponents { p, q }).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn finite_q_equals_lp_norm_for_p_eq_q_up_to_constant() {
        // for q = p, ||f||_{p,p} lies between ||f||_p and p' ||f||_p
        let r = step321();
        let lp = 14f64.sqrt();
        let v = r.lorentz_norm(LorentzExponents { p: 2.0, q: 2.0 }).unwrap();
        assert!(v >= lp && v <= 2.0 * lp);
    }

    #[test]
    fn lambda_examples() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let s = ProblemSpec::new(1, 1.0, -1.0, 2.0, FKind::Unsigned).unwrap();
        let inv = Field::radial(g, |r| (1.0 + r).powf(-1.0));
        let (v, flagged) = lambda_norm(&inv, &s);
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        assert!(!flagged);
        assert_eq!(lambda_norm(&Field::zeros(g), &s).0, 0.0);
        // a constant is amplified by the growing weight, largest at the box corner
        let (v, _) = lambda_norm(&Field::radial(g, |_| 1.0), &s);
        assert_relative_eq!(v, 11.0);
    }

    #[test]
    fn power_law_weak_norm_converges() {
        let mut errs = Vec::new();
        for &n in &[1024usize, 4096, 16384] {
            let g = Grid::new(1, n, 50.0).unwrap();
            let (f, _) = crate::spectral::homogeneous_data(g, 1.0, 0.5, 0.0).unwrap();
            let v = rearrange(&f).lorentz_norm(LorentzExponents { p: 2.0, q: f64::INFINITY }).unwrap();
            errs.push((v - 2.0 * 2f64.sqrt()).abs() / (2.0 * 2f64.sqrt()));
        }
        assert!(errs[1] < 0.02, "{errs:?}");
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn scaling_law() {
        // f(2x) on a grid with half the spacing has half the measure per level set
        let g = Grid::new(1, 256, 8.0).unwrap();
        let g2 = Grid::new(1, 256, 4.0).unwrap();
        let prof = |r: f64| (-r * r / 9.0).exp() * (2.0 + (3.0 * r).cos());
        let a = rearrange(&Field::radial(g, prof)).weak_quasinorm(2.0);
        let b = rearrange(&Field::radial(g2, |r| prof(2.0 * r))).weak_quasinorm(2.0);
        assert!((b - a * 2f64.powf(-0.5)).abs() <= 1e-12 * a);
    }

    fn random_values(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                if rng.random_bool(0.2) { 0.0 } else { x.powi(3) * 10.0 }
            })
            .collect()
    }

    proptest! {
        #[test]
        fn equimeasurable(seed in 0u64..10_000, lam in 0.0f64..10.0) {
            let g = Grid::new(1, 128, 3.0).unwrap();
            let f = Field::from_vec(g, random_values(seed, 128)).unwrap();
            let r = rearrange(&f);
            prop_assert_eq!(r.distribution(lam), field_distribution(&f, lam));
            for &v in &r.values {
                prop_assert_eq!(r.distribution(v), field_distribution(&f, v));
            }
        }

        #[test]
        fn sandwich(seed in 0u64..10_000, pi in 0usize..3) {
            let p = [1.5, 2.0, 6.0][pi];
            let r = StepRearrangement::from_values(&random_values(seed, 200), 0.1);
            let w = r.weak_quasinorm(p);
            let s = r.lorentz_norm(LorentzExponents { p, q: f64::INFINITY }).unwrap();
            prop_assert!(w <= s * (1.0 + 1e-14));
            prop_assert!(s <= p / (p - 1.0) * w * (1.0 + 1e-14));
        }

        #[test]
        fn subadditive(seed in 0u64..10_000) {
            let a = random_values(seed, 100);
            let b = random_values(seed + 77_777, 100);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let e = LorentzExponents { p: 2.5, q: f64::INFINITY };
            let n = |v: &[f64]| StepRearrangement::from_values(v, 0.3).lorentz_norm(e).unwrap();
            prop_assert!(n(&sum) <= (n(&a) + n(&b)) * (1.0 + 1e-13));
        }

        #[test]
        fn power_identity(seed in 0u64..10_000, l in 2i32..4, p in 1.2f64..5.0) {
            let v = random_values(seed, 64);
            let pw: Vec<f64> = v.iter().map(|x| x.abs().powi(l)).collect();
            let lhs = StepRearrangement::from_values(&pw, 0.25).weak_quasinorm(p);
            let rhs = StepRearrangement::from_values(&v, 0.25).weak_quasinorm(l as f64 * p).powi(l);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn maximal_is_nonincreasing_and_dominates(seed in 0u64..10_000, s in 0.01f64..30.0) {
            let r = StepRearrangement::from_values(&random_values(seed, 50), 0.5);
            prop_assume!(!r.values.is_empty());
            let a = r.maximal(s).unwrap();
            let b = r.maximal(s * 1.3).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-14));
            let fs = {
                let k = r.ends.partition_point(|&e| e <= s);
                if k < r.values.len() { r.values[k] } else { 0.0 }
            };
            prop_assert!(a >= fs * (1.0 - 1e-14));
        }
    }
}
