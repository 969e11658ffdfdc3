//! Problem specification, critical exponents and hypothesis checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which nonlinearity `F` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FKind {
    /// `F(u) = |u|^{p-1} u`
    Signed,
    /// `F(u) = |u|^p`
    Unsigned,
}

fn default_cf() -> f64 {
    1.0
}

/// The tuple `(n, m, alpha, p, F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub m: f64,
    pub alpha: f64,
    pub p: f64,
    pub f_kind: FKind,
    #[serde(default = "default_cf")]
    pub c_f: f64,
}

impl ProblemSpec {
    /// Validated constructor.
    pub fn new(n: usize, m: f64, alpha: f64, p: f64, f_kind: FKind) -> Result<Self> {
        let s = ProblemSpec {
            n,
            m,
            alpha,
            p,
            f_kind,
            c_f: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::InvalidParameter(format!("n = {} not in 1..=3", self.n)));
        }
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!("m = {} must be positive", self.m)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!("p = {} must exceed 1", self.p)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(())
    }

    /// `F(u)`; exactly zero at `u = 0`.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        let a = u.abs().powf(self.p);
        match self.f_kind {
            FKind::Signed => a.copysign(u),
            FKind::Unsigned => a,
        }
    }

    /// True when `m` is a positive integer.
    pub fn m_is_integer(&self) -> bool {
        self.m.fract() == 0.0
    }

    pub fn exponents(&self) -> Result<DerivedExponents> {
        derive_exponents(self)
    }
}

/// `F(u)` for a spec.
pub fn eval_nonlinearity(spec: &ProblemSpec, u: f64) -> f64 {
    spec.f(u)
}

/// Critical exponents derived from a spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub q_c: f64,
    pub p_f: f64,
    pub gamma: f64,
    /// `2m/(2m-1)`, only for `m > 1/2`.
    pub l_decay: Option<f64>,
    n: usize,
    m: f64,
}

impl DerivedExponents {
    /// `n/(2m) (1/q_c - 1/q)`.
    pub fn delta(&self, q: f64) -> f64 {
        self.n as f64 / (2.0 * self.m) * (1.0 / self.q_c - 1.0 / q)
    }

    pub fn l_decay(&self) -> Result<f64> {
        self.l_decay
            .ok_or_else(|| Error::Degenerate(format!("l_decay undefined for m = {} <= 1/2", self.m)))
    }
}

pub fn derive_exponents(spec: &ProblemSpec) -> Result<DerivedExponents> {
    spec.validate()?;
    let two_m = 2.0 * spec.m;
    let d = two_m - spec.alpha;
    if d == 0.0 {
        return Err(Error::Degenerate("2m = alpha leaves q_c undefined".into()));
    }
    let n = spec.n as f64;
    Ok(DerivedExponents {
        q_c: n * (spec.p - 1.0) / d,
        p_f: 1.0 + d / n,
        gamma: d / (spec.p - 1.0),
        l_decay: (spec.m > 0.5).then(|| two_m / (two_m - 1.0)),
        n: spec.n,
        m: spec.m,
    })
}

/// Exponent of `R` in the rescaled test function bound.
pub fn fujita_bound_exponent(spec: &ProblemSpec) -> f64 {
    let (n, m, a, p) = (spec.n as f64, spec.m, spec.alpha, spec.p);
    n / (2.0 * m) + a / (2.0 * m * (p - 1.0)) - 1.0 / (p - 1.0)
}

/// One hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub holds: bool,
    /// Smallest slack over the strict inequalities involved; negative when violated.
    pub margin: f64,
    pub reason: String,
}

impl Flag {
    fn from_conds(conds: &[(&str, f64, f64)]) -> Flag {
        // each condition reads `lo < hi`
        let mut margin = f64::INFINITY;
        let mut failed = Vec::new();
        for &(label, lo, hi) in conds {
            let slack = hi - lo;
            let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
            margin = margin.min(slack);
            if !(lo < hi) {
                failed.push(label);
            }
        }
        let holds = failed.is_empty();
        let reason = if holds {
            let all: Vec<&str> = conds.iter().map(|c| c.0).collect();
            format!("holds: {}", all.join(", "))
        } else {
            format!("fails: {}", failed.join(", "))
        };
        Flag {
            holds,
            margin,
            reason,
        }
    }

    fn fail(reason: &str) -> Flag {
        Flag {
            holds: false,
            margin: f64::NEG_INFINITY,
            reason: format!("fails: {reason}"),
        }
    }
}

/// Which existence/uniqueness statements cover a spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub local_lambda: Flag,
    pub global_b1: Flag,
    pub global_b2: Option<Flag>,
    pub global_b3: Option<Flag>,
    pub uniqueness: Flag,
    pub decay_gwp: Flag,
    pub nonexistence: Flag,
}

pub fn regime_check(spec: &ProblemSpec, r: Option<f64>, q: Option<f64>) -> RegimeReport {
    let (n, m, a, p) = (spec.n as f64, spec.m, spec.alpha, spec.p);
    let two_m = 2.0 * m;
    let d = two_m - a;
    let q_c = n * (p - 1.0) / d;
    let p_f = 1.0 + d / n;
    let b1_lo = (n - a) / (n - two_m);

    let b1_conds = [
        ("0 < alpha", 0.0, a),
        ("alpha < 2m", a, two_m),
        ("2m < n", two_m, n),
        ("(n-alpha)/(n-2m) < p", b1_lo, p),
    ];
    let global_b1 = Flag::from_conds(&b1_conds);

    let global_b2 = r.map(|r| {
        let rp = r / (r - 1.0);
        let mut c = b1_conds.to_vec();
        c.push(("1 < r'", 1.0, rp));
        c.push(("r' < n/(2m-alpha)", rp, n / d));
        Flag::from_conds(&c)
    });

    let global_b3 = q.map(|q| {
        let q_hi = n * p * (p - 1.0) / (two_m - a * p);
        let q_hi = if two_m - a * p > 0.0 { q_hi } else { f64::INFINITY };
        Flag::from_conds(&[
            ("0 < alpha", 0.0, a),
            ("alpha < 2m", a, two_m),
            ("2m < n", two_m, n),
            ("0 < 2m+alpha", 0.0, two_m + a),
            ("2m+alpha < n", two_m + a, n),
            ("(n-alpha)/(n-2m) < p", b1_lo, p),
            ("p < 2m/alpha", p, two_m / a),
            ("q_c < q", q_c, q),
            ("q < np(p-1)/(2m-alpha p)", q, q_hi),
        ])
    });

    let uniqueness = Flag::from_conds(&b1_conds);

    let decay_gwp = Flag::from_conds(&[
        ("0 < alpha", 0.0, a),
        ("alpha < min(2m,n)", a, two_m.min(n)),
        ("q_c > 1", 1.0, q_c),
    ]);

    let nonexistence = if !spec.m_is_integer() {
        Flag::fail("m is not an integer")
    } else if spec.f_kind != FKind::Unsigned {
        Flag::fail("F is not |u|^p")
    } else {
        Flag::from_conds(&[
            ("0 < alpha", 0.0, a),
            ("alpha < min(n,2m)", a, n.min(two_m)),
            ("1 < p", 1.0, p),
            ("p < p_F", p, p_f),
        ])
    };

    let local_lambda = Flag::from_conds(&[("alpha < 0", a, 0.0)]);

    RegimeReport {
        local_lambda,
        global_b1,
        global_b2,
        global_b3,
        uniqueness,
        decay_gwp,
        nonexistence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(n: usize, m: f64, a: f64, p: f64) -> ProblemSpec {
        ProblemSpec::new(n, m, a, p, FKind::Unsigned).unwrap()
    }

    #[test]
    fn exponents_examples() {
        let e = spec(3, 1.0, 1.0, 3.0).exponents().unwrap();
        assert_relative_eq!(e.q_c, 6.0);
        assert_relative_eq!(e.p_f, 4.0 / 3.0);
        assert_relative_eq!(e.delta(12.0), 0.125);
        let e = spec(1, 0.25, 0.0, 2.0).exponents().unwrap();
        assert_relative_eq!(e.q_c, 2.0);
        assert_relative_eq!(e.p_f, 1.5);
        assert_relative_eq!(e.gamma, 0.5);
        assert!(e.l_decay().is_err());
        assert!(spec(1, 0.5, 1.0, 2.0).exponents().is_err());
        assert_relative_eq!(spec(1, 2.0, 0.0, 2.0).exponents().unwrap().l_decay().unwrap(), 4.0 / 3.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(ProblemSpec::new(0, 1.0, 0.0, 2.0, FKind::Signed).is_err());
        assert!(ProblemSpec::new(1, 0.0, 0.0, 2.0, FKind::Signed).is_err());
        assert!(ProblemSpec::new(1, 1.0, 0.0, 1.0, FKind::Signed).is_err());
    }

    #[test]
    fn regime_examples() {
        let r = regime_check(&spec(3, 1.0, 1.0, 3.0), None, Some(7.0));
        assert!(r.global_b1.holds);
        assert!(!r.global_b3.unwrap().holds);
        assert!(r.uniqueness.holds);
        let r = regime_check(&spec(3, 1.0, 1.0, 1.2), None, None);
        assert!(r.nonexistence.holds);
        assert!(!r.decay_gwp.holds);
        let r = regime_check(&spec(1, 1.0, -1.0, 2.0), None, None);
        assert!(r.local_lambda.holds);
        assert!(!r.global_b1.holds);
    }

    #[test]
    fn boundary_is_excluded() {
        // p_f = 4/3 exactly
        let s = spec(3, 1.0, 1.0, 4.0 / 3.0);
        let r = regime_check(&s, None, None);
        assert!(!r.nonexistence.holds);
        assert!(r.nonexistence.margin.abs() < 1e-12);
    }

    #[test]
    fn nonlinearity_examples() {
        let mut s = ProblemSpec::new(1, 1.0, 0.0, 3.0, FKind::Signed).unwrap();
        assert_eq!(s.f(-2.0), -8.0);
        assert_eq!(s.f(0.0), 0.0);
        s.f_kind = FKind::Unsigned;
        assert_eq!(s.f(-2.0), 8.0);
        assert_eq!(s.f(0.0), 0.0);
    }

    #[test]
    fn lipschitz_envelope() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for &p in &[1.2, 2.0, 3.0] {
            for kind in [FKind::Signed, FKind::Unsigned] {
                let s = ProblemSpec::new(1, 1.0, 0.0, p, kind).unwrap();
                for _ in 0..10_000 {
                    let a: f64 = rng.random_range(-10.0..10.0);
                    let b: f64 = rng.random_range(-10.0..10.0);
                    let lhs = (s.f(a) - s.f(b)).abs();
                    let env = (a - b).abs() * (a.abs().powf(p - 1.0) + b.abs().powf(p - 1.0));
                    if env > 0.0 {
                        worst = worst.max(lhs / env);
                    }
                    assert!(lhs <= 2.0 * env + 1e-12);
                }
            }
        }
        eprintln!("empirical max Lipschitz ratio: {worst:.4}");
    }

    proptest! {
        #[test]
        fn fujita_exponent_vanishes_at_pf(n in 1usize..=3, m in 0.1f64..3.0, frac in 0.01f64..0.99) {
            let alpha = 2.0 * m * frac - 0.5 * m;
            let mut s = spec(n, m, alpha, 2.0);
            s.p = s.exponents().unwrap().p_f;
            prop_assume!(s.p > 1.0);
            prop_assert!(fujita_bound_exponent(&s).abs() < 1e-12);
        }

        #[test]
        fn exponent_consistency(n in 1usize..=3, m in 0.1f64..3.0, alpha in -2.0f64..1.0, p in 1.01f64..6.0) {
            prop_assume!((2.0 * m - alpha).abs() > 1e-3);
            let s = spec(n, m, alpha, p);
            let e = s.exponents().unwrap();
            prop_assert!((e.gamma * (p - 1.0) - (2.0 * m - alpha)).abs() < 1e-12);
            prop_assert!((e.q_c * e.gamma - n as f64).abs() < 1e-9 * e.q_c.abs().max(1.0));
        }

        #[test]
        fn delta_sign(q in 1.01f64..50.0) {
            let e = spec(3, 1.0, 1.0, 3.0).exponents().unwrap();
            prop_assert_eq!(e.delta(q) >= 0.0, q >= e.q_c);
        }

        #[test]
        fn nonexistence_and_decay_exclusive(n in 1usize..=3, m in 1u32..3, a in 0.05f64..1.9, p in 1.01f64..4.0) {
            let s = spec(n, m as f64, a, p);
            let r = regime_check(&s, None, None);
            prop_assert!(!(r.nonexistence.holds && r.decay_gwp.holds));
        }
    }
}
