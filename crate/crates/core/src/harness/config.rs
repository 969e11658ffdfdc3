//! Experiment configuration files (TOML, versioned).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::params::{derive_exponents, ProblemSpec};
use crate::spectral::{self, Field, Grid};
use crate::weakform::psi;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ScalingInvariance,
    SelfSimilar,
    Decay,
    FujitaScan,
    Stability,
    Qualitative,
    Smoothing,
    LocalLambda,
    WeakstarInit,
    UniquenessCross,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub extent: f64,
}

/// Initial data recipes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    /// `A e^{-|x|^2/w^2}`
    Gaussian { amplitude: f64, width: f64 },
    /// `eps0 (|x|^2 + eps^2)^{-γ/2}`; `cell_mean` overrides the origin with the 1-D cell mean.
    Homogeneous {
        eps0: f64,
        #[serde(default)]
        eps: f64,
        #[serde(default)]
        cell_mean: bool,
    },
    /// `A` on `|x| <= radius`.
    Indicator { amplitude: f64, radius: f64 },
    /// `A |x|^{-exponent}` on `|x| <= radius`, origin cell regularised with `h/2`.
    TruncatedPower { amplitude: f64, exponent: f64, radius: f64 },
    /// Gaussian `A e^{-|x|^2}` with `A` the largest amplitude dominated by `c0 |x|^{-γ}`.
    DominatedGaussian { c0: f64 },
    /// Smooth compactly supported `A ψ(|x|/radius)`.
    Bump { amplitude: f64, radius: f64 },
}

impl DataSpec {
    /// Sample `σ^γ u_0(σ x)` on a grid (`σ = 1` for the plain data).
    pub fn sample_scaled(&self, grid: Grid, spec: &ProblemSpec, sigma: f64) -> Result<Field> {
        let gamma = derive_exponents(spec).map(|e| e.gamma).unwrap_or(0.0);
        let pre = if sigma == 1.0 { 1.0 } else { sigma.powf(gamma) };
        let h = grid.h();
        let f = match *self {
            DataSpec::Zero => Field::zeros(grid),
            DataSpec::Gaussian { amplitude, width } => {
                Field::radial(grid, |r| pre * amplitude * (-(sigma * r / width).powi(2)).exp())
            }
            DataSpec::Homogeneous { eps0, eps, cell_mean } => {
                if sigma != 1.0 {
                    return Err(Error::config("data", "homogeneous data is already scale invariant"));
                }
                if cell_mean {
                    spectral::homogeneous_data_cell_mean(grid, eps0, gamma)?
                } else {
                    spectral::homogeneous_data(grid, eps0, gamma, eps)?.0
                }
            }
            DataSpec::Indicator { amplitude, radius } => {
                Field::radial(grid, |r| if sigma * r <= radius { pre * amplitude } else { 0.0 })
            }
            DataSpec::TruncatedPower { amplitude, exponent, radius } => Field::radial(grid, |r| {
                let s = sigma * r;
                if s > radius {
                    0.0
                } else {
                    pre * amplitude * if r == 0.0 { sigma * h / 2.0 } else { s }.powf(-exponent)
                }
            }),
            DataSpec::DominatedGaussian { c0 } => {
                let a = dominated_amplitude(c0, gamma);
                Field::radial(grid, |r| pre * a * (-(sigma * r).powi(2)).exp())
            }
            DataSpec::Bump { amplitude, radius } => {
                Field::radial(grid, |r| pre * amplitude * psi(sigma * r / radius))
            }
        };
        Ok(f)
    }

    pub fn sample(&self, grid: Grid, spec: &ProblemSpec) -> Result<Field> {
        self.sample_scaled(grid, spec, 1.0)
    }
}

/// Largest `A` with `A e^{-r^2} <= c0 r^{-γ}` for all `r > 0`.
pub fn dominated_amplitude(c0: f64, gamma: f64) -> f64 {
    let h = gamma / 2.0;
    c0 / (h.powf(h) * (-h).exp())
}

/// Kind-specific settings; unused entries are ignored by other kinds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knobs {
    /// Scaling factor for `scaling_invariance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Powers for `fujita_scan`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_grid: Vec<f64>,
    /// Data for scan cells below the Fujita exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_data: Option<DataSpec>,
    /// Perturbation added to the data in `stability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<DataSpec>,
    /// Lorentz pair for `smoothing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    /// Test family for `smoothing`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<DataSpec>,
    /// Evaluation times (smoothing, weak-star pairing, self-similar comparison).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    /// `[t0, t1]` window for slope fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    /// Fraction of the half-length used as the comparison region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_fraction: Option<f64>,
    /// Amplitudes for `local_lambda`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitudes: Vec<f64>,
    /// Orders for `qualitative`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m_list: Vec<f64>,
    /// Slice counts for `uniqueness_cross` refinement.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<usize>,
    /// Reference step for cross-scheme comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dt: Option<f64>,
    /// Relative drop required by `decay` and `stability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_target: Option<f64>,
}

/// One experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: ExperimentKind,
    pub spec: ProblemSpec,
    pub grid: GridConfig,
    pub evolve: EvolveConfig,
    pub data: DataSpec,
    #[serde(default)]
    pub knobs: Knobs,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.spec.n, self.grid.points, self.grid.extent)
            .map_err(|e| Error::config("grid", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config(
                "version",
                format!("unsupported version {} (expected {CONFIG_VERSION})", self.version),
            ));
        }
        self.spec
            .validate()
            .map_err(|e| Error::config("spec", e.to_string()))?;
        self.grid()?;
        self.evolve.validate()?;
        Ok(())
    }

    /// Serialise to TOML.
    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<emit>", e.to_string()))
    }
}

/// Extract the offending key from a TOML error message.
fn key_of(msg: &str) -> String {
    for pat in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(i) = msg.find(pat) {
            let rest = &msg[i + pat.len()..];
            if let Some(j) = rest.find('`') {
                return rest[..j].to_string();
            }
        }
    }
    "<document>".into()
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let msg = e.to_string();
        Error::config(key_of(&msg), msg.trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;

    #[test]
    fn emit_parse_emit_is_identity() {
        for cfg in presets::all() {
            let a = cfg.emit().unwrap();
            let b = parse_config_str(&a).unwrap().emit().unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn malformed_key_is_named() {
        let mut text = presets::decay().emit().unwrap();
        text = text.replace("t_end", "t_ned");
        match parse_config_str(&text) {
            Err(Error::Config { key, .. }) => assert!(key == "t_ned" || key == "t_end", "{key}"),
            other => panic!("{other:?}"),
        }
        let bad = presets::decay().emit().unwrap().replace("version = 1", "version = 9");
        assert!(matches!(parse_config_str(&bad), Err(Error::Config { key, .. }) if key == "version"));
    }

    #[test]
    fn dominated_gaussian_is_dominated() {
        let a = dominated_amplitude(0.05, 0.8);
        for i in 1..2000 {
            let r = i as f64 * 0.005;
            assert!(a * (-r * r).exp() <= 0.05 * r.powf(-0.8) * (1.0 + 1e-12));
        }
    }
}
