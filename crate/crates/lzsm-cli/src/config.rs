//! Sweep configuration: defaults, JSON config file, flag overrides and
//! validation. Flags override file values; file values override defaults.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Configuration problem tied to a named field; exits with the usage code.
#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Microscopic,
    Phenomenological,
    Closed,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "microscopic" => Ok(Model::Microscopic),
            "phenomenological" => Ok(Model::Phenomenological),
            "closed" => Ok(Model::Closed),
            other => Err(err(
                "model",
                format!("unknown model `{other}` (expected microscopic | phenomenological | closed)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Gamma,
    Theta,
    Tau,
    Kappa,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "gamma" => Ok(Axis::Gamma),
            "theta" => Ok(Axis::Theta),
            "tau" => Ok(Axis::Tau),
            "kappa" => Ok(Axis::Kappa),
            other => Err(err(
                "sweep",
                format!("unknown sweep axis `{other}` (expected gamma | theta | tau | kappa)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl AxisSpec {
    /// The sweep grid, ascending.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        if self.log {
            let (a, b) = (self.min.ln(), self.max.ln());
            (0..n)
                .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                .collect()
        } else {
            (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect()
        }
    }
}

/// Fully resolved run configuration. The coupling is the unit of frequency
/// and is pinned to 1.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub model: Model,
    pub omega: f64,
    pub kappa: f64,
    pub omega3: f64,
    pub tau: f64,
    pub gamma: f64,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<AxisSpec>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Raw option set before resolution; every field optional so file and flag
/// layers can be merged. JSON keys mirror the flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialConfig {
    pub model: Option<String>,
    pub kappa: Option<f64>,
    pub omega3: Option<f64>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub sweep: Option<String>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    pub log: Option<bool>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| err("config", format!("malformed JSON: {e}")))
    }

    /// Overlays `other` (higher precedence) on `self`.
    pub fn overlaid_with(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            model: other.model.or(self.model),
            kappa: other.kappa.or(self.kappa),
            omega3: other.omega3.or(self.omega3),
            tau: other.tau.or(self.tau),
            gamma: other.gamma.or(self.gamma),
            theta: other.theta.or(self.theta),
            sweep: other.sweep.or(self.sweep),
            min: other.min.or(self.min),
            max: other.max.or(self.max),
            points: other.points.or(self.points),
            log: other.log.or(self.log),
            rel_tol: other.rel_tol.or(self.rel_tol),
            abs_tol: other.abs_tol.or(self.abs_tol),
            jobs: other.jobs.or(self.jobs),
            output: other.output.or(self.output),
        }
    }

    /// Validates and fills defaults: the canonical grid (`omega3 = 1e3`,
    /// `tau = 30`, `kappa = 1`), microscopic model at zero temperature.
    pub fn resolve(self) -> Result<SweepConfig, ConfigError> {
        let model = match &self.model {
            Some(s) => Model::parse(s)?,
            None => Model::Microscopic,
        };
        let kappa = self.kappa.unwrap_or(1.0);
        let omega3 = self.omega3.unwrap_or(1e3);
        let tau = self.tau.unwrap_or(30.0);
        let gamma = self.gamma.unwrap_or(0.0);
        let theta = self.theta.unwrap_or(0.0);
        let rel_tol = self.rel_tol.unwrap_or(1e-8);
        let abs_tol = self.abs_tol.unwrap_or(1e-10);

        for (field, value) in [("kappa", kappa), ("omega3", omega3), ("tau", tau)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(err(field, "must be positive and finite"));
            }
        }
        for (field, value) in [("gamma", gamma), ("theta", theta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(err(field, "must be nonnegative and finite"));
            }
        }
        for (field, value) in [("rel-tol", rel_tol), ("abs-tol", abs_tol)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(match field {
                    "rel-tol" => err("rel-tol", "must be positive"),
                    _ => err("abs-tol", "must be positive"),
                });
            }
        }
        if model == Model::Phenomenological && theta != 0.0 {
            return Err(err(
                "theta",
                "the phenomenological model has no temperature; leave theta at 0",
            ));
        }

        let sweep = match (&self.sweep, self.min, self.max, self.points) {
            (None, None, None, None) => None,
            (Some(axis), min, max, points) => {
                let axis = Axis::parse(axis)?;
                let min = min.ok_or_else(|| err("min", "required for a sweep"))?;
                let max = max.ok_or_else(|| err("max", "required for a sweep"))?;
                let points = points.ok_or_else(|| err("points", "required for a sweep"))?;
                if points < 2 {
                    return Err(err("points", "a sweep needs at least 2 points"));
                }
                if !(min < max) {
                    return Err(err("min", "sweep requires min < max"));
                }
                let log = self.log.unwrap_or(false);
                if log && min <= 0.0 {
                    return Err(err("min", "log spacing requires min > 0"));
                }
                let nonneg_axis = matches!(axis, Axis::Theta | Axis::Gamma);
                if nonneg_axis && min < 0.0 {
                    return Err(err("min", "gamma and theta sweeps require min >= 0"));
                }
                if matches!(axis, Axis::Tau | Axis::Kappa) && min <= 0.0 {
                    return Err(err("min", "tau and kappa sweeps require min > 0"));
                }
                if axis == Axis::Theta && model != Model::Microscopic {
                    return Err(err(
                        "sweep",
                        "temperature sweeps need the microscopic model",
                    ));
                }
                Some(AxisSpec {
                    axis,
                    min,
                    max,
                    points,
                    log,
                })
            }
            _ => {
                return Err(err(
                    "sweep",
                    "min/max/points given without a sweep axis (use --sweep)",
                ))
            }
        };

        Ok(SweepConfig {
            model,
            omega: 1.0,
            kappa,
            omega3,
            tau,
            gamma,
            theta,
            sweep,
            rel_tol,
            abs_tol,
            jobs: self.jobs,
            output: self.output,
        })
    }
}

impl SweepConfig {
    pub fn integrator_options(&self) -> lzsm::IntegratorOptions {
        lzsm::IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_canonical() {
        let cfg = PartialConfig::default().resolve().unwrap();
        assert_eq!(cfg.model, Model::Microscopic);
        assert_eq!(cfg.omega3, 1e3);
        assert_eq!(cfg.tau, 30.0);
        assert_eq!(cfg.kappa, 1.0);
        assert_eq!(cfg.theta, 0.0);
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn flags_override_file() {
        let file = PartialConfig {
            kappa: Some(2.0),
            gamma: Some(0.5),
            ..Default::default()
        };
        let flags = PartialConfig {
            kappa: Some(4.0),
            ..Default::default()
        };
        let cfg = file.overlaid_with(flags).resolve().unwrap();
        assert_eq!(cfg.kappa, 4.0);
        assert_eq!(cfg.gamma, 0.5);
    }

    #[test]
    fn single_point_sweep_rejected() {
        let p = PartialConfig {
            sweep: Some("gamma".into()),
            min: Some(0.1),
            max: Some(1.0),
            points: Some(1),
            ..Default::default()
        };
        let e = p.resolve().unwrap_err();
        assert_eq!(e.field, "points");
    }

    #[test]
    fn log_grid_spacing() {
        let spec = AxisSpec {
            axis: Axis::Gamma,
            min: 1e-3,
            max: 1e3,
            points: 61,
            log: true,
        };
        let grid = spec.grid();
        assert_eq!(grid.len(), 61);
        assert!((grid[0] - 1e-3).abs() < 1e-15);
        assert!((grid[60] - 1e3).abs() / 1e3 < 1e-12);
        // uniform ratio between neighbours
        let r0 = grid[1] / grid[0];
        for w in grid.windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-9);
        }
    }

    #[test]
    fn phenomenological_with_temperature_rejected() {
        let p = PartialConfig {
            model: Some("phenomenological".into()),
            theta: Some(10.0),
            ..Default::default()
        };
        assert_eq!(p.resolve().unwrap_err().field, "theta");
    }

    #[test]
    fn unknown_config_key_is_named() {
        let e = serde_json::from_str::<PartialConfig>(r#"{"kapa": 1.0}"#).unwrap_err();
        assert!(e.to_string().contains("kapa"));
    }
}
