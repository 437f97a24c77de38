//! Run configuration: a strict JSON file, overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twopatch::applications::HoltParams;
use twopatch::{EnvironmentSignal, ModelParams};

use crate::error::{CliError, CliResult};

/// One-dimensional parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Linear { start: f64, stop: f64, n: usize },
    Log { start: f64, stop: f64, n: usize },
    Values { values: Vec<f64> },
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, n: usize) -> Self {
        GridSpec::Linear { start, stop, n }
    }

    pub fn log(start: f64, stop: f64, n: usize) -> Self {
        GridSpec::Log { start, stop, n }
    }

    pub fn values(values: &[f64]) -> Self {
        GridSpec::Values {
            values: values.to_vec(),
        }
    }

    /// Grid points; a single-point range yields `start`.
    pub fn points(&self, name: &str) -> CliResult<Vec<f64>> {
        let bad = |why: &str| CliError::Validation(format!("grid `{name}`: {why}"));
        let pts = match *self {
            GridSpec::Linear { start, stop, n } => {
                if n == 0 {
                    return Err(bad("n must be >= 1"));
                }
                (0..n)
                    .map(|i| {
                        if n == 1 {
                            start
                        } else {
                            start + (stop - start) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect()
            }
            GridSpec::Log { start, stop, n } => {
                if n == 0 {
                    return Err(bad("n must be >= 1"));
                }
                if !(start > 0.0 && stop > 0.0) {
                    return Err(bad("log grid needs positive bounds"));
                }
                let (a, b) = (start.ln(), stop.ln());
                (0..n)
                    .map(|i| {
                        if n == 1 {
                            start
                        } else {
                            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
            GridSpec::Values { ref values } => values.clone(),
        };
        if pts.is_empty() {
            return Err(bad("grid is empty"));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(bad("grid points must be finite"));
        }
        Ok(pts)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub m: Option<GridSpec>,
    pub t: Option<GridSpec>,
    pub eta: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest acceptable disagreement between independent computations.
    pub discrepancy: f64,
    /// Largest acceptable |∫ρ − 1|.
    pub normalization: f64,
    /// Monte-Carlo agreement, in combined standard errors.
    pub sigmas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            discrepancy: 1e-8,
            normalization: 1e-6,
            sigmas: 3.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// If present, must name the subcommand being run.
    pub command: Option<String>,
    pub params: Option<ModelParams>,
    pub environment: Option<EnvironmentSignal>,
    #[serde(default)]
    pub grid: Grids,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    /// Number of output points (density) or histogram bins.
    pub points: Option<usize>,
    pub x0: Option<[f64; 2]>,
    pub holt: Option<HoltParams>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        if let Some(p) = &cfg.params {
            p.validate()?;
        }
        if let Some(env) = &cfg.environment {
            env.validate()?;
        }
        if let Some(h) = &cfg.holt {
            h.validate()?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"sed": 3}"#,
            r#"{"grid": {"mm": {"scale": "values", "values": [1]}}}"#,
            r#"{"params": {"epsilon": 0.5, "m": 0.2, "t": 1, "alpah": 0.1}}"#,
            r#"{"tolerances": {"discrepency": 1e-3}}"#,
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Validation(_))), "{text}");
        }
    }

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::parse(
            r#"{
                "command": "pdmp",
                "params": {"epsilon": 0.5, "m": 0.2, "t": 2.5},
                "environment": {"kind": {"type": "markov_switch", "rate": 0.4}},
                "grid": {"m": {"scale": "log", "start": 1e-3, "stop": 1, "n": 4}},
                "seed": 7,
                "tolerances": {"discrepancy": 1e-9}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.grid.m.unwrap().points("m").unwrap().len(), 4);
        assert_eq!(cfg.tolerances.sigmas, 3.0);
    }

    #[test]
    fn invalid_params_rejected() {
        let r = RunConfig::parse(r#"{"params": {"epsilon": 2, "m": 0.2, "t": 1}}"#);
        assert!(matches!(r, Err(CliError::Validation(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(
            GridSpec::linear(0.0, 4.0, 5).points("m").unwrap(),
            vec![0.0, 1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(GridSpec::linear(3.0, 4.0, 1).points("m").unwrap(), vec![3.0]);
        let g = GridSpec::log(1e-4, 1e2, 7).points("m").unwrap();
        assert!((g[6] - 1e2).abs() < 1e-10 && (g[1] - 1e-3).abs() < 1e-15);
        assert!(GridSpec::linear(0.0, 1.0, 0).points("m").is_err());
        assert!(GridSpec::log(0.0, 1.0, 3).points("m").is_err());
        assert!(GridSpec::values(&[]).points("m").is_err());
    }
}
