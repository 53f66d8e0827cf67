//! Run configuration. Each setting is resolved from, in order of
//! precedence: command-line flags, the JSON file given by `--config`,
//! `LOWLYING_*` environment variables, and built-in defaults.
//!
//! The JSON schema (every key optional):
//!
//! ```json
//! {
//!   "M": 8, "bump_halfwidth": 0.125, "tol": 1e-8, "c_max": 1000, "threads": 4,
//!   "T": 21, "T_list": [11, 21, 41, 81], "eta": 0.8, "eta_list": [0.8, 1.2],
//!   "data_path": "forms.csv", "output_path": "out.csv"
//! }
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lowlying_core::weights::{make_weight_family, WeightFamily};
use serde::Deserialize;

use crate::error::{AppError, AppResult};

pub const DEFAULT_ORDER: u32 = 8;
pub const DEFAULT_BUMP_HALFWIDTH: f64 = 0.125;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_C_MAX: u64 = 1000;

/// One source of settings; unset fields fall through to the next source.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    #[serde(rename = "M")]
    pub order: Option<u32>,
    pub bump_halfwidth: Option<f64>,
    pub tol: Option<f64>,
    pub c_max: Option<u64>,
    pub threads: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<u32>,
    #[serde(rename = "T_list")]
    pub t_list: Option<Vec<u32>>,
    pub eta: Option<f64>,
    pub eta_list: Option<Vec<f64>>,
    pub data_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl Layer {
    pub fn from_json_file(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
    }

    /// `LOWLYING_M`, `LOWLYING_BUMP_HALFWIDTH`, `LOWLYING_TOL`,
    /// `LOWLYING_C_MAX`, `LOWLYING_THREADS`.
    pub fn from_env_map(vars: &HashMap<String, String>) -> AppResult<Self> {
        fn get<T: std::str::FromStr>(vars: &HashMap<String, String>, key: &str) -> AppResult<Option<T>> {
            match vars.get(key) {
                None => Ok(None),
                Some(v) => v
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| AppError::Usage(format!("environment variable {key}={v} is not valid"))),
            }
        }
        Ok(Layer {
            order: get(vars, "LOWLYING_M")?,
            bump_halfwidth: get(vars, "LOWLYING_BUMP_HALFWIDTH")?,
            tol: get(vars, "LOWLYING_TOL")?,
            c_max: get(vars, "LOWLYING_C_MAX")?,
            threads: get(vars, "LOWLYING_THREADS")?,
            ..Layer::default()
        })
    }

    pub fn from_env() -> AppResult<Self> {
        let vars: HashMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with("LOWLYING_")).collect();
        Self::from_env_map(&vars)
    }

    /// Fields set here win over `lower`.
    pub fn over(self, lower: Layer) -> Layer {
        Layer {
            order: self.order.or(lower.order),
            bump_halfwidth: self.bump_halfwidth.or(lower.bump_halfwidth),
            tol: self.tol.or(lower.tol),
            c_max: self.c_max.or(lower.c_max),
            threads: self.threads.or(lower.threads),
            t: self.t.or(lower.t),
            t_list: self.t_list.or(lower.t_list),
            eta: self.eta.or(lower.eta),
            eta_list: self.eta_list.or(lower.eta_list),
            data_path: self.data_path.or(lower.data_path),
            output_path: self.output_path.or(lower.output_path),
        }
    }
}

/// Fully resolved settings shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub order: u32,
    pub bump_halfwidth: f64,
    pub tol: f64,
    pub c_max: u64,
    /// 0 means the machine's parallelism.
    pub threads: usize,
    pub t: Option<u32>,
    pub t_list: Option<Vec<u32>>,
    pub eta: Option<f64>,
    pub eta_list: Option<Vec<f64>>,
    pub data_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    /// Flags over config file over environment over defaults, validated.
    pub fn resolve(flags: Layer, file: Option<Layer>, env: Layer) -> AppResult<Self> {
        let merged = flags.over(file.unwrap_or_default()).over(env);
        let cfg = RunConfig {
            order: merged.order.unwrap_or(DEFAULT_ORDER),
            bump_halfwidth: merged.bump_halfwidth.unwrap_or(DEFAULT_BUMP_HALFWIDTH),
            tol: merged.tol.unwrap_or(DEFAULT_TOL),
            c_max: merged.c_max.unwrap_or(DEFAULT_C_MAX),
            threads: merged.threads.unwrap_or(0),
            t: merged.t,
            t_list: merged.t_list,
            eta: merged.eta,
            eta_list: merged.eta_list,
            data_path: merged.data_path,
            output_path: merged.output_path,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> AppResult<()> {
        let usage = |m: String| Err(AppError::Usage(m));
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return usage(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if self.c_max < 1 {
            return usage("c_max must be at least 1".into());
        }
        if !(self.bump_halfwidth > 0.0 && self.bump_halfwidth <= 0.125) {
            return usage(format!("bump_halfwidth must lie in (0, 1/8], got {}", self.bump_halfwidth));
        }
        for t in self.t.iter().chain(self.t_list.iter().flatten()) {
            if *t < 3 || t % 2 == 0 {
                return usage(format!("T must be odd and at least 3, got {t}"));
            }
        }
        for eta in self.eta.iter().chain(self.eta_list.iter().flatten()) {
            if !(*eta > 0.0 && *eta < 2.0) {
                return usage(format!("eta must lie in (0, 2), got {eta}"));
            }
        }
        if matches!(self.t_list.as_deref(), Some([])) || matches!(self.eta_list.as_deref(), Some([])) {
            return usage("lists must be nonempty".into());
        }
        Ok(())
    }

    pub fn family(&self) -> AppResult<Arc<WeightFamily>> {
        Ok(Arc::new(make_weight_family(self.order, self.bump_halfwidth)?))
    }

    pub fn require_t(&self) -> AppResult<u32> {
        self.t.ok_or_else(|| AppError::Usage("--T is required".into()))
    }

    pub fn require_eta(&self) -> AppResult<f64> {
        self.eta.ok_or_else(|| AppError::Usage("--eta is required".into()))
    }

    pub fn t_list_or(&self, default: &[u32]) -> Vec<u32> {
        self.t_list.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn eta_list_or(&self, default: &[f64]) -> Vec<f64> {
        self.eta_list.clone().unwrap_or_else(|| default.to_vec())
    }
}
