use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cli::{Format, Guard, Mode, Preset, Sign, Suite};

/// A scalar or a list in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Values read from `--config`. Keys are the flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub theta: Option<OneOrMany<f64>>,
    pub kappa: Option<OneOrMany<f64>>,
    pub seed: Option<OneOrMany<u64>>,
    pub preset: Option<Preset>,
    pub suite: Option<Suite>,
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub checkpoint_period: Option<f64>,
    pub amplitude: Option<f64>,
    pub mode: Option<Mode>,
    pub guard: Option<Guard>,
    pub c: Option<f64>,
    pub trivial_tol: Option<f64>,
    pub sign: Option<Sign>,
    pub image: Option<bool>,
    pub checkpoints: Option<bool>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub u_min: Option<f64>,
    pub u_max: Option<f64>,
    pub points: Option<usize>,
    pub eigenfunction: Option<bool>,
    pub field: Option<PathBuf>,
    pub smax: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub resolution: Option<f64>,
    pub horizon: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn theta_one(&self) -> Result<Option<f64>, String> {
        one("theta", self.theta.clone())
    }

    pub fn kappa_one(&self) -> Result<Option<f64>, String> {
        one("kappa", self.kappa.clone())
    }

    pub fn seed_one(&self) -> Result<Option<u64>, String> {
        one("seed", self.seed.clone())
    }
}

fn one<T>(key: &str, v: Option<OneOrMany<T>>) -> Result<Option<T>, String> {
    match v {
        None => Ok(None),
        Some(OneOrMany::One(x)) => Ok(Some(x)),
        Some(OneOrMany::Many(mut xs)) if xs.len() == 1 => Ok(xs.pop()),
        Some(OneOrMany::Many(_)) => Err(format!("config key `{key}` takes a single value here")),
    }
}

/// Flag list if given, else the config list, else `default`.
pub fn list_or<T>(flag: Vec<T>, file: Option<OneOrMany<T>>, default: Vec<T>) -> Vec<T> {
    if !flag.is_empty() {
        flag
    } else {
        file.map(OneOrMany::into_vec).unwrap_or(default)
    }
}
