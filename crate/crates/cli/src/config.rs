use std::path::{Path, PathBuf};

use hetsol_core::chartfield::ChartGeometry;
use hetsol_core::homgeo::Catalogue;
use hetsol_core::{Error, Mode, Result};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the configured arithmetic mode.
pub const MODE_ENV: &str = "HETSOL_MODE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance for float-mode identity checks.
    pub float: f64,
    /// Relative tolerance for finite-difference comparisons.
    pub fd: f64,
    /// Objective tolerance of the soliton search.
    pub search: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { float: 1e-9, fd: 1e-6, search: 1e-20 }
    }
}

/// Settings shared by every subcommand. Loaded from a JSON file, then
/// overridden by `HETSOL_MODE` and command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub mode: Mode,
    pub tolerances: Tolerances,
    /// Chart description file for `harmonic`.
    pub chart: Option<PathBuf>,
    /// Family catalogue replacing the built-in one.
    pub catalogue: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            trials: 200,
            mode: Mode::Exact,
            tolerances: Tolerances::default(),
            chart: None,
            catalogue: None,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl SuiteConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&read(path)?).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    /// Applies `HETSOL_MODE` when it is set.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(MODE_ENV) {
            self.mode = v.parse().map_err(|_| Error::Config(format!("{MODE_ENV}: unknown mode `{v}`")))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("float", t.float), ("fd", t.fd), ("search", t.search)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerances.{name}: must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn catalogue(&self) -> Result<Catalogue> {
        match &self.catalogue {
            Some(path) => Catalogue::from_json_str(&read(path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            None => Ok(Catalogue::builtin()),
        }
    }

    pub fn chart(&self) -> Result<Option<ChartGeometry>> {
        match &self.chart {
            Some(path) => ChartGeometry::from_json_str(&read(path)?)
                .map(Some)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_files_keep_defaults() {
        let cfg = SuiteConfig::from_json_str(r#"{"seed": 7, "tolerances": {"fd": 1e-5}}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.tolerances.fd, 1e-5);
        assert_eq!(cfg.tolerances.float, 1e-9);
    }

    #[test]
    fn errors_name_the_field() {
        let err = SuiteConfig::from_json_str(r#"{"tolerances": {"float": "tiny"}}"#).unwrap_err();
        assert!(err.to_string().contains("tolerances.float"), "{err}");
        let err = SuiteConfig::from_json_str(r#"{"trails": 3}"#).unwrap_err();
        assert!(err.to_string().contains("trails"), "{err}");
    }

    #[test]
    fn validation() {
        let mut cfg = SuiteConfig { trials: 0, ..SuiteConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.tolerances.search = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("tolerances.search"));
    }
}
