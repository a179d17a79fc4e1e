//! Experiment configuration: a flat `key = value` file.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `manifest` | none | dataset manifest path, relative to the config file |
//! | `window` | `full` | analysis window in samples, or `full` for the whole trial |
//! | `ar_order` | 4 | Burg AR model order |
//! | `psd_grid` | 100 | AR spectrum grid points |
//! | `bands` | 10 | spectral bands; must divide `psd_grid` |
//! | `lbp_window` | 8 | LBP neighbourhood (samples, at most 63) |
//! | `lbp_threshold` | 127 | LBP code split point |
//! | `ics_pairs` | the 12 default pairs | `i:j` channel pairs, comma separated |
//! | `sigma_grid` | `0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1, 1.5` | PNN kernel widths tried per training fold |
//! | `sigma_inner_folds` | 5 | folds of the kernel-width search |
//! | `folds` | 10 | cross-validation folds |
//! | `mc_runs` | 100 | Monte-Carlo repetitions |
//! | `seed` | 0 | first Monte-Carlo seed |
//! | `sfs_seed` | 0 | fold seed of the selection criterion |
//! | `sfs_sigma` | 0.3 | kernel width of the selection criterion |
//! | `sfs_max_features` | 60 | selection size limit |
//! | `sfs_patience` | 1 | non-improving selection steps tolerated |
//! | `output_dir` | `out` | where commands write results, relative to the working directory |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::eval::{ClassifierConfig, SigmaSelection};
use crate::features::FeatureConfig;
use crate::kv::{self, KvError};
use crate::pnn::{DEFAULT_INNER_FOLDS, DEFAULT_SIGMA_GRID};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Syntax(#[from] KvError),
    #[error("line {line}: {message}")]
    Value { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub manifest: Option<PathBuf>,
    pub features: FeatureConfig,
    pub sigma_grid: Vec<f64>,
    pub sigma_inner_folds: usize,
    pub folds: usize,
    pub mc_runs: usize,
    pub seed: u64,
    pub sfs_seed: u64,
    pub sfs_sigma: f64,
    pub sfs_max_features: usize,
    pub sfs_patience: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            features: FeatureConfig::default(),
            sigma_grid: DEFAULT_SIGMA_GRID.to_vec(),
            sigma_inner_folds: DEFAULT_INNER_FOLDS,
            folds: 10,
            mc_runs: 100,
            seed: 0,
            sfs_seed: 0,
            sfs_sigma: 0.3,
            sfs_max_features: 60,
            sfs_patience: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_pairs(value: &str) -> Option<Vec<(usize, usize)>> {
    value
        .split(',')
        .map(|p| {
            let (a, b) = p.trim().split_once(':')?;
            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
        })
        .collect()
}

fn parse_list(value: &str) -> Option<Vec<f64>> {
    value.split(',').map(|v| v.trim().parse().ok()).collect()
}

impl ExperimentConfig {
    /// Parses config text; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (line, key, value) in kv::parse(text)? {
            let bad = || ConfigError::Value {
                line,
                message: format!("bad value `{value}` for `{key}`"),
            };
            fn num<T: std::str::FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<T, ConfigError> {
                v.parse().map_err(|_| bad())
            }
            let f = &mut cfg.features;
            match key.as_str() {
                "manifest" => cfg.manifest = Some(base_dir.join(&value)),
                "window" => {
                    f.window = if value == "full" {
                        None
                    } else {
                        Some(num(&value, bad)?)
                    }
                }
                "ar_order" => f.ar_order = num(&value, bad)?,
                "psd_grid" => f.psd_grid = num(&value, bad)?,
                "bands" => f.bands = num(&value, bad)?,
                "lbp_window" => f.lbp_window = num(&value, bad)?,
                "lbp_threshold" => f.lbp_threshold = num(&value, bad)?,
                "ics_pairs" => f.ics_pairs = parse_pairs(&value).ok_or_else(bad)?,
                "sigma_grid" => cfg.sigma_grid = parse_list(&value).ok_or_else(bad)?,
                "sigma_inner_folds" => cfg.sigma_inner_folds = num(&value, bad)?,
                "folds" => cfg.folds = num(&value, bad)?,
                "mc_runs" => cfg.mc_runs = num(&value, bad)?,
                "seed" => cfg.seed = num(&value, bad)?,
                "sfs_seed" => cfg.sfs_seed = num(&value, bad)?,
                "sfs_sigma" => cfg.sfs_sigma = num(&value, bad)?,
                "sfs_max_features" => cfg.sfs_max_features = num(&value, bad)?,
                "sfs_patience" => cfg.sfs_patience = num(&value, bad)?,
                "output_dir" => cfg.output_dir = PathBuf::from(&value),
                _ => {
                    return Err(ConfigError::Value {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.features;
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if f.window == Some(0) {
            return fail("window must be positive");
        }
        if f.ar_order == 0 {
            return fail("ar_order must be positive");
        }
        if f.bands == 0 || f.psd_grid == 0 || !f.psd_grid.is_multiple_of(f.bands) {
            return fail("bands must be positive and divide psd_grid");
        }
        if f.lbp_window == 0 || f.lbp_window > 63 {
            return fail("lbp_window must be in 1..=63");
        }
        if f.ics_pairs.iter().any(|&(a, b)| a == 0 || b == 0 || a == b) {
            return fail("ics_pairs need two distinct 1-based channels");
        }
        if self.sigma_grid.is_empty() || self.sigma_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return fail("sigma_grid values must be positive");
        }
        if !(self.sfs_sigma > 0.0 && self.sfs_sigma.is_finite()) {
            return fail("sfs_sigma must be positive");
        }
        if self.folds < 2 {
            return fail("folds must be at least 2");
        }
        if self.sigma_inner_folds < 2 {
            return fail("sigma_inner_folds must be at least 2");
        }
        if self.mc_runs == 0 {
            return fail("mc_runs must be at least 1");
        }
        if self.sfs_max_features == 0 || self.sfs_patience == 0 {
            return fail("sfs_max_features and sfs_patience must be at least 1");
        }
        Ok(())
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            sigma: SigmaSelection::Grid {
                grid: self.sigma_grid.clone(),
                inner_folds: self.sigma_inner_folds,
            },
        }
    }

    /// Every key with its resolved value.
    pub fn to_map(&self) -> BTreeMap<&'static str, String> {
        let f = &self.features;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut m = BTreeMap::new();
        if let Some(p) = &self.manifest {
            m.insert("manifest", p.display().to_string());
        }
        m.insert(
            "window",
            f.window.map_or_else(|| "full".to_string(), |w| w.to_string()),
        );
        m.insert("ar_order", f.ar_order.to_string());
        m.insert("psd_grid", f.psd_grid.to_string());
        m.insert("bands", f.bands.to_string());
        m.insert("lbp_window", f.lbp_window.to_string());
        m.insert("lbp_threshold", f.lbp_threshold.to_string());
        m.insert(
            "ics_pairs",
            f.ics_pairs
                .iter()
                .map(|(a, b)| format!("{a}:{b}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        m.insert("sigma_grid", join(&self.sigma_grid));
        m.insert("sigma_inner_folds", self.sigma_inner_folds.to_string());
        m.insert("folds", self.folds.to_string());
        m.insert("mc_runs", self.mc_runs.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("sfs_seed", self.sfs_seed.to_string());
        m.insert("sfs_sigma", self.sfs_sigma.to_string());
        m.insert("sfs_max_features", self.sfs_max_features.to_string());
        m.insert("sfs_patience", self.sfs_patience.to_string());
        m.insert("output_dir", self.output_dir.display().to_string());
        m
    }

    /// Config text that parses back to the same settings (with absolute or
    /// already-resolved paths).
    pub fn to_text(&self) -> String {
        self.to_map()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::parse(&cfg.to_text(), Path::new("")).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.features.ics_pairs.len(), 12);
    }

    #[test]
    fn overrides() {
        let text = "manifest = data/m.txt\nwindow = 256\nics_pairs = 1:2, 3:4\nsigma_grid = 0.2,0.4\nmc_runs = 3 # quick\n";
        let cfg = ExperimentConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(cfg.manifest, Some(PathBuf::from("/base/data/m.txt")));
        assert_eq!(cfg.features.window, Some(256));
        assert_eq!(cfg.features.ics_pairs, vec![(1, 2), (3, 4)]);
        assert_eq!(cfg.sigma_grid, vec![0.2, 0.4]);
        assert_eq!(cfg.mc_runs, 3);
        let back = ExperimentConfig::parse(&cfg.to_text(), Path::new("/elsewhere")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects() {
        let p = |t: &str| ExperimentConfig::parse(t, Path::new("."));
        assert!(matches!(p("colour = red\n"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(p("\nfolds = ten\n"), Err(ConfigError::Value { line: 2, .. })));
        assert!(matches!(p("bands = 7\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(p("folds = 1\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(p("ics_pairs = 1-2\n"), Err(ConfigError::Value { .. })));
        assert!(matches!(p("lbp_window = 64\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(p("nonsense\n"), Err(ConfigError::Syntax(_))));
    }
}
