use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinsim::analytic::db_to_linear;
use thinsim::montecarlo::{default_window_radius, ScenarioConfig};

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RatioCdf,
    Coverage,
    Generative,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RatioCdf => "ratio-cdf",
            Command::Coverage => "coverage",
            Command::Generative => "generative",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// SIR threshold grid in dB, `steps` points from `min_db` to `max_db` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGridDb {
    pub min_db: f64,
    pub max_db: f64,
    pub steps: usize,
}

impl Default for ThresholdGridDb {
    fn default() -> Self {
        Self {
            min_db: -10.0,
            max_db: 20.0,
            steps: 31,
        }
    }
}

impl ThresholdGridDb {
    pub fn db_values(&self) -> Vec<f64> {
        let span = self.max_db - self.min_db;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.min_db + span * i as f64 / last)
            .collect()
    }

    pub fn linear_values(&self) -> Vec<f64> {
        self.db_values().into_iter().map(db_to_linear).collect()
    }
}

pub const DEFAULT_P_LIST: [f64; 4] = [0.3, 0.5, 0.7, 1.0];
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const QUICK_TRIALS: u64 = 10_000;
pub const DEFAULT_UE_SAMPLES: u64 = 50_000;
pub const QUICK_UE_SAMPLES: u64 = 5_000;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub lambda: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub window_radius: Option<f64>,
    pub guard_fraction: Option<f64>,
    pub users_per_cell: Option<u32>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub ue_samples: Option<u64>,
    pub p_list: Option<Vec<f64>>,
    pub threshold_grid_db: Option<ThresholdGridDb>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub quick: Option<bool>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub quick: bool,
    pub format: Option<Format>,
}

/// Fully resolved experiment; serialized into every output header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub command: Command,
    pub scenario: ScenarioConfig,
    pub p_list: Vec<f64>,
    pub threshold_grid_db: ThresholdGridDb,
    /// Target user samples per `p` for the generative command.
    pub ue_samples: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub quick: bool,
}

impl ExperimentSpec {
    pub fn resolve(command: Command, file: ConfigFile, overrides: Overrides) -> Result<Self> {
        if let Some(c) = file.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config is for '{}' but '{}' was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let quick = overrides.quick || file.quick.unwrap_or(false);
        let lambda = file.lambda.unwrap_or(1.0);
        let alpha = file.alpha.unwrap_or(4.0);
        let default_trials = if quick { QUICK_TRIALS } else { DEFAULT_TRIALS };
        let default_users = if quick {
            QUICK_UE_SAMPLES
        } else {
            DEFAULT_UE_SAMPLES
        };
        let mut scenario = ScenarioConfig {
            lambda,
            p: file.p.unwrap_or(1.0),
            alpha,
            window_radius: 0.0,
            guard_fraction: file.guard_fraction.unwrap_or(0.2),
            users_per_cell: file.users_per_cell.unwrap_or(1),
            seed: overrides.seed.or(file.seed).unwrap_or(0),
            trials: overrides.trials.or(file.trials).unwrap_or(default_trials),
        };
        // The default radius depends on λ and α, so it is only computed once they are known valid.
        let probe = ScenarioConfig {
            window_radius: 1.0,
            ..scenario.clone()
        };
        probe
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        scenario.window_radius = file
            .window_radius
            .unwrap_or_else(|| default_window_radius(lambda, alpha));
        scenario
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let spec = Self {
            command,
            scenario,
            p_list: file.p_list.unwrap_or_else(|| DEFAULT_P_LIST.to_vec()),
            threshold_grid_db: file.threshold_grid_db.unwrap_or_default(),
            ue_samples: file.ue_samples.unwrap_or(default_users),
            output_path: overrides.output.or(file.output_path),
            format: overrides.format.or(file.format).unwrap_or_default(),
            quick,
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let g = self.threshold_grid_db;
        if !(g.min_db.is_finite() && g.max_db.is_finite() && g.min_db < g.max_db && g.steps >= 2) {
            return Err(CliError::Config(format!(
                "threshold grid needs min < max and steps >= 2, got {g:?}"
            )));
        }
        if self.p_list.is_empty() {
            return Err(CliError::Config("p_list must not be empty".into()));
        }
        let allow_zero = self.command == Command::Coverage;
        for &p in &self.p_list {
            let ok = if allow_zero {
                (0.0..=1.0).contains(&p)
            } else {
                p > 0.0 && p <= 1.0
            };
            if !ok {
                let range = if allow_zero { "[0, 1]" } else { "(0, 1]" };
                return Err(CliError::Config(format!(
                    "p_list value {p} outside {range}"
                )));
            }
        }
        if self.ue_samples == 0 {
            return Err(CliError::Config("ue_samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Scenario for one entry of `p_list`.
    pub fn scenario_for(&self, p: f64) -> ScenarioConfig {
        ScenarioConfig {
            p,
            ..self.scenario.clone()
        }
    }
}
