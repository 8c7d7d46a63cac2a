use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::reaching::ReachingConfig;
use crate::sagg::{CompetenceParams, GoalModes, InterestParams};
use crate::teacher::TeacherConfig;

/// Every tunable of an experiment. Missing keys take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub total_movements: usize,
    pub eval_every: usize,
    pub seeds: Vec<u64>,
    /// Histogram grid over the task space for coverage counts.
    pub coverage_grid: (usize, usize),
    pub benchmark_grid: (usize, usize),
    pub benchmark_pool: usize,
    pub benchmark_seed: u64,
    /// Load the benchmark from here instead of building it.
    pub benchmark_file: Option<PathBuf>,
    pub demo_seed: u64,
    /// Load the demonstration set from here instead of building it.
    pub demo_file: Option<PathBuf>,
    pub env: EnvConfig,
    pub interest: InterestParams,
    pub reaching: ReachingConfig,
    pub teacher: TeacherConfig,
    pub competence: CompetenceParams,
    pub modes: GoalModes,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            total_movements: 5000,
            eval_every: 250,
            seeds: (0..10).collect(),
            coverage_grid: (26, 16),
            benchmark_grid: (26, 16),
            benchmark_pool: 70_000,
            benchmark_seed: 1,
            benchmark_file: None,
            demo_seed: 2,
            demo_file: None,
            env: EnvConfig::default(),
            interest: InterestParams::default(),
            reaching: ReachingConfig::default(),
            teacher: TeacherConfig::default(),
            competence: CompetenceParams::default(),
            modes: GoalModes::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval_every < 1 || self.total_movements % self.eval_every != 0 {
            return Err(Error::Config(format!(
                "eval_every ({}) must divide total_movements ({})",
                self.eval_every, self.total_movements
            )));
        }
        let grids = [self.coverage_grid, self.benchmark_grid];
        if grids.iter().any(|&(nx, ny)| nx < 1 || ny < 1) {
            return Err(Error::Config("grids need at least one cell per axis".into()));
        }
        if self.benchmark_pool < 1 {
            return Err(Error::Config("benchmark_pool must be >= 1".into()));
        }
        self.env.validate()?;
        self.interest.validate()?;
        self.reaching.validate()?;
        self.teacher.validate()?;
        self.competence.validate()?;
        self.modes.validate()
    }
}
