use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::harness::{ExperimentConfig, Task};
use crate::loss::{LossKind, DEFAULT_EPSILON};
use crate::scheduler::ScheduleConfig;

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// JSON experiment configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl CliConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        field
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("config is missing `{name}`")))
    }

    pub fn schedule(&self) -> Result<&ScheduleConfig, CliError> {
        let s = Self::require(&self.schedule, "schedule")?;
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        Ok(Self::require(&self.input, "input")?)
    }

    pub fn output_dir(&self) -> Result<&Path, CliError> {
        Ok(Self::require(&self.output_dir, "output_dir")?)
    }

    /// Builds and validates the experiment part of the configuration.
    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let loss = *Self::require(&self.loss, "loss")?;
        let schedule = match (&self.schedule, loss) {
            (Some(_), LossKind::Gfl) => Some(self.schedule()?.clone()),
            (Some(_), _) => {
                return Err(CliError::Usage(
                    "`schedule` only applies to the gfl loss".into(),
                ))
            }
            (None, _) => None,
        };
        let cfg = ExperimentConfig {
            task: *Self::require(&self.task, "task")?,
            loss,
            epsilon: self.epsilon,
            schedule,
            steps: *Self::require(&self.steps, "steps")?,
            learning_rate: *Self::require(&self.learning_rate, "learning_rate")?,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "task": "denoising", "loss": "gfl", "epsilon": 0.001,
        "schedule": {"omega0": 255, "omegaF": 10, "epochs": 100, "stages": 2,
                     "mode": "static", "interpretation": "literal"},
        "steps": 2000, "learning_rate": 0.5, "seed": 7,
        "input": "in.png", "output_dir": "out"
    }"#;

    #[test]
    fn parses_full_config() {
        let cfg = CliConfig::from_json(FULL).unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.steps, 2000);
        assert_eq!(exp.seed, 7);
        assert_eq!(exp.schedule.unwrap().epochs, 100);
    }

    #[test]
    fn defaults_applied() {
        let cfg = CliConfig::from_json(r#"{"loss": "mse"}"#).unwrap();
        assert_eq!(cfg.epsilon, 0.001);
        assert_eq!(cfg.seed, 0);
        assert!(matches!(cfg.experiment(), Err(CliError::Usage(_))));
    }

    #[test]
    fn misspelled_key_rejected() {
        let err = CliConfig::from_json(r#"{"learning_rte": 0.1}"#).unwrap_err();
        assert!(matches!(err, CliError::Usage(m) if m.contains("learning_rte")));
        let nested = FULL.replace("\"stages\"", "\"stage\"");
        assert!(CliConfig::from_json(&nested).is_err());
    }

    #[test]
    fn schedule_requires_gfl() {
        let cfg = CliConfig::from_json(&FULL.replace("\"gfl\"", "\"mse\"")).unwrap();
        assert!(cfg.experiment().is_err());
    }
}
