use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::GoalGrid;
use crate::error::{Error, Result};
use crate::human::HumanPolicyParams;
use crate::observation::ObservationModelParams;
use crate::sim::EnvParams;
use crate::skills::{FineSkillParams, ImpedanceParams, SkillThresholds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub min_g: f64,
    pub max_g: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min_g: 0.0,
            max_g: 500.0,
            count: 101,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<GoalGrid> {
        GoalGrid::uniform(self.min_g, self.max_g, self.count)
    }
}

/// Everything needed to run one episode. Missing JSON fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub env: EnvParams,
    pub obs: ObservationModelParams,
    pub gains: ImpedanceParams,
    pub thresholds: SkillThresholds,
    pub skills: FineSkillParams,
    pub grid: GridSpec,
    pub human: HumanPolicyParams,
    /// Episode length limit (s).
    pub max_t: f64,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            env: EnvParams::default(),
            obs: ObservationModelParams::default(),
            gains: ImpedanceParams::default(),
            thresholds: SkillThresholds::default(),
            skills: FineSkillParams::default(),
            grid: GridSpec::default(),
            human: HumanPolicyParams::default(),
            max_t: 30.0,
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.obs.validate()?;
        self.gains.validate()?;
        self.thresholds.validate()?;
        self.skills.validate()?;
        self.human.validate(self.env.capacity_g)?;
        self.grid.build()?;
        if self.grid.min_g < 0.0 || self.grid.max_g > self.env.capacity_g {
            return Err(Error::Config(format!(
                "grid [{}, {}] must lie within [0, {}]",
                self.grid.min_g, self.grid.max_g, self.env.capacity_g
            )));
        }
        if !(self.max_t.is_finite() && self.max_t > 0.0) {
            return Err(Error::Config(format!(
                "max_t must be positive, got {}",
                self.max_t
            )));
        }
        Ok(())
    }

    /// Number of control ticks that fit in `max_t`.
    pub fn max_ticks(&self) -> u64 {
        // the epsilon absorbs representation error in max_t / dt
        (self.max_t / self.env.dt + 1e-9).floor() as u64
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = EpisodeConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.max_ticks(), 1500);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg =
            EpisodeConfig::from_json(r#"{"seed": 9, "human": {"true_goal_g": 200}}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.human.true_goal_g, 200.0);
        assert_eq!(cfg.obs, ObservationModelParams::default());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = EpisodeConfig::default().with_seed(77);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(EpisodeConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"unknown": 1}"#,
            r#"{"env": {"dt": 0.5}}"#,
            r#"{"grid": {"min_g": 0, "max_g": 900, "count": 10}}"#,
            r#"{"max_t": 0}"#,
            r#"{"obs": {"sigma_h": -1}}"#,
            r#"not json"#,
        ] {
            let err = EpisodeConfig::from_json(text).unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
    }
}
