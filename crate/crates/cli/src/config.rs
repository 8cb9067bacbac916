//! Pipeline configuration. Every field has a default, so an empty file (or
//! none at all) runs the reference setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ablation_core::calib::{CalibrationSettings, GpInputs, GpSettings, LassoSettings, NelderMeadSettings};
use ablation_core::chem::{SiteDensity, DEFAULT_SITE_DENSITY};
use ablation_core::surface::SolverSettings;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Root of every file the pipeline reads and writes.
    pub workdir: PathBuf,
    /// Total site density `B`, mol/m^2.
    pub site_density: f64,
    pub scenarios: ScenarioConfig,
    pub split: SplitConfig,
    pub solver: SolverConfig,
    pub optimizer: OptimizerConfig,
    pub lasso: LassoConfig,
    pub gp: GpConfig,
    pub propagation: PropagationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            workdir: PathBuf::from("ablation-run"),
            site_density: DEFAULT_SITE_DENSITY,
            scenarios: ScenarioConfig::default(),
            split: SplitConfig::default(),
            solver: SolverConfig::default(),
            optimizer: OptimizerConfig::default(),
            lasso: LassoConfig::default(),
            gp: GpConfig::default(),
            propagation: PropagationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scenario directory, relative to `workdir` unless absolute.
    pub dir: PathBuf,
    /// Seed of the synthetic generator; the global seed when absent.
    pub generator_seed: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("scenarios"),
            generator_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub calibration: Vec<f64>,
    pub validation: Vec<f64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            calibration: vec![20.0, 30.0, 40.0],
            validation: vec![25.0, 35.0],
        }
    }
}

impl SplitConfig {
    pub fn all(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.calibration.iter().chain(&self.validation).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub relative_tolerance: f64,
    pub max_iterations: usize,
    pub scan_intervals: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            relative_tolerance: s.relative_tolerance,
            max_iterations: s.max_iterations,
            scan_intervals: s.scan_intervals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_evaluations: usize,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let s = NelderMeadSettings::default();
        Self {
            max_evaluations: s.max_evaluations,
            tolerance: s.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoConfig {
    pub folds: usize,
    pub path_length: usize,
    pub path_ratio: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        let s = LassoSettings::default();
        Self {
            folds: s.folds,
            path_length: s.path_length,
            path_ratio: s.path_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub noise: f64,
    pub starts: usize,
    pub inputs: GpInputs,
}

impl Default for GpConfig {
    fn default() -> Self {
        let s = GpSettings::default();
        Self {
            noise: s.noise,
            starts: s.starts,
            inputs: GpInputs::Lasso,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub samples: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { samples: 100 }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let config = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::io(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Failure::io(format!("invalid config {}: {e}", p.display())))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let s = &self.split;
        if s.calibration.is_empty() {
            return Err(Failure::io("config: no calibration altitudes"));
        }
        if let Some(a) = s.calibration.iter().find(|a| s.validation.contains(a)) {
            return Err(Failure::io(format!(
                "config: altitude {a} km is listed for both calibration and validation"
            )));
        }
        SiteDensity::new(self.site_density).map_err(|e| Failure::io(format!("config: {e}")))?;
        if self.propagation.samples == 0 {
            return Err(Failure::io("config: propagation.samples must be >= 1"));
        }
        if !(self.gp.noise >= 0.0) {
            return Err(Failure::io("config: gp.noise must be >= 0"));
        }
        Ok(())
    }

    pub fn site_density(&self) -> SiteDensity {
        SiteDensity::new(self.site_density).expect("validated")
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            relative_tolerance: self.solver.relative_tolerance,
            max_iterations: self.solver.max_iterations,
            scan_intervals: self.solver.scan_intervals,
        }
    }

    pub fn nelder_mead(&self) -> NelderMeadSettings {
        NelderMeadSettings {
            max_evaluations: self.optimizer.max_evaluations,
            tolerance: self.optimizer.tolerance,
        }
    }

    pub fn calibration(&self) -> CalibrationSettings {
        CalibrationSettings {
            lasso: LassoSettings {
                folds: self.lasso.folds,
                path_length: self.lasso.path_length,
                path_ratio: self.lasso.path_ratio,
                ..LassoSettings::default()
            },
            gp: GpSettings {
                noise: self.gp.noise,
                starts: self.gp.starts,
                seed: self.seed,
                ..GpSettings::default()
            },
            gp_inputs: self.gp.inputs,
            ..CalibrationSettings::default()
        }
    }

    pub fn scenario_dir(&self) -> PathBuf {
        self.workdir.join(&self.scenarios.dir)
    }

    pub fn results_dir(&self) -> PathBuf {
        self.workdir.join("results")
    }

    pub fn calibration_dir(&self) -> PathBuf {
        self.workdir.join("calibration")
    }

    pub fn propagation_dir(&self) -> PathBuf {
        self.workdir.join("propagation")
    }

    pub fn artifact_path(&self) -> PathBuf {
        self.calibration_dir().join("gp_model.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_setup() {
        let c = PipelineConfig::default();
        assert_eq!(c.site_density, 1e-5);
        assert_eq!(c.split.calibration, [20.0, 30.0, 40.0]);
        assert_eq!(c.split.validation, [25.0, 35.0]);
        assert_eq!(c.propagation.samples, 100);
        assert_eq!(c.gp.noise, 0.005);
        assert_eq!(c.optimizer.max_evaluations, 500);
        c.validate().unwrap();
    }

    #[test]
    fn empty_toml_gives_defaults() {
        let c: PipelineConfig = toml::from_str("").unwrap();
        assert_eq!(c, PipelineConfig::default());
    }

    #[test]
    fn overlapping_split_is_rejected() {
        let c: PipelineConfig = toml::from_str("[split]\ncalibration = [20.0, 25.0]\nvalidation = [25.0]\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sead = 3\n").is_err());
    }
}
