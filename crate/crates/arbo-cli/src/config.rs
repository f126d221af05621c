//! Run configuration file.

use std::path::{Path, PathBuf};

use arbo::control::{ObjectiveWeights, StrategyMask, SweepOptions};
use arbo::econ::StrategyReport;
use arbo::model::{ControlParams, ModelParams, StateVector};
use arbo::ode::TimeGrid;
use arbo::sensitivity::ParamDistribution;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Time grid settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Initial time (days).
    pub t0: f64,
    /// Final time (days).
    pub tf: f64,
    /// Step size (days).
    pub dt: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t0: 0.0, tf: 20.0, dt: 0.01 }
    }
}

/// Forward-backward sweep settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Convex update weight.
    pub mix: f64,
    /// Relative convergence tolerance.
    pub tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let d = SweepOptions::default();
        Self { mix: d.mix, tol: d.tol, max_iters: d.max_iters }
    }
}

/// Sensitivity study settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    /// Number of Latin hypercube draws.
    pub samples: usize,
    /// Parameter ranges; literature defaults when absent.
    pub distribution: Option<ParamDistribution>,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self { samples: 5000, distribution: None }
    }
}

/// Equilibrium scan settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Parameter varied.
    pub parameter: String,
    /// Lower end of the range.
    pub lo: f64,
    /// Upper end of the range.
    pub hi: f64,
    /// Number of grid points.
    pub steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { parameter: "beta_hv".into(), lo: 0.0, hi: 0.0877, steps: 500 }
    }
}

/// Default initial state of the control experiments.
pub fn default_initial_state() -> StateVector {
    [700.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 10_000.0, 5_000.0, 3_000.0]
}

fn default_initial_states() -> Vec<StateVector> {
    vec![default_initial_state()]
}

fn default_strategies() -> Vec<String> {
    StrategyMask::standard().into_iter().map(|m| m.name).collect()
}

/// Everything a command may need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Model parameters; every field is required.
    pub model: ModelParams,
    /// Control efficacies.
    #[serde(default = "ControlParams::baseline")]
    pub control: ControlParams,
    /// Objective weights.
    #[serde(default = "ObjectiveWeights::baseline")]
    pub weights: ObjectiveWeights,
    /// Initial states; the control command uses the first.
    #[serde(default = "default_initial_states")]
    pub initial_states: Vec<StateVector>,
    /// Integration grid.
    #[serde(default)]
    pub grid: GridConfig,
    /// Sweep settings.
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Strategies solved by the control command.
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    /// RNG seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Sensitivity settings.
    #[serde(default)]
    pub sensitivity: SensitivityConfig,
    /// Equilibrium scan settings.
    #[serde(default)]
    pub bifurcation: ScanConfig,
    /// Strategy outcomes for the ICER command.
    #[serde(default)]
    pub icer_reports: Vec<StrategyReport>,
    /// Output directory.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses a configuration from JSON text.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Validates every embedded structure.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |e: arbo::ArboError| CliError::Invalid(e.to_string());
        self.model.validate().map_err(invalid)?;
        self.control.validate().map_err(invalid)?;
        self.weights.validate().map_err(invalid)?;
        if self.initial_states.is_empty() {
            return Err(CliError::Invalid("initial_states is empty".into()));
        }
        for x in &self.initial_states {
            if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(CliError::Invalid(format!("initial state {x:?} has a negative or non-finite entry")));
            }
        }
        self.time_grid()?;
        for s in &self.strategies {
            StrategyMask::from_name(s).map_err(invalid)?;
        }
        if let Some(d) = &self.sensitivity.distribution {
            d.validate().map_err(invalid)?;
        }
        Ok(())
    }

    /// Integration grid.
    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::with_step(self.grid.t0, self.grid.tf, self.grid.dt).map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// Sweep options.
    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions { mix: self.sweep.mix, tol: self.sweep.tol, max_iters: self.sweep.max_iters, initial_guess: None }
    }

    /// Sampling distribution.
    pub fn distribution(&self) -> ParamDistribution {
        self.sensitivity.distribution.clone().unwrap_or_else(ParamDistribution::table2_default)
    }
}
