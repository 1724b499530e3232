//! Flat JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use ubo_core::benchlab::{Benchmark, ExperimentSettings, Placement};
use ubo_core::engine::Strategy;
use ubo_core::gp::KernelFamily;

use crate::CliError;

/// On-disk configuration. Every field is optional; missing ones take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub strategy: String,
    pub benchmark: String,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub beta_scale: f64,
    pub budget_multiplier: usize,
    pub init_multiplier: usize,
    pub kernel: String,
    pub refit_every: usize,
    /// `random` or `outside` (redraw until the argmax is outside the box).
    pub placement: String,
    /// Fixed noise variance on standardised outputs; fitted when absent.
    pub noise: Option<f64>,
    /// Strategies for `compare`.
    pub strategies: Vec<String>,
    /// Repetitions for `compare`; seeds are `seed, seed + 1, ...`.
    pub reps: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            strategy: "ubo".into(),
            benchmark: "beale".into(),
            seed: 0,
            epsilon: 0.05,
            delta: 0.1,
            beta_scale: 0.2,
            budget_multiplier: 10,
            init_multiplier: 3,
            kernel: "se".into(),
            refit_every: 1,
            placement: "random".into(),
            noise: None,
            strategies: Strategy::ALL.iter().map(|s| s.name().to_string()).collect(),
            reps: 30,
        }
    }
}

fn field<T, E: std::fmt::Display>(name: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("{name}: {e}")))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn strategy(&self) -> Result<Strategy, CliError> {
        field("strategy", self.strategy.parse())
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>, CliError> {
        if self.strategies.is_empty() {
            return Err(CliError::Config("strategies: at least one strategy is required".into()));
        }
        self.strategies.iter().map(|s| field("strategies", s.parse())).collect()
    }

    pub fn benchmark(&self) -> Result<Benchmark, CliError> {
        field("benchmark", self.benchmark.parse())
    }

    /// Checks every field and builds the shared experiment settings.
    pub fn settings(&self) -> Result<ExperimentSettings<f64>, CliError> {
        let bad = |name: &str, msg: String| Err(CliError::Config(format!("{name}: {msg}")));
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad("epsilon", format!("must be > 0, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta", format!("must lie in (0, 1), got {}", self.delta));
        }
        if !(self.beta_scale > 0.0) || !self.beta_scale.is_finite() {
            return bad("beta_scale", format!("must be > 0, got {}", self.beta_scale));
        }
        if self.budget_multiplier == 0 {
            return bad("budget_multiplier", "must be >= 1".into());
        }
        if self.init_multiplier == 0 {
            return bad("init_multiplier", "must be >= 1".into());
        }
        if self.refit_every == 0 {
            return bad("refit_every", "must be >= 1".into());
        }
        if let Some(v) = self.noise {
            if !(v > 0.0) || !v.is_finite() {
                return bad("noise", format!("must be > 0, got {v}"));
            }
        }
        let kernel: KernelFamily = field("kernel", self.kernel.parse())?;
        let placement: Placement = field("placement", self.placement.parse())?;
        let d = self.benchmark()?.dim();
        if self.init_multiplier * d < 2 {
            return bad("init_multiplier", format!("gives {} initial points, need >= 2", self.init_multiplier * d));
        }
        Ok(ExperimentSettings {
            epsilon: self.epsilon,
            delta: self.delta,
            beta_scale: self.beta_scale,
            budget_multiplier: self.budget_multiplier,
            init_multiplier: self.init_multiplier,
            kernel,
            refit_every: self.refit_every,
            noise: self.noise,
            placement,
        })
    }
}
