//! Experiment configuration files.
//!
//! A config is one JSON object. Physical quantities carry their unit in the
//! key name (`_mhz`, `_ns`, `_rad`). The experiment-specific block is tagged
//! by `kind`.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vqgo_core::devices::{fixtures, CrossResonancePair, FourQubitDevice};
use vqgo_core::{CostBackend, OptimizerConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Inner optimizer settings; `seed` inside is ignored in favour of
    /// seeds derived from the top-level `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    CnotSweep(CnotSweepConfig),
    SyndromeSweep(SyndromeSweepConfig),
    CartanMap(CartanMapConfig),
    SingleOptimize(SingleOptimizeConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::CnotSweep(_) => "cnot_sweep",
            Experiment::SyndromeSweep(_) => "syndrome_sweep",
            Experiment::CartanMap(_) => "cartan_map",
            Experiment::SingleOptimize(_) => "single_optimize",
        }
    }

    fn default_restarts(&self) -> usize {
        match self {
            Experiment::CartanMap(_) => 3,
            _ => OptimizerConfig::default().restarts,
        }
    }
}

/// Evenly spaced gate times `start, start + step, ...` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start_ns: 0.0,
            stop_ns: 750.0,
            step_ns: 7.5,
        }
    }
}

impl TimeGrid {
    pub fn single(t_ns: f64) -> Self {
        Self {
            start_ns: t_ns,
            stop_ns: t_ns,
            step_ns: 1.0,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_ns - self.start_ns) / self.step_ns + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start_ns + k as f64 * self.step_ns).collect()
    }

    fn validate(&self) -> Result<(), String> {
        let finite = self.start_ns.is_finite() && self.stop_ns.is_finite() && self.step_ns.is_finite();
        if !finite || self.start_ns < 0.0 || self.stop_ns < self.start_ns || self.step_ns <= 0.0 {
            return Err(format!(
                "t_sweep needs 0 <= start_ns <= stop_ns and step_ns > 0, got {self:?}"
            ));
        }
        Ok(())
    }
}

fn default_bounds() -> [f64; 2] {
    [0.0, 200.0]
}

fn default_t_opt() -> f64 {
    75.0
}

fn default_depth() -> usize {
    2
}

fn default_outer_iterations() -> usize {
    200
}

fn default_outer_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnotSweepConfig {
    pub delta_mhz: f64,
    pub g_mhz: f64,
    pub phi_rad: f64,
    pub crosstalk_eps: Vec<f64>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_t_opt")]
    pub optimize_t_ns: f64,
    pub omega0_mhz: f64,
    #[serde(default = "default_bounds")]
    pub amplitude_bounds_mhz: [f64; 2],
    #[serde(default = "default_outer_iterations")]
    pub outer_max_iterations: usize,
    #[serde(default = "default_outer_tolerance")]
    pub outer_cost_tolerance: f64,
    #[serde(default)]
    pub t_sweep: TimeGrid,
}

impl Default for CnotSweepConfig {
    fn default() -> Self {
        Self {
            delta_mhz: 200.0,
            g_mhz: 5.0,
            phi_rad: FRAC_PI_4,
            crosstalk_eps: vec![0.0, 0.1, 1.0],
            depth: 2,
            optimize_t_ns: 75.0,
            omega0_mhz: 50.0,
            amplitude_bounds_mhz: default_bounds(),
            outer_max_iterations: 200,
            outer_cost_tolerance: 1e-12,
            t_sweep: TimeGrid::default(),
        }
    }
}

impl CnotSweepConfig {
    pub fn pair(&self, eps: f64) -> CrossResonancePair {
        CrossResonancePair {
            delta_mhz: self.delta_mhz,
            g_mhz: self.g_mhz,
            eps,
            phi_rad: self.phi_rad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crosstalk {
    Off,
    On,
}

impl Crosstalk {
    pub fn as_str(self) -> &'static str {
        match self {
            Crosstalk::Off => "off",
            Crosstalk::On => "on",
        }
    }
}

/// How the two source layers of the syndrome circuit relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LayerSigns {
    /// Two identical layers with the same amplitudes.
    #[default]
    Shared,
    /// First layer driven with `-omega`, second with `+omega`.
    Opposite,
}

fn default_crosstalk() -> Vec<Crosstalk> {
    vec![Crosstalk::Off, Crosstalk::On]
}

fn default_search_restarts() -> Option<usize> {
    Some(1)
}

fn default_true() -> bool {
    true
}

fn default_syndrome_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyndromeSweepConfig {
    /// Data-qubit pairs; the bundled four-qubit fixture when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<[CrossResonancePair; 4]>,
    #[serde(default = "default_crosstalk")]
    pub crosstalk: Vec<Crosstalk>,
    #[serde(default)]
    pub layer_signs: LayerSigns,
    #[serde(default = "default_t_opt")]
    pub optimize_t_ns: f64,
    pub omega0_mhz: [f64; 4],
    #[serde(default = "default_bounds")]
    pub amplitude_bounds_mhz: [f64; 2],
    #[serde(default = "default_outer_iterations")]
    pub outer_max_iterations: usize,
    #[serde(default = "default_syndrome_tolerance")]
    pub outer_cost_tolerance: f64,
    /// Restarts per amplitude evaluation during the outer search.
    #[serde(default = "default_search_restarts")]
    pub search_restarts: Option<usize>,
    #[serde(default = "default_true")]
    pub warm_start: bool,
    #[serde(default)]
    pub t_sweep: TimeGrid,
}

impl SyndromeSweepConfig {
    pub fn device(&self, crosstalk: Crosstalk) -> FourQubitDevice {
        let dev = match self.pairs {
            Some(pairs) => FourQubitDevice { pairs },
            None => fixtures::four_qubit_table().device(),
        };
        match crosstalk {
            Crosstalk::On => dev,
            Crosstalk::Off => dev.without_crosstalk(),
        }
    }
}

fn default_grid_points() -> usize {
    9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartanMapConfig {
    /// Points per axis over `[0, pi/4]`.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

/// A named or parametrized gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSpec {
    Cnot,
    Swap,
    Identity { n_qubits: usize },
    HaarSpecialUnitary { n_qubits: usize, seed: u64 },
    Canonical { c_rad: [f64; 3] },
    CrossResonance { pair: CrossResonancePair, omega_mhz: f64, t_ns: f64 },
    Tpcx { pair: CrossResonancePair, omega_mhz: f64, t_ns: f64 },
    SyndromeTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleOptimizeConfig {
    pub target: GateSpec,
    pub sources: Vec<GateSpec>,
    #[serde(default)]
    pub backend: CostBackend,
}

impl ExperimentConfig {
    /// Parses and validates a config; diagnostics carry line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }

    pub fn to_compact_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Optimizer settings with the experiment's default restart count.
    pub fn optimizer(&self) -> OptimizerConfig {
        self.optimizer.unwrap_or(OptimizerConfig {
            restarts: self.experiment.default_restarts(),
            ..OptimizerConfig::default()
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        let opt = self.optimizer();
        opt.validate().map_err(|e| format!("optimizer: {e}"))?;
        let bounds_ok = |b: [f64; 2]| {
            vqgo_core::optimkit::AmplitudeBounds::new(b[0], b[1])
                .map(|_| ())
                .map_err(|e| format!("amplitude_bounds_mhz: {e}"))
        };
        let positive_t = |t: f64, name: &str| {
            if t.is_finite() && t >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and >= 0, got {t}"))
            }
        };
        match &self.experiment {
            Experiment::CnotSweep(c) => {
                if c.crosstalk_eps.is_empty() {
                    return Err("crosstalk_eps must list at least one case".into());
                }
                for &eps in &c.crosstalk_eps {
                    c.pair(eps).validate().map_err(|e| e.to_string())?;
                }
                if c.depth == 0 {
                    return Err("depth must be >= 1".into());
                }
                positive_t(c.optimize_t_ns, "optimize_t_ns")?;
                bounds_ok(c.amplitude_bounds_mhz)?;
                if !(c.omega0_mhz >= c.amplitude_bounds_mhz[0] && c.omega0_mhz <= c.amplitude_bounds_mhz[1]) {
                    return Err(format!("omega0_mhz {} lies outside the amplitude bounds", c.omega0_mhz));
                }
                if c.outer_max_iterations == 0 || c.outer_cost_tolerance.is_nan() || c.outer_cost_tolerance <= 0.0 {
                    return Err("outer loop settings must be positive".into());
                }
                c.t_sweep.validate()
            }
            Experiment::SyndromeSweep(s) => {
                if s.crosstalk.is_empty() {
                    return Err("crosstalk must list at least one setting".into());
                }
                s.device(Crosstalk::On).validate().map_err(|e| e.to_string())?;
                positive_t(s.optimize_t_ns, "optimize_t_ns")?;
                bounds_ok(s.amplitude_bounds_mhz)?;
                if s.omega0_mhz.iter().any(|w| !(*w >= s.amplitude_bounds_mhz[0] && *w <= s.amplitude_bounds_mhz[1])) {
                    return Err("omega0_mhz lies outside the amplitude bounds".into());
                }
                if s.outer_max_iterations == 0 || s.outer_cost_tolerance.is_nan() || s.outer_cost_tolerance <= 0.0 || s.search_restarts == Some(0) {
                    return Err("outer loop settings must be positive".into());
                }
                s.t_sweep.validate()
            }
            Experiment::CartanMap(m) => {
                if m.grid_points < 2 {
                    return Err(format!("grid_points must be >= 2, got {}", m.grid_points));
                }
                if m.depth == 0 {
                    return Err("depth must be >= 1".into());
                }
                Ok(())
            }
            Experiment::SingleOptimize(s) => {
                if s.sources.is_empty() {
                    return Err("sources must list at least one gate".into());
                }
                Ok(())
            }
        }
    }
}
