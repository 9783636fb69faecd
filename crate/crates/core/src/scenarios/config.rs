//! Run configuration: a JSON document with `system`, `bath` and `run` blocks,
//! all quantities dimensionless in units of λ. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "system": { "omega_s": 100, "delta_so_over_omega_s": 0.4, "drive": 500 },
//!   "bath":   { "u2": 0.1, "detuning": 0.1, "temperature": 1, "temperature_unit": "omega_s" },
//!   "run":    { "t_max": 10, "points": 1001, "theta": 3.141592653589793, "path": "both" }
//! }
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, OccupationStrategy, OpenSystem};
use crate::engine::{EvolveConfig, RateSource};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::solution::InitialAngles;

/// Coupling weight used by the figure scenarios.
pub const DEFAULT_U2: f64 = 0.1;
/// Above this u²/ω_s the weak-coupling assumption is doubtful.
pub const REGIME_WARNING_RATIO: f64 = 0.1;
/// Kernel-grid spacing used with exact quadrature unless configured.
pub const DEFAULT_QUADRATURE_SPACING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemBlock,
    pub bath: BathBlock,
    #[serde(default)]
    pub run: RunBlock,
}

/// Either `omega_so` with `d_eps`, or `omega_s` with `delta_so_over_omega_s`;
/// `drive` always.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_so: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_so_over_omega_s: Option<f64>,
    pub drive: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureUnit {
    #[default]
    OmegaS,
    Lambda,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    #[default]
    Resonant,
    Quadrature,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    #[default]
    Ode,
    Analytic,
    Both,
}

impl PathChoice {
    pub fn wants_ode(self) -> bool {
        matches!(self, PathChoice::Ode | PathChoice::Both)
    }

    pub fn wants_analytic(self) -> bool {
        matches!(self, PathChoice::Analytic | PathChoice::Both)
    }
}

fn default_u2() -> f64 {
    DEFAULT_U2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    #[serde(default = "default_u2")]
    pub u2: f64,
    /// (ω_0 − ω)/λ.
    pub detuning: f64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub temperature_unit: TemperatureUnit,
    #[serde(default)]
    pub strategy: StrategyChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ir_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub t_max: f64,
    /// Output samples including both ends of [0, t_max].
    pub points: usize,
    pub theta: f64,
    pub phi: f64,
    pub include_nl: bool,
    pub include_lamb: bool,
    pub path: PathChoice,
    pub rates: bool,
    pub entropy: bool,
    pub tolerance: f64,
    /// Tabulate kernels with this spacing instead of evaluating on the fly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_spacing: Option<f64>,
}

impl Default for RunBlock {
    fn default() -> Self {
        RunBlock {
            t_max: 10.0,
            points: 1001,
            theta: PI,
            phi: 0.0,
            include_nl: false,
            include_lamb: false,
            path: PathChoice::Ode,
            rates: true,
            entropy: true,
            tolerance: 1e-10,
            kernel_spacing: None,
        }
    }
}

/// Command-line settings that take precedence over a configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub strategy: Option<StrategyChoice>,
    pub include_nl: bool,
    pub include_lamb: bool,
    pub path: Option<PathChoice>,
}

impl Overrides {
    pub fn apply(&self, c: &mut ScenarioConfig) {
        if let Some(t) = self.tolerance {
            c.run.tolerance = t;
        }
        if let Some(s) = self.strategy {
            c.bath.strategy = s;
        }
        c.run.include_nl |= self.include_nl;
        c.run.include_lamb |= self.include_lamb;
        if let Some(p) = self.path {
            c.run.path = p;
        }
    }
}

/// A configuration with every default filled in and every check passed.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: ScenarioConfig,
    pub system: OpenSystem,
    pub angles: InitialAngles,
    pub grid: Vec<f64>,
    pub evolve: EvolveConfig,
    pub notes: Vec<String>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(format!("`{key}` must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(format!("`{key}` must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => cfg_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let drive = positive("system.drive", s.drive)?;
        match (s.omega_so, s.delta_so_over_omega_s) {
            (Some(_), Some(_)) => Err(cfg_err(
                "give exactly one of `system.omega_so` and `system.delta_so_over_omega_s`",
            )),
            (None, None) => Err(cfg_err(
                "one of `system.omega_so` or `system.delta_so_over_omega_s` is required",
            )),
            (Some(w), None) => {
                if s.omega_s.is_some() {
                    return Err(cfg_err("`system.omega_s` goes with `delta_so_over_omega_s`, not `omega_so`"));
                }
                let d = s
                    .d_eps
                    .ok_or_else(|| cfg_err("`system.d_eps` is required with `omega_so`"))?;
                SystemParams::new(
                    positive("system.omega_so", w)?,
                    drive,
                    finite("system.d_eps", d)?,
                )
                .map_err(|e| cfg_err(format!("system: {e}")))
            }
            (None, Some(ratio)) => {
                if s.d_eps.is_some() {
                    return Err(cfg_err("`system.d_eps` goes with `omega_so`, not `delta_so_over_omega_s`"));
                }
                let ws = s
                    .omega_s
                    .ok_or_else(|| cfg_err("`system.omega_s` is required with `delta_so_over_omega_s`"))?;
                if !(-1.0..=1.0).contains(&ratio) {
                    return Err(cfg_err(format!(
                        "`system.delta_so_over_omega_s` must lie in [-1, 1], got {ratio}"
                    )));
                }
                SystemParams::from_dressed(positive("system.omega_s", ws)?, ratio, drive)
                    .map_err(|e| cfg_err(format!("system: {e}")))
            }
        }
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let system = self.system_params()?;
        let omega_s = crate::model::dressed_params(&system)?.omega_s;
        let b = &self.bath;
        if !(b.u2 >= 0.0 && b.u2.is_finite()) {
            return Err(cfg_err(format!("`bath.u2` must be non-negative, got {}", b.u2)));
        }
        finite("bath.detuning", b.detuning)?;
        if !(b.temperature >= 0.0 && b.temperature.is_finite()) {
            return Err(cfg_err(format!(
                "`bath.temperature` must be non-negative, got {}",
                b.temperature
            )));
        }
        let temperature = match b.temperature_unit {
            TemperatureUnit::OmegaS => b.temperature * omega_s,
            TemperatureUnit::Lambda => b.temperature,
        };
        let strategy = match b.strategy {
            StrategyChoice::Resonant => {
                if b.ir_cutoff.is_some() || b.omega_max.is_some() {
                    return Err(cfg_err(
                        "`bath.ir_cutoff` and `bath.omega_max` only apply to strategy \"quadrature\"",
                    ));
                }
                OccupationStrategy::ResonantApprox
            }
            StrategyChoice::Quadrature => OccupationStrategy::ExactQuadrature {
                ir_cutoff: positive("bath.ir_cutoff", b.ir_cutoff.unwrap_or(1e-6))?,
                omega_max: b.omega_max.map(|w| positive("bath.omega_max", w)).transpose()?,
            },
        };
        let bath = BathSpec {
            u2: b.u2,
            lambda: 1.0,
            omega_0: system.drive + b.detuning,
            temperature,
            strategy,
        };
        let open = OpenSystem::new(system, bath).map_err(|e| cfg_err(format!("bath: {e}")))?;

        let r = &self.run;
        let t_max = positive("run.t_max", r.t_max)?;
        if r.points < 2 {
            return Err(cfg_err("`run.points` must be at least 2"));
        }
        let angles = InitialAngles::new(r.theta, r.phi).map_err(|e| cfg_err(format!("run: {e}")))?;
        let tol = positive("run.tolerance", r.tolerance)?;
        let rate_source = match (r.kernel_spacing, b.strategy) {
            (Some(h), _) => RateSource::PrecomputedGrid {
                spacing: positive("run.kernel_spacing", h)?,
            },
            (None, StrategyChoice::Quadrature) => RateSource::PrecomputedGrid {
                spacing: DEFAULT_QUADRATURE_SPACING,
            },
            (None, StrategyChoice::Resonant) => RateSource::OnTheFly,
        };
        let mut evolve = EvolveConfig::new(t_max).with_tolerance(tol);
        evolve.include_nl = r.include_nl;
        evolve.include_lamb_shift = r.include_lamb;
        evolve.rate_source = rate_source;

        let n = r.points - 1;
        let grid: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();

        let mut notes = Vec::new();
        if b.u2 / omega_s > REGIME_WARNING_RATIO {
            let msg = format!(
                "u2/omega_s = {:.3} exceeds {REGIME_WARNING_RATIO}; weak-coupling results are doubtful",
                b.u2 / omega_s
            );
            log::warn!("{msg}");
            notes.push(msg);
        }
        Ok(ResolvedRun {
            config: self.clone(),
            system: open,
            angles,
            grid,
            evolve,
            notes,
        })
    }
}
