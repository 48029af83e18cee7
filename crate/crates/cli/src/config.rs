use std::fmt;
use std::path::Path;

use redundancy_core::{PolicyParams, SimSettings, Threshold};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Lambda,
    /// Both thresholds at once.
    T,
    T2,
    D,
    P,
    NServers,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Lambda => "lambda",
            Axis::T => "t",
            Axis::T2 => "t2",
            Axis::D => "d",
            Axis::P => "p",
            Axis::NServers => "n_servers",
        }
    }

    fn is_integral(self) -> bool {
        matches!(self, Axis::D | Axis::NServers)
    }

    fn admits_infinity(self) -> bool {
        matches!(self, Axis::T | Axis::T2)
    }

    /// `base` with this axis set to `value`. The result is not validated.
    pub fn apply(self, base: &PolicyParams, value: Threshold) -> PolicyParams {
        let mut p = *base;
        let v = value.to_f64();
        match self {
            Axis::Lambda => p.lambda = v,
            Axis::T => {
                p.t1 = value;
                p.t2 = value;
            }
            Axis::T2 => p.t2 = value,
            Axis::D => p.d = v as usize,
            Axis::P => p.p = v,
            Axis::NServers => p.n_servers = v as usize,
        }
        p
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Column requested from a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// Analytic conditional mean response time.
    Tau,
    PLoss,
    /// Same value as `tau`; kept for side-by-side columns with `tau_sim`.
    TauAnalytic,
    TauSim,
    TauSimCi,
    PLossSim,
    PLossSimCi,
    /// `|τ̂ − τ| / τ`.
    Gap,
    /// Percentage improvement over random routing, `100(τ_rand − τ)/τ_rand`.
    Improvement,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Tau => "tau",
            Output::PLoss => "p_loss",
            Output::TauAnalytic => "tau_analytic",
            Output::TauSim => "tau_sim",
            Output::TauSimCi => "tau_sim_ci",
            Output::PLossSim => "p_loss_sim",
            Output::PLossSimCi => "p_loss_sim_ci",
            Output::Gap => "gap",
            Output::Improvement => "improvement",
        }
    }

    pub fn needs_simulation(self) -> bool {
        matches!(
            self,
            Output::TauSim | Output::TauSimCi | Output::PLossSim | Output::PLossSimCi | Output::Gap
        )
    }

    pub fn needs_analysis(self) -> bool {
        !matches!(
            self,
            Output::TauSim | Output::TauSimCi | Output::PLossSim | Output::PLossSimCi
        )
    }
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Tau, Output::PLoss]
}

/// One experiment file. Every command reads `base`; `sweep` also needs
/// `axis` and `values`, `simulate` and `validate` use `sim`, and
/// `validate` needs `n_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: PolicyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Threshold>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSettings>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_grid: Vec<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Simulation settings, with the seed replaced when one is given.
    pub fn sim_settings(&self, seed: Option<u64>) -> SimSettings {
        let mut s = self.sim.clone().unwrap_or_default();
        if let Some(seed) = seed {
            s.seed = seed;
        }
        s
    }

    pub fn validate_sweep(&self) -> CliResult<(Axis, &[Threshold])> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let Some(axis) = self.axis else {
            return bad("sweep needs an `axis`".into());
        };
        if self.values.is_empty() {
            return bad("sweep needs a non-empty `values` list".into());
        }
        if self.outputs.is_empty() {
            return bad("sweep needs at least one entry in `outputs`".into());
        }
        for v in &self.values {
            match v {
                Threshold::Infinite if !axis.admits_infinity() => {
                    return bad(format!("axis {axis} does not accept \"inf\""));
                }
                Threshold::Finite(x) if axis.is_integral() && x.fract() != 0.0 => {
                    return bad(format!("axis {axis} needs integer values, got {x}"));
                }
                Threshold::Finite(x) if !x.is_finite() || *x < 0.0 => {
                    return bad(format!("axis value {x} must be non-negative"));
                }
                _ => {}
            }
        }
        if self
            .values
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return bad("`values` must be strictly increasing".into());
        }
        Ok((axis, &self.values))
    }

    pub fn validate_grid(&self) -> CliResult<&[usize]> {
        if self.n_grid.is_empty() {
            return Err(CliError::Config(
                "validate needs a non-empty `n_grid`".into(),
            ));
        }
        Ok(&self.n_grid)
    }
}
