//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::StrategyKind;
use crate::arrivals::{validate_specs, BlockTypeSpec, DEFAULT_MINERS};
use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LambdaH,
    NakamotoProb,
    Persistence,
    PrivateAttack,
    Counterexample,
    DecayNoNakamoto,
    DecayOvertake,
    PhaseDiagram,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::LambdaH => "lambda-h",
            Experiment::NakamotoProb => "nakamoto-prob",
            Experiment::Persistence => "persistence",
            Experiment::PrivateAttack => "private-attack",
            Experiment::Counterexample => "counterexample",
            Experiment::DecayNoNakamoto => "decay-no-nakamoto",
            Experiment::DecayOvertake => "decay-overtake",
            Experiment::PhaseDiagram => "phase-diagram",
        }
    }
}

/// Experiment-specific settings. Only the ones an experiment reads are checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Window half-length; defaults to `delta`.
    pub q: Option<f64>,
    /// Window centre for `nakamoto-prob`; defaults to `horizon / 3`.
    pub tau_q: Option<f64>,
    pub strategies: Option<Vec<StrategyKind>>,
    pub restart_at_reveal: Option<bool>,
    pub n_steps: Option<u64>,
    pub interval_lengths: Option<Vec<f64>>,
    pub window: Option<f64>,
    pub tprimes: Option<Vec<f64>>,
    pub lead_in: Option<f64>,
    pub tail: Option<f64>,
    pub ratios: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub block_types: Vec<BlockTypeSpec>,
    pub delta: f64,
    pub horizon: f64,
    pub n_trials: u64,
    pub root_seed: u64,
    #[serde(default = "default_miners")]
    pub n_miners: u32,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub params: Params,
}

fn default_miners() -> u32 {
    DEFAULT_MINERS
}

fn default_confidence() -> f64 {
    0.95
}

fn nonempty(name: &'static str, xs: &Option<Vec<f64>>) -> Result<()> {
    match xs {
        Some(v) if v.is_empty() => Err(SimError::param(name, "sweep grid is empty")),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| SimError::InvalidInput(format!("config: {e}")))?;
        cfg.apply_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn apply_defaults(&mut self) {
        // Types listed without ids are numbered in order.
        if self.block_types.iter().all(|s| s.type_id == 0) {
            for (i, spec) in self.block_types.iter_mut().enumerate() {
                spec.type_id = i as u16;
            }
        }
    }

    pub fn q(&self) -> f64 {
        self.params.q.unwrap_or(self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        validate_specs(&self.block_types)?;
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(SimError::param("delta", format!("must be finite and >= 0, got {}", self.delta)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::param("horizon", format!("must be finite and > 0, got {}", self.horizon)));
        }
        if self.n_trials == 0 {
            return Err(SimError::param("n_trials", "must be at least 1"));
        }
        if self.n_miners == 0 {
            return Err(SimError::param("n_miners", "must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(SimError::param("confidence", format!("must lie in (0, 1), got {}", self.confidence)));
        }
        let p = &self.params;
        let uses_q = matches!(
            self.experiment,
            Experiment::NakamotoProb | Experiment::Persistence | Experiment::DecayNoNakamoto
        );
        if uses_q && !(self.q().is_finite() && self.q() > 0.0) {
            return Err(SimError::param("q", format!("must be finite and > 0, got {}", self.q())));
        }
        nonempty("interval_lengths", &p.interval_lengths)?;
        nonempty("tprimes", &p.tprimes)?;
        nonempty("ratios", &p.ratios)?;
        if p.strategies.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(SimError::param("strategies", "sweep grid is empty"));
        }
        match self.experiment {
            Experiment::DecayNoNakamoto if p.interval_lengths.is_none() => {
                Err(SimError::param("interval_lengths", "required by decay-no-nakamoto"))
            }
            Experiment::DecayOvertake if p.tprimes.is_none() || p.window.is_none() => {
                Err(SimError::param("tprimes", "decay-overtake requires `tprimes` and `window`"))
            }
            Experiment::PhaseDiagram if p.ratios.is_none() => Err(SimError::param("ratios", "required by phase-diagram")),
            Experiment::Counterexample | Experiment::PhaseDiagram if self.block_types.len() != 1 => Err(SimError::param(
                "block_types",
                format!("{} takes exactly one unit-score block type", self.experiment.as_str()),
            )),
            _ => Ok(()),
        }
    }

    /// First 16 hex digits of the SHA-256 of the config's canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}
