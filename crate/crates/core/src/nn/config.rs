use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The three network families compared for every recognition stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Single small hidden layer, backpropagation.
    Mlp,
    /// Wider single hidden layer, backpropagation.
    Feedforward,
    /// Three hidden layers with L2 weight decay.
    Deep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Mlp, Preset::Feedforward, Preset::Deep];

    /// Normalizer the preset's protocol prescribes for "normalized" runs.
    pub fn protocol_normalization(self) -> NormalizationKind {
        match self {
            Preset::Mlp | Preset::Feedforward => NormalizationKind::MinMax,
            Preset::Deep => NormalizationKind::ZScore,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Mlp => "mlp",
            Preset::Feedforward => "feedforward",
            Preset::Deep => "deep",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mlp" => Ok(Preset::Mlp),
            "feedforward" | "ff" => Ok(Preset::Feedforward),
            "deep" | "dnn" => Ok(Preset::Deep),
            other => Err(invalid(format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationKind {
    None,
    MinMax,
    ZScore,
}

impl fmt::Display for NormalizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationKind::None => "none",
            NormalizationKind::MinMax => "minmax",
            NormalizationKind::ZScore => "zscore",
        })
    }
}

impl FromStr for NormalizationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(NormalizationKind::None),
            "minmax" | "min-max" => Ok(NormalizationKind::MinMax),
            "zscore" | "z-score" => Ok(NormalizationKind::ZScore),
            other => Err(invalid(format!("unknown normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Softmax,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub preset: Preset,
    pub hidden_layers: Vec<usize>,
    pub output: OutputActivation,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub iteration_budget: u64,
    pub seed: u64,
    pub normalization: NormalizationKind,
}

impl NetworkConfig {
    pub fn for_preset(preset: Preset) -> Self {
        let (hidden_layers, l2_lambda) = match preset {
            Preset::Mlp => (vec![16], 0.0),
            Preset::Feedforward => (vec![32], 0.0),
            Preset::Deep => (vec![64, 32, 16], 1e-4),
        };
        Self {
            preset,
            hidden_layers,
            output: OutputActivation::Softmax,
            learning_rate: 0.01,
            l2_lambda,
            iteration_budget: 1_000_000,
            seed: 42,
            normalization: preset.protocol_normalization(),
        }
    }

    pub fn with_normalization(mut self, kind: NormalizationKind) -> Self {
        self.normalization = kind;
        self
    }

    pub fn with_budget(mut self, iterations: u64) -> Self {
        self.iteration_budget = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() {
            return Err(invalid("at least one hidden layer is required"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(invalid("hidden layer sizes must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!("invalid learning rate {}", self.learning_rate)));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(invalid(format!("invalid l2 lambda {}", self.l2_lambda)));
        }
        Ok(())
    }
}
