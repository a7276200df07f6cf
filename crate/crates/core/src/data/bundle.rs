use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::sensors::{Sensor, SensorSet};
use crate::signal::{SampleSeries, TriaxialSeries};

/// Nominal motion window length in seconds and its relative tolerance.
pub const WINDOW_SECONDS: f64 = 5.0;
pub const WINDOW_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LabelKind {
    Environment,
    Adl,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKind::Environment => "ENVIRONMENT",
            LabelKind::Adl => "ADL",
        })
    }
}

impl FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ENVIRONMENT" | "ENV" => Ok(LabelKind::Environment),
            "ADL" => Ok(LabelKind::Adl),
            other => Err(invalid(format!("unknown label kind '{other}'"))),
        }
    }
}

/// Signals recorded during one window, without any label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Channels<T: Real> {
    pub audio: Option<SampleSeries<T>>,
    pub motion: BTreeMap<Sensor, TriaxialSeries<T>>,
}

impl<T: Real> Channels<T> {
    pub fn available(&self) -> SensorSet {
        let mut set = SensorSet::from_sensors(self.motion.keys().copied());
        if self.audio.is_some() {
            set = set.with(Sensor::Mic);
        }
        set
    }

    pub fn is_empty(&self) -> bool {
        self.audio.is_none() && self.motion.is_empty()
    }

    /// Keeps only the channels in `sensors`.
    pub fn restricted_to(&self, sensors: SensorSet) -> Self {
        Self {
            audio: self.audio.clone().filter(|_| sensors.contains(Sensor::Mic)),
            motion: self
                .motion
                .iter()
                .filter(|(s, _)| sensors.contains(**s))
                .map(|(s, t)| (*s, t.clone()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(invalid("window has no channel"));
        }
        if self.motion.contains_key(&Sensor::Mic) {
            return Err(invalid("the microphone is not a motion sensor"));
        }
        for (sensor, tri) in &self.motion {
            let d = tri.duration_s().as_f64();
            if (d - WINDOW_SECONDS).abs() > WINDOW_TOLERANCE * WINDOW_SECONDS {
                return Err(invalid(format!(
                    "{sensor} window lasts {d} s, expected {WINDOW_SECONDS} s +/- {}%",
                    WINDOW_TOLERANCE * 100.0
                )));
            }
        }
        Ok(())
    }
}

/// One labelled recording window.
///
/// `environment` is the ground-truth scene of an activity window when known.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBundle<T: Real> {
    pub id: String,
    pub channels: Channels<T>,
    pub label: String,
    pub label_kind: LabelKind,
    pub environment: Option<String>,
}

impl<T: Real> WindowBundle<T> {
    pub fn new(
        id: impl Into<String>,
        channels: Channels<T>,
        label: impl Into<String>,
        label_kind: LabelKind,
    ) -> Result<Self> {
        channels.validate()?;
        Ok(Self {
            id: id.into(),
            channels,
            label: label.into(),
            label_kind,
            environment: None,
        })
    }

    pub fn with_environment(mut self, env: impl Into<String>) -> Self {
        self.environment = Some(env.into());
        self
    }
}

/// Joins audio-only and motion-only bundles sharing label and id; bundles
/// without a partner pass through. Output follows first-appearance order.
pub fn merge_bundles<T: Real>(bundles: Vec<WindowBundle<T>>) -> Result<Vec<WindowBundle<T>>> {
    let mut index: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut out: Vec<WindowBundle<T>> = Vec::new();
    for b in bundles {
        let key = (b.label.clone(), b.id.clone());
        let Some(&i) = index.get(&key) else {
            index.insert(key, out.len());
            out.push(b);
            continue;
        };
        let target = &mut out[i];
        if target.label_kind != b.label_kind {
            return Err(invalid(format!(
                "window '{}' of '{}' appears with label kinds {} and {}",
                b.id, b.label, target.label_kind, b.label_kind
            )));
        }
        if b.channels.audio.is_some() {
            if target.channels.audio.is_some() {
                return Err(invalid(format!(
                    "window '{}' of '{}' has two audio channels",
                    b.id, b.label
                )));
            }
            target.channels.audio = b.channels.audio;
        }
        for (sensor, tri) in b.channels.motion {
            if target.channels.motion.insert(sensor, tri).is_some() {
                return Err(invalid(format!(
                    "window '{}' of '{}' has two {sensor} channels",
                    b.id, b.label
                )));
            }
        }
        match (&target.environment, b.environment) {
            (Some(a), Some(e)) if *a != e => {
                return Err(invalid(format!(
                    "window '{}' of '{}' has environments '{a}' and '{e}'",
                    b.id, b.label
                )))
            }
            (None, Some(e)) => target.environment = Some(e),
            _ => {}
        }
        target.channels.validate()?;
    }
    Ok(out)
}
