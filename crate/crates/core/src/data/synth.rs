//! Seeded synthetic corpora standing in for real recordings.
//!
//! Activity windows are per-label sinusoids plus Gaussian noise on every
//! motion axis; environment windows are white noise shaped by a one-pole
//! tilt filter and optional resonant bands.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bundle::{Channels, LabelKind, WindowBundle, WINDOW_SECONDS};
use crate::error::{invalid, Error, Result};
use crate::kv::{parse_fields, KvDocument};
use crate::scalar::Real;
use crate::sensors::{Sensor, SensorSet};
use crate::signal::{SampleSeries, TriaxialSeries};

pub const MOTION_RATE_HZ: f64 = 100.0;
pub const AUDIO_RATE_HZ: f64 = 8000.0;
const JITTER: (f64, f64) = (0.95, 1.05);
const RESONATOR_RADIUS: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdlProfile {
    pub label: String,
    pub frequency_hz: f64,
    pub amplitude: f64,
    pub noise_std: f64,
    /// Scene whose audio accompanies the activity when the microphone is on.
    pub environment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvProfile {
    pub label: String,
    pub rms: f64,
    pub dc_offset: f64,
    /// One-pole coefficient in (-1, 1); positive values darken the noise.
    pub tilt: f64,
    /// `(center_hz, gain)` resonances added on top of the tilted noise.
    pub bands: Vec<(f64, f64)>,
}

/// Per-sensor rest value, axis weights and gain of the activity sinusoid.
struct SensorModel {
    baseline: [f64; 3],
    weights: [f64; 3],
    gain: f64,
    phase_offset: f64,
}

fn sensor_model(sensor: Sensor) -> SensorModel {
    match sensor {
        Sensor::Acc => SensorModel {
            baseline: [0.0, 0.0, 9.81],
            weights: [0.35, 0.45, 0.82],
            gain: 1.0,
            phase_offset: 0.0,
        },
        Sensor::Mag => SensorModel {
            baseline: [22.0, -5.0, -40.0],
            weights: [0.6, -0.3, 0.5],
            gain: 2.0,
            phase_offset: 0.7,
        },
        Sensor::Gyro | Sensor::Mic => SensorModel {
            baseline: [0.0, 0.0, 0.0],
            weights: [0.5, 0.3, 0.2],
            gain: 0.5,
            phase_offset: 1.4,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthPreset {
    /// The nine acoustic scenes, audio only.
    Environments,
    /// The five general activities, motion only.
    Adl,
    /// Sleeping and watching TV with motion and scene audio.
    Standing,
    /// All seven activities with motion and scene audio.
    Mixed,
}

impl fmt::Display for SynthPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthPreset::Environments => "environments",
            SynthPreset::Adl => "adl",
            SynthPreset::Standing => "standing",
            SynthPreset::Mixed => "mixed",
        })
    }
}

impl FromStr for SynthPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "environments" | "environment" | "env" => Ok(Self::Environments),
            "adl" => Ok(Self::Adl),
            "standing" => Ok(Self::Standing),
            "mixed" => Ok(Self::Mixed),
            other => Err(invalid(format!("unknown synth preset '{other}'"))),
        }
    }
}

pub fn default_environments() -> Vec<EnvProfile> {
    let env = |label: &str, rms: f64, tilt: f64, bands: &[(f64, f64)]| EnvProfile {
        label: label.to_string(),
        rms,
        dc_offset: 0.0,
        tilt,
        bands: bands.to_vec(),
    };
    vec![
        env("bar", 0.30, 0.6, &[(300.0, 2.0), (1200.0, 1.0)]),
        env("classroom", 0.12, 0.3, &[(500.0, 3.0)]),
        env("gym", 0.45, 0.2, &[(150.0, 4.0), (2500.0, 1.0)]),
        env("kitchen", 0.20, -0.3, &[(3000.0, 2.0)]),
        env("library", 0.03, 0.8, &[]),
        env("street", 0.60, 0.9, &[(90.0, 3.0)]),
        env("hall", 0.08, 0.5, &[(800.0, 1.5), (1600.0, 1.5)]),
        env("watching TV", 0.16, 0.1, &[(1000.0, 2.5), (2000.0, 1.0)]),
        env("bedroom", 0.05, 0.7, &[(60.0, 1.0)]),
    ]
}

fn adl(label: &str, frequency_hz: f64, amplitude: f64, noise_std: f64, env: &str) -> AdlProfile {
    AdlProfile {
        label: label.to_string(),
        frequency_hz,
        amplitude,
        noise_std,
        environment: Some(env.to_string()),
    }
}

pub fn default_adls() -> Vec<AdlProfile> {
    vec![
        adl("walking", 1.8, 1.5, 0.08, "street"),
        adl("running", 2.8, 5.0, 0.15, "gym"),
        adl("going upstairs", 1.5, 2.2, 0.10, "hall"),
        adl("going downstairs", 2.1, 3.0, 0.12, "hall"),
        adl("standing", 0.4, 0.15, 0.02, "classroom"),
    ]
}

pub fn default_standing() -> Vec<AdlProfile> {
    vec![
        adl("sleeping", 0.25, 0.05, 0.01, "bedroom"),
        adl("watching TV", 0.6, 0.3, 0.03, "watching TV"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: LabelKind,
    pub windows_per_label: usize,
    pub seed: u64,
    /// Channels to generate; MIC adds scene audio to activity windows.
    pub sensors: SensorSet,
    pub adl: Vec<AdlProfile>,
    pub environments: Vec<EnvProfile>,
}

impl SynthSpec {
    pub fn preset(preset: SynthPreset, windows_per_label: usize, seed: u64) -> Self {
        let full = SensorSet::ACC_MAG_GYRO;
        let (kind, sensors, adl) = match preset {
            SynthPreset::Environments => (LabelKind::Environment, SensorSet::EMPTY.with(Sensor::Mic), Vec::new()),
            SynthPreset::Adl => (LabelKind::Adl, full, default_adls()),
            SynthPreset::Standing => (LabelKind::Adl, full.with(Sensor::Mic), default_standing()),
            SynthPreset::Mixed => {
                let mut all = default_adls();
                all.extend(default_standing());
                (LabelKind::Adl, full.with(Sensor::Mic), all)
            }
        };
        Self {
            kind,
            windows_per_label,
            seed,
            sensors,
            adl,
            environments: default_environments(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self.kind {
            LabelKind::Environment => self.environments.iter().map(|e| e.label.clone()).collect(),
            LabelKind::Adl => self.adl.iter().map(|a| a.label.clone()).collect(),
        }
    }

    pub fn environment(&self, label: &str) -> Option<&EnvProfile> {
        self.environments.iter().find(|e| e.label == label)
    }

    pub fn validate(&self) -> Result<()> {
        if self.windows_per_label == 0 {
            return Err(invalid("windows per label must be at least 1"));
        }
        let labels = self.labels();
        if labels.is_empty() {
            return Err(invalid("spec defines no labels"));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.trim().is_empty() || l.contains(['\n', '\r']) {
                return Err(invalid(format!("invalid label '{l}'")));
            }
            if labels[..i].contains(l) {
                return Err(invalid(format!("duplicate label '{l}'")));
            }
        }
        for (i, e) in self.environments.iter().enumerate() {
            if !(e.rms > 0.0 && e.rms.is_finite()) || !e.dc_offset.is_finite() {
                return Err(invalid(format!("environment '{}': rms must be positive", e.label)));
            }
            if !(e.tilt.abs() < 1.0) {
                return Err(invalid(format!("environment '{}': tilt must lie in (-1, 1)", e.label)));
            }
            for &(c, g) in &e.bands {
                if !(c > 0.0 && c < AUDIO_RATE_HZ / 2.0) || !(g >= 0.0 && g.is_finite()) {
                    return Err(invalid(format!("environment '{}': invalid band {c}:{g}", e.label)));
                }
            }
            let key = |p: &EnvProfile| (p.rms, p.dc_offset, p.tilt, p.bands.clone());
            if self.environments[..i].iter().any(|o| key(o) == key(e)) {
                return Err(invalid(format!(
                    "environment '{}' duplicates another's parameters",
                    e.label
                )));
            }
        }
        if self.kind == LabelKind::Environment {
            return Ok(());
        }
        if self.sensors.motion().next().is_none() {
            return Err(invalid("activity corpora need at least one motion sensor"));
        }
        for (i, a) in self.adl.iter().enumerate() {
            if !(a.frequency_hz > 0.0 && a.frequency_hz < MOTION_RATE_HZ / 2.0) {
                return Err(invalid(format!("activity '{}': frequency out of range", a.label)));
            }
            if !(a.amplitude >= 0.0 && a.amplitude.is_finite()) || !(a.noise_std >= 0.0 && a.noise_std.is_finite()) {
                return Err(invalid(format!(
                    "activity '{}': amplitude and noise must be non-negative",
                    a.label
                )));
            }
            let key = |p: &AdlProfile| (p.frequency_hz, p.amplitude, p.noise_std);
            if self.adl[..i].iter().any(|o| key(o) == key(a)) {
                return Err(invalid(format!(
                    "activity '{}' duplicates another's parameters",
                    a.label
                )));
            }
            if self.sensors.contains(Sensor::Mic) {
                match &a.environment {
                    Some(env) if self.environment(env).is_none() => {
                        return Err(invalid(format!("activity '{}': unknown environment '{env}'", a.label)));
                    }
                    None => {
                        return Err(invalid(format!(
                            "activity '{}' needs an environment for audio",
                            a.label
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Reads a `key = value` spec. `preset` seeds the defaults; `adl` and
    /// `env` lines replace the preset's profile lists.
    ///
    /// ```text
    /// preset = standing
    /// windows_per_label = 200
    /// seed = 42
    /// sensors = ACC+MAG+GYRO+MIC
    /// adl = label=sleeping; freq=0.25; amp=0.05; noise=0.01; env=bedroom
    /// env = label=bedroom; rms=0.05; tilt=0.7; dc=0; bands=60:1
    /// ```
    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        const KEYS: [&str; 7] = ["preset", "windows_per_label", "seed", "kind", "sensors", "adl", "env"];
        if let Some(k) = doc.keys().find(|k| !KEYS.contains(k)) {
            return Err(invalid(format!("unknown spec key '{k}'")));
        }
        let preset: SynthPreset = doc.parse_value("preset")?.unwrap_or(SynthPreset::Environments);
        let windows = doc.parse_value("windows_per_label")?.unwrap_or(200);
        let seed = doc.parse_value("seed")?.unwrap_or(42);
        let mut spec = Self::preset(preset, windows, seed);
        if let Some(kind) = doc.parse_value::<LabelKind>("kind")? {
            spec.kind = kind;
        }
        if let Some(sensors) = doc.parse_value::<SensorSet>("sensors")? {
            spec.sensors = sensors;
        }
        let adl: Vec<AdlProfile> = doc.get_all("adl").map(parse_adl).collect::<Result<_>>()?;
        if !adl.is_empty() {
            spec.adl = adl;
        }
        let envs: Vec<EnvProfile> = doc.get_all("env").map(parse_env).collect::<Result<_>>()?;
        if !envs.is_empty() {
            spec.environments = envs;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn field<T: FromStr>(fields: &[(String, String)], name: &str, line: &str) -> Result<Option<T>> {
    fields
        .iter()
        .rev()
        .find(|(k, _)| k == name)
        .map(|(_, v)| {
            v.parse()
                .map_err(|_| Error::Format(format!("cannot parse {name} '{v}' in '{line}'")))
        })
        .transpose()
}

fn required<T: FromStr>(fields: &[(String, String)], name: &str, line: &str) -> Result<T> {
    field(fields, name, line)?.ok_or_else(|| Error::Format(format!("'{line}' lacks '{name}'")))
}

fn parse_adl(line: &str) -> Result<AdlProfile> {
    let f = parse_fields(line)?;
    Ok(AdlProfile {
        label: required(&f, "label", line)?,
        frequency_hz: required(&f, "freq", line)?,
        amplitude: required(&f, "amp", line)?,
        noise_std: required(&f, "noise", line)?,
        environment: field(&f, "env", line)?,
    })
}

fn parse_env(line: &str) -> Result<EnvProfile> {
    let f = parse_fields(line)?;
    let bands = match field::<String>(&f, "bands", line)? {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|b| {
                let (c, g) = b
                    .split_once(':')
                    .ok_or_else(|| Error::Format(format!("band '{b}' is not 'center:gain'")))?;
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("invalid band '{b}'")))
                };
                Ok((num(c)?, num(g)?))
            })
            .collect::<Result<_>>()?,
    };
    Ok(EnvProfile {
        label: required(&f, "label", line)?,
        rms: required(&f, "rms", line)?,
        dc_offset: field(&f, "dc", line)?.unwrap_or(0.0),
        tilt: required(&f, "tilt", line)?,
        bands,
    })
}

fn window_rng(seed: u64, label_index: usize, window: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((label_index as u64) << 32) | window as u64);
    rng
}

fn jitter(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(JITTER.0..JITTER.1)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    let scale = if std > 0.0 { 1.0 / std } else { 0.0 };
    v.iter_mut().for_each(|x| *x = (*x - mean) * scale);
}

/// Scene audio for one window.
pub fn synth_audio(profile: &EnvProfile, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = (WINDOW_SECONDS * AUDIO_RATE_HZ) as usize;
    let white: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let mut out = Vec::with_capacity(n);
    let mut y = 0.0;
    for &x in &white {
        y = x + profile.tilt * y;
        out.push(y);
    }
    standardize(&mut out);
    for &(center, gain) in &profile.bands {
        let theta = 2.0 * PI * center / AUDIO_RATE_HZ;
        let (a1, a2) = (
            2.0 * RESONATOR_RADIUS * theta.cos(),
            -RESONATOR_RADIUS * RESONATOR_RADIUS,
        );
        let (mut y1, mut y2) = (0.0, 0.0);
        let mut band: Vec<f64> = white
            .iter()
            .map(|&x| {
                let y = x + a1 * y1 + a2 * y2;
                y2 = y1;
                y1 = y;
                y
            })
            .collect();
        standardize(&mut band);
        for (o, b) in out.iter_mut().zip(&band) {
            *o += gain * b;
        }
    }
    standardize(&mut out);
    let rms = profile.rms * jitter(rng);
    out.iter_mut().for_each(|x| *x = *x * rms + profile.dc_offset);
    out
}

/// Motion channels for one activity window.
pub fn synth_motion(profile: &AdlProfile, sensors: SensorSet, rng: &mut ChaCha8Rng) -> BTreeMap<Sensor, [Vec<f64>; 3]> {
    let n = (WINDOW_SECONDS * MOTION_RATE_HZ) as usize;
    let freq = profile.frequency_hz * jitter(rng);
    let amp = profile.amplitude * jitter(rng);
    let phase = rng.random_range(0.0..2.0 * PI);
    sensors
        .motion()
        .map(|sensor| {
            let m = sensor_model(sensor);
            let axes = std::array::from_fn(|axis| {
                (0..n)
                    .map(|i| {
                        let t = i as f64 / MOTION_RATE_HZ;
                        let wave = (2.0 * PI * freq * t + phase + m.phase_offset).sin();
                        m.baseline[axis] + m.gain * (amp * m.weights[axis] * wave + profile.noise_std * gaussian(rng))
                    })
                    .collect()
            });
            (sensor, axes)
        })
        .collect()
}

/// Generates `windows_per_label` bundles per label, label by label.
///
/// Every window draws from its own random stream, so a window's samples do
/// not depend on how many other windows are generated.
pub fn synth_corpus<T: Real>(spec: &SynthSpec) -> Result<Vec<WindowBundle<T>>> {
    spec.validate()?;
    let labels = spec.labels();
    let mut out = Vec::with_capacity(labels.len() * spec.windows_per_label);
    for li in 0..labels.len() {
        for w in 0..spec.windows_per_label {
            out.push(synth_window(spec, li, w)?);
        }
    }
    Ok(out)
}

/// Window `window` of the `label_index`-th label.
pub fn synth_window<T: Real>(spec: &SynthSpec, label_index: usize, window: usize) -> Result<WindowBundle<T>> {
    let mut rng = window_rng(spec.seed, label_index, window);
    let to_t = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    let id = format!("{window:04}");
    match spec.kind {
        LabelKind::Environment => {
            let env = spec
                .environments
                .get(label_index)
                .ok_or_else(|| invalid(format!("no environment #{label_index}")))?;
            let audio = SampleSeries::new(to_t(synth_audio(env, &mut rng)), T::lit(AUDIO_RATE_HZ))?;
            let channels = Channels {
                audio: Some(audio),
                motion: BTreeMap::new(),
            };
            WindowBundle::new(id, channels, env.label.clone(), LabelKind::Environment)
        }
        LabelKind::Adl => {
            let profile = spec
                .adl
                .get(label_index)
                .ok_or_else(|| invalid(format!("no activity #{label_index}")))?;
            let mut channels = Channels::default();
            for (sensor, [x, y, z]) in synth_motion(profile, spec.sensors, &mut rng) {
                let tri = TriaxialSeries::from_axes(to_t(x), to_t(y), to_t(z), T::lit(MOTION_RATE_HZ))?;
                channels.motion.insert(sensor, tri);
            }
            if spec.sensors.contains(Sensor::Mic) {
                if let Some(env) = profile.environment.as_deref().and_then(|e| spec.environment(e)) {
                    let audio = SampleSeries::new(to_t(synth_audio(env, &mut rng)), T::lit(AUDIO_RATE_HZ))?;
                    channels.audio = Some(audio);
                }
            }
            let mut bundle = WindowBundle::new(id, channels, profile.label.clone(), LabelKind::Adl)?;
            bundle.environment = profile.environment.clone();
            Ok(bundle)
        }
    }
}
