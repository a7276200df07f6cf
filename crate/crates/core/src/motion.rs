//! Motion window features: peaks of the smoothed magnitude series, their
//! temporal gaps and statistics, raw statistics per sensor, and the optional
//! one-hot environment block.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::stat_value;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::sensors::{Sensor, SensorSet};
use crate::signal::{low_pass, magnitude, RawStats, SampleSeries, TriaxialSeries};

/// Strict local maxima of a series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet<T: Real> {
    pub indices: Vec<usize>,
    pub amplitudes: Vec<T>,
}

impl<T: Real> PeakSet<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn detect_peaks<T: Real>(series: &SampleSeries<T>) -> PeakSet<T> {
    let x = series.values();
    let mut peaks = PeakSet {
        indices: Vec::new(),
        amplitudes: Vec::new(),
    };
    for (i, w) in x.windows(3).enumerate() {
        if w[1] > w[0] && w[1] > w[2] {
            peaks.indices.push(i + 1);
            peaks.amplitudes.push(w[1]);
        }
    }
    peaks
}

/// The five largest gaps, in samples, between consecutive peaks; zero-padded.
pub fn top5_peak_distances<T: Real>(peaks: &PeakSet<T>) -> [T; 5] {
    let mut gaps: Vec<usize> = peaks.indices.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = [T::zero(); 5];
    for (o, g) in out.iter_mut().zip(gaps) {
        *o = T::from_usize_lossy(g);
    }
    out
}

/// `[mean, std, variance, median]` of the peak amplitudes; zeros when empty.
pub fn peak_stats<T: Real>(peaks: &PeakSet<T>) -> [T; 4] {
    let s = RawStats::from_slice(&peaks.amplitudes).unwrap_or_else(|_| RawStats::zero());
    [s.mean, s.std_dev, s.variance, s.median]
}

/// The five nested motion recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MotionVariant {
    F1,
    F2,
    F3,
    F4,
    F5,
}

const GAP_NAMES: [&str; 5] = ["peak_gap_1", "peak_gap_2", "peak_gap_3", "peak_gap_4", "peak_gap_5"];
const PEAK_NAMES: [&str; 4] = ["peak_mean", "peak_std", "peak_variance", "peak_median"];

impl MotionVariant {
    pub const ALL: [MotionVariant; 5] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5];

    fn has_gaps(self) -> bool {
        self == Self::F1
    }

    fn has_peak_stats(self) -> bool {
        matches!(self, Self::F1 | Self::F2)
    }

    fn stat_names(self) -> &'static [&'static str] {
        match self {
            Self::F1 | Self::F2 | Self::F3 => &["std", "mean", "max", "min", "variance", "median"],
            Self::F4 => &["std", "mean", "variance", "median"],
            Self::F5 => &["std", "mean"],
        }
    }

    /// Features per sensor block.
    pub fn block_len(self) -> usize {
        let gaps = if self.has_gaps() { 5 } else { 0 };
        let peaks = if self.has_peak_stats() { 4 } else { 0 };
        gaps + peaks + self.stat_names().len()
    }

    pub fn block_names(self, sensor: Sensor) -> Vec<String> {
        let prefix = sensor.tag().to_ascii_lowercase();
        let gaps = if self.has_gaps() { &GAP_NAMES[..] } else { &[] };
        let peaks = if self.has_peak_stats() { &PEAK_NAMES[..] } else { &[] };
        gaps.iter()
            .chain(peaks)
            .chain(self.stat_names())
            .map(|n| format!("{prefix}_{n}"))
            .collect()
    }

    pub fn feature_names(self, sensors: SensorSet, env_labels: Option<&[String]>) -> Vec<String> {
        let mut names: Vec<String> = sensors.motion().flat_map(|s| self.block_names(s)).collect();
        if let Some(labels) = env_labels {
            names.extend(labels.iter().map(|l| env_feature_name(l)));
        }
        names
    }

    pub fn len(self, sensors: SensorSet, env_count: usize) -> usize {
        self.block_len() * sensors.motion().count() + env_count
    }
}

pub fn env_feature_name(label: &str) -> String {
    format!("env={label}")
}

impl fmt::Display for MotionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for MotionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F1" => Ok(Self::F1),
            "F2" => Ok(Self::F2),
            "F3" => Ok(Self::F3),
            "F4" => Ok(Self::F4),
            "F5" => Ok(Self::F5),
            other => Err(invalid(format!("unknown motion variant '{other}'"))),
        }
    }
}

/// Environment as a one-hot block over an ordered label dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHot {
    pub labels: Vec<String>,
    pub index: usize,
}

impl OneHot {
    pub fn new(labels: Vec<String>, index: usize) -> Result<Self> {
        if index >= labels.len() {
            return Err(invalid(format!(
                "one-hot index {index} out of range for {} labels",
                labels.len()
            )));
        }
        Ok(Self { labels, index })
    }

    pub fn for_label(labels: &[String], label: &str) -> Result<Self> {
        let index = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| invalid(format!("environment '{label}' is not in the label dictionary")))?;
        Ok(Self {
            labels: labels.to_vec(),
            index,
        })
    }

    pub fn values<T: Real>(&self) -> Vec<T> {
        (0..self.labels.len())
            .map(|i| if i == self.index { T::one() } else { T::zero() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    pub low_pass_alpha: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self { low_pass_alpha: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionFeatureVector<T: Real> {
    pub variant: MotionVariant,
    pub sensors: SensorSet,
    pub env: Option<OneHot>,
    pub names: Vec<String>,
    pub values: Vec<T>,
}

/// Feature block of one sensor: low-pass each axis, take the magnitude, then
/// extract what the variant keeps.
pub fn sensor_block<T: Real>(tri: &TriaxialSeries<T>, variant: MotionVariant, cfg: &MotionConfig) -> Result<Vec<T>> {
    let alpha = T::lit(cfg.low_pass_alpha);
    let smoothed = tri.map_axes(|axis| low_pass(axis, alpha))?;
    let mag = magnitude(&smoothed);
    let mut out = Vec::with_capacity(variant.block_len());
    if variant.has_peak_stats() {
        let peaks = detect_peaks(&mag);
        if variant.has_gaps() {
            out.extend(top5_peak_distances(&peaks));
        }
        out.extend(peak_stats(&peaks));
    }
    let stats = RawStats::from_slice(mag.values())?;
    out.extend(variant.stat_names().iter().map(|n| stat_value(&stats, n)));
    Ok(out)
}

pub fn motion_feature_vector<T: Real>(
    windows: &BTreeMap<Sensor, TriaxialSeries<T>>,
    variant: MotionVariant,
    sensors: SensorSet,
    env: Option<&OneHot>,
    cfg: &MotionConfig,
) -> Result<MotionFeatureVector<T>> {
    if sensors.motion().next().is_none() {
        return Err(invalid(format!("sensor set {sensors} has no motion sensor")));
    }
    let mut duration: Option<T> = None;
    let mut values = Vec::with_capacity(variant.len(sensors, env.map_or(0, |e| e.labels.len())));
    for sensor in sensors.motion() {
        let tri = windows
            .get(&sensor)
            .ok_or_else(|| invalid(format!("missing {sensor} window")))?;
        let d = tri.duration_s();
        match duration {
            None => duration = Some(d),
            Some(first) if (d - first).abs() > T::lit(0.1) * first => {
                return Err(invalid(format!("{sensor} window lasts {d} s, other sensors {first} s")));
            }
            Some(_) => {}
        }
        values.extend(sensor_block(tri, variant, cfg)?);
    }
    if let Some(e) = env {
        values.extend(e.values::<T>());
    }
    Ok(MotionFeatureVector {
        variant,
        sensors,
        env: env.cloned(),
        names: variant.feature_names(sensors, env.map(|e| e.labels.as_slice())),
        values,
    })
}
