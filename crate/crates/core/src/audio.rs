//! Audio window features: MFCCs averaged over frames plus raw-signal
//! statistics, assembled into the four nested audio recipes A1..A4.
//!
//! Per frame the chain is Hamming window, power spectrum, triangular mel
//! filterbank, floored natural log and an orthonormal DCT-II. The window-level
//! MFCC vector is the arithmetic mean of the per-frame vectors.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{FftPlan, RawStats, SampleSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub sample_rate_hz: f64,
    pub frame_length: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub filter_count: usize,
    pub coefficient_count: usize,
    pub mel_low_hz: f64,
    pub mel_high_hz: f64,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 8000.0,
            frame_length: 200,
            hop: 80,
            fft_size: 256,
            filter_count: 26,
            coefficient_count: 26,
            mel_low_hz: 0.0,
            mel_high_hz: 4000.0,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) {
            return Err(invalid("MFCC sample rate must be positive"));
        }
        if self.filter_count == 0 || self.coefficient_count == 0 {
            return Err(invalid("MFCC filter and coefficient counts must be positive"));
        }
        if self.coefficient_count > self.filter_count {
            return Err(invalid(format!(
                "coefficient_count {} exceeds filter_count {}",
                self.coefficient_count, self.filter_count
            )));
        }
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(invalid(format!("fft_size {} is not a power of two", self.fft_size)));
        }
        if self.frame_length == 0 || self.frame_length > self.fft_size {
            return Err(invalid(format!(
                "frame_length {} must be in 1..={}",
                self.frame_length, self.fft_size
            )));
        }
        if self.hop == 0 {
            return Err(invalid("hop must be at least 1"));
        }
        if !(self.mel_low_hz >= 0.0
            && self.mel_low_hz < self.mel_high_hz
            && self.mel_high_hz <= self.sample_rate_hz / 2.0)
        {
            return Err(invalid(format!(
                "mel band [{}, {}] Hz must lie inside [0, {}]",
                self.mel_low_hz,
                self.mel_high_hz,
                self.sample_rate_hz / 2.0
            )));
        }
        if !(self.log_floor > 0.0) {
            return Err(invalid("log_floor must be positive"));
        }
        Ok(())
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Filter edge and center frequencies: `filter_count + 2` points equally
/// spaced in mel between the band limits.
fn mel_points_hz(cfg: &MfccConfig) -> Vec<f64> {
    let lo = hz_to_mel(cfg.mel_low_hz);
    let hi = hz_to_mel(cfg.mel_high_hz);
    let steps = (cfg.filter_count + 1) as f64;
    (0..cfg.filter_count + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / steps))
        .collect()
}

/// Center frequency in Hz of each filter.
pub fn center_frequencies(cfg: &MfccConfig) -> Vec<f64> {
    let pts = mel_points_hz(cfg);
    pts[1..pts.len() - 1].to_vec()
}

/// Row-major `filter_count x (fft_size / 2 + 1)` matrix of triangular weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank<T: Real> {
    rows: usize,
    cols: usize,
    weights: Vec<T>,
    center_bins: Vec<usize>,
}

impl<T: Real> MelFilterbank<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.weights[i * self.cols..(i + 1) * self.cols]
    }

    pub fn center_bins(&self) -> &[usize] {
        &self.center_bins
    }

    pub fn apply(&self, power: &[T], out: &mut [T]) {
        debug_assert_eq!(power.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = self.row(i).iter().zip(power).map(|(&w, &p)| w * p).sum();
        }
    }
}

pub fn mel_filterbank<T: Real>(cfg: &MfccConfig) -> Result<MelFilterbank<T>> {
    cfg.validate()?;
    let cols = cfg.fft_size / 2 + 1;
    let bins: Vec<usize> = mel_points_hz(cfg)
        .into_iter()
        .map(|hz| ((cfg.fft_size as f64) * hz / cfg.sample_rate_hz).round() as usize)
        .map(|b| b.min(cols - 1))
        .collect();
    if let Some(w) = bins.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(format!(
            "{} filters do not fit an FFT of size {}: mel points {} and {} share bin {}",
            cfg.filter_count,
            cfg.fft_size,
            w,
            w + 1,
            bins[w]
        )));
    }

    let mut weights = vec![T::zero(); cfg.filter_count * cols];
    for m in 0..cfg.filter_count {
        let (left, center, right) = (bins[m], bins[m + 1], bins[m + 2]);
        let row = &mut weights[m * cols..(m + 1) * cols];
        for (k, w) in row.iter_mut().enumerate().take(right + 1).skip(left) {
            *w = if k <= center {
                T::from_usize_lossy(k - left) / T::from_usize_lossy(center - left)
            } else {
                T::from_usize_lossy(right - k) / T::from_usize_lossy(right - center)
            };
        }
    }
    Ok(MelFilterbank {
        rows: cfg.filter_count,
        cols,
        weights,
        center_bins: bins[1..=cfg.filter_count].to_vec(),
    })
}

pub fn hamming_window<T: Real>(len: usize) -> Vec<T> {
    if len == 1 {
        return vec![T::one()];
    }
    let denom = T::from_usize_lossy(len - 1);
    (0..len)
        .map(|n| T::lit(0.54) - T::lit(0.46) * (T::TAU() * T::from_usize_lossy(n) / denom).cos())
        .collect()
}

/// Splits `series` into Hamming-windowed frames; a trailing partial frame is dropped.
pub fn frame_signal<T: Real>(series: &SampleSeries<T>, cfg: &MfccConfig) -> Result<Vec<Vec<T>>> {
    if cfg.frame_length == 0 || cfg.hop == 0 {
        return Err(invalid("frame_length and hop must be positive"));
    }
    let window = hamming_window::<T>(cfg.frame_length);
    frames_with(series.values(), cfg, &window)
}

fn frames_with<T: Real>(values: &[T], cfg: &MfccConfig, window: &[T]) -> Result<Vec<Vec<T>>> {
    if values.len() < cfg.frame_length {
        return Err(invalid(format!(
            "series of {} samples is shorter than one frame ({})",
            values.len(),
            cfg.frame_length
        )));
    }
    let count = (values.len() - cfg.frame_length) / cfg.hop + 1;
    Ok((0..count)
        .map(|f| {
            let start = f * cfg.hop;
            values[start..start + cfg.frame_length]
                .iter()
                .zip(window)
                .map(|(&x, &w)| x * w)
                .collect()
        })
        .collect())
}

/// Orthonormal DCT-II as a dense `out_len x in_len` matrix.
#[derive(Debug, Clone)]
pub struct DctMatrix<T: Real> {
    in_len: usize,
    out_len: usize,
    basis: Vec<T>,
}

impl<T: Real> DctMatrix<T> {
    pub fn new(in_len: usize, out_len: usize) -> Self {
        let m = T::from_usize_lossy(in_len);
        let scale0 = (T::one() / m).sqrt();
        let scale = (T::lit(2.0) / m).sqrt();
        let mut basis = Vec::with_capacity(in_len * out_len);
        for k in 0..out_len {
            let s = if k == 0 { scale0 } else { scale };
            for n in 0..in_len {
                let arg = T::PI() * T::from_usize_lossy(k) * T::from_usize_lossy(2 * n + 1) / (T::lit(2.0) * m);
                basis.push(s * arg.cos());
            }
        }
        Self { in_len, out_len, basis }
    }

    pub fn forward(&self, input: &[T], out: &mut [T]) {
        debug_assert_eq!(input.len(), self.in_len);
        // Rows k >= 1 sum to zero, so shifting the input by a constant is
        // exact in theory and gives exact zeros for constant input.
        let shift = input.first().copied().unwrap_or_else(T::zero);
        for (k, o) in out.iter_mut().enumerate().take(self.out_len) {
            let row = &self.basis[k * self.in_len..(k + 1) * self.in_len];
            *o = if k == 0 {
                row.iter().zip(input).map(|(&b, &x)| b * x).sum()
            } else {
                row.iter().zip(input).map(|(&b, &x)| b * (x - shift)).sum()
            };
        }
    }

    /// Inverse transform (DCT-III); exact only when `out_len == in_len`.
    pub fn inverse(&self, coeffs: &[T]) -> Vec<T> {
        (0..self.in_len)
            .map(|n| {
                coeffs
                    .iter()
                    .enumerate()
                    .take(self.out_len)
                    .map(|(k, &c)| c * self.basis[k * self.in_len + n])
                    .sum()
            })
            .collect()
    }
}

pub fn dct2_orthonormal<T: Real>(input: &[T]) -> Vec<T> {
    let dct = DctMatrix::new(input.len(), input.len());
    let mut out = vec![T::zero(); input.len()];
    dct.forward(input, &mut out);
    out
}

pub fn idct2_orthonormal<T: Real>(coeffs: &[T]) -> Vec<T> {
    DctMatrix::new(coeffs.len(), coeffs.len()).inverse(coeffs)
}

/// Reusable MFCC front end; the filterbank, window, DCT basis and FFT plan are
/// built once and shared read-only.
#[derive(Debug, Clone)]
pub struct MfccExtractor<T: Real> {
    cfg: MfccConfig,
    window: Vec<T>,
    filterbank: MelFilterbank<T>,
    dct: DctMatrix<T>,
    plan: FftPlan<T>,
}

impl<T: Real> MfccExtractor<T> {
    pub fn new(cfg: &MfccConfig) -> Result<Self> {
        let filterbank = mel_filterbank(cfg)?;
        Ok(Self {
            cfg: cfg.clone(),
            window: hamming_window(cfg.frame_length),
            dct: DctMatrix::new(cfg.filter_count, cfg.coefficient_count),
            plan: FftPlan::new(cfg.fft_size)?,
            filterbank,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank<T> {
        &self.filterbank
    }

    pub fn dct(&self) -> &DctMatrix<T> {
        &self.dct
    }

    /// Floored log mel energies of one already-windowed frame.
    pub fn log_mel_energies(&self, frame: &[T]) -> Vec<T> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.cfg.fft_size];
        let mut power = vec![T::zero(); self.filterbank.cols()];
        let mut energies = vec![T::zero(); self.cfg.filter_count];
        self.log_mel_into(frame, &mut buf, &mut power, &mut energies);
        energies
    }

    fn log_mel_into(&self, frame: &[T], buf: &mut [Complex<T>], power: &mut [T], energies: &mut [T]) {
        for (i, b) in buf.iter_mut().enumerate() {
            let v = frame.get(i).copied().unwrap_or_else(T::zero);
            *b = Complex::new(v, T::zero());
        }
        self.plan.process(buf);
        let n = T::from_usize_lossy(self.cfg.fft_size);
        for (p, c) in power.iter_mut().zip(buf.iter()) {
            *p = c.norm_sqr() / n;
        }
        self.filterbank.apply(power, energies);
        let floor = T::lit(self.cfg.log_floor);
        for e in energies.iter_mut() {
            *e = e.max(floor).ln();
        }
    }

    /// Cepstral coefficients of every frame.
    pub fn frame_coefficients(&self, series: &SampleSeries<T>) -> Result<Vec<Vec<T>>> {
        let frames = frames_with(series.values(), &self.cfg, &self.window)?;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.cfg.fft_size];
        let mut power = vec![T::zero(); self.filterbank.cols()];
        let mut energies = vec![T::zero(); self.cfg.filter_count];
        Ok(frames
            .iter()
            .map(|frame| {
                self.log_mel_into(frame, &mut buf, &mut power, &mut energies);
                let mut coeffs = vec![T::zero(); self.cfg.coefficient_count];
                self.dct.forward(&energies, &mut coeffs);
                coeffs
            })
            .collect())
    }

    /// Window-level MFCCs: mean of the per-frame coefficients.
    pub fn extract(&self, series: &SampleSeries<T>) -> Result<Vec<T>> {
        let frames = self.frame_coefficients(series)?;
        let count = T::from_usize_lossy(frames.len());
        let mut mean = vec![T::zero(); self.cfg.coefficient_count];
        for f in &frames {
            for (m, &c) in mean.iter_mut().zip(f) {
                *m += c;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        Ok(mean)
    }
}

pub fn mfcc<T: Real>(series: &SampleSeries<T>, cfg: &MfccConfig) -> Result<Vec<T>> {
    MfccExtractor::new(cfg)?.extract(series)
}

/// The four nested audio recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AudioVariant {
    A1,
    A2,
    A3,
    A4,
}

impl AudioVariant {
    pub const ALL: [AudioVariant; 4] = [Self::A1, Self::A2, Self::A3, Self::A4];

    /// Statistic names kept by the variant, in output order.
    pub fn stat_names(self) -> &'static [&'static str] {
        match self {
            Self::A1 | Self::A2 => &["std", "mean", "max", "min", "variance", "median"],
            Self::A3 => &["std", "mean", "variance", "median"],
            Self::A4 => &["std", "mean"],
        }
    }

    pub fn uses_mfcc(self) -> bool {
        self == Self::A1
    }

    pub fn feature_names(self, coefficient_count: usize) -> Vec<String> {
        let mfcc = if self.uses_mfcc() { coefficient_count } else { 0 };
        (0..mfcc)
            .map(|i| format!("mfcc_{i:02}"))
            .chain(self.stat_names().iter().map(|s| s.to_string()))
            .collect()
    }

    pub fn len(self, coefficient_count: usize) -> usize {
        let mfcc = if self.uses_mfcc() { coefficient_count } else { 0 };
        mfcc + self.stat_names().len()
    }
}

impl fmt::Display for AudioVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for AudioVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(Self::A1),
            "A2" => Ok(Self::A2),
            "A3" => Ok(Self::A3),
            "A4" => Ok(Self::A4),
            other => Err(invalid(format!("unknown audio variant '{other}'"))),
        }
    }
}

pub(crate) fn stat_value<T: Real>(stats: &RawStats<T>, name: &str) -> T {
    match name {
        "std" => stats.std_dev,
        "mean" => stats.mean,
        "max" => stats.maximum,
        "min" => stats.minimum,
        "variance" => stats.variance,
        "median" => stats.median,
        _ => unreachable!("unknown statistic {name}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioFeatureVector<T: Real> {
    pub variant: AudioVariant,
    pub names: Vec<String>,
    pub values: Vec<T>,
}

pub fn audio_feature_vector<T: Real>(
    series: &SampleSeries<T>,
    variant: AudioVariant,
    cfg: &MfccConfig,
) -> Result<AudioFeatureVector<T>> {
    if variant.uses_mfcc() {
        let extractor = MfccExtractor::new(cfg)?;
        audio_features_with(series, variant, &extractor)
    } else {
        audio_stats_vector(series, variant, cfg.coefficient_count)
    }
}

fn audio_stats_vector<T: Real>(
    series: &SampleSeries<T>,
    variant: AudioVariant,
    coefficient_count: usize,
) -> Result<AudioFeatureVector<T>> {
    let stats = RawStats::from_slice(series.values())?;
    Ok(AudioFeatureVector {
        variant,
        names: variant.feature_names(coefficient_count),
        values: variant.stat_names().iter().map(|n| stat_value(&stats, n)).collect(),
    })
}

/// Same as [`audio_feature_vector`] but reuses a prebuilt extractor.
pub fn audio_features_with<T: Real>(
    series: &SampleSeries<T>,
    variant: AudioVariant,
    extractor: &MfccExtractor<T>,
) -> Result<AudioFeatureVector<T>> {
    let mut out = audio_stats_vector(series, variant, extractor.cfg.coefficient_count)?;
    if variant.uses_mfcc() {
        let mut values = extractor.extract(series)?;
        values.extend_from_slice(&out.values);
        out.values = values;
    }
    Ok(out)
}
