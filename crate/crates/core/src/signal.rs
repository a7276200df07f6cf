//! Windowed raw-signal primitives: radix-2 FFT, power spectrum, single-pole
//! low-pass smoothing, triaxial magnitude and the six summary statistics every
//! feature recipe draws from.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// One window of samples from a single channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampleSeries<T: Real> {
    values: Vec<T>,
    sample_rate_hz: T,
}

impl<T: Real> SampleSeries<T> {
    pub fn new(values: Vec<T>, sample_rate_hz: T) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample series must not be empty"));
        }
        if !(sample_rate_hz > T::zero()) || !sample_rate_hz.is_finite() {
            return Err(invalid(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite sample at index {pos}")));
        }
        Ok(Self { values, sample_rate_hz })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration_s(&self) -> T {
        T::from_usize_lossy(self.values.len()) / self.sample_rate_hz
    }
}

/// Three equal-length axes sampled at a shared rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TriaxialSeries<T: Real> {
    x: SampleSeries<T>,
    y: SampleSeries<T>,
    z: SampleSeries<T>,
}

impl<T: Real> TriaxialSeries<T> {
    pub fn new(x: SampleSeries<T>, y: SampleSeries<T>, z: SampleSeries<T>) -> Result<Self> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(invalid(format!(
                "axis lengths differ: {}, {}, {}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        if x.sample_rate_hz != y.sample_rate_hz || x.sample_rate_hz != z.sample_rate_hz {
            return Err(invalid("axes must share one sample rate"));
        }
        Ok(Self { x, y, z })
    }

    pub fn from_axes(x: Vec<T>, y: Vec<T>, z: Vec<T>, sample_rate_hz: T) -> Result<Self> {
        Self::new(
            SampleSeries::new(x, sample_rate_hz)?,
            SampleSeries::new(y, sample_rate_hz)?,
            SampleSeries::new(z, sample_rate_hz)?,
        )
    }

    pub fn x(&self) -> &SampleSeries<T> {
        &self.x
    }

    pub fn y(&self) -> &SampleSeries<T> {
        &self.y
    }

    pub fn z(&self) -> &SampleSeries<T> {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample_rate_hz(&self) -> T {
        self.x.sample_rate_hz
    }

    pub fn duration_s(&self) -> T {
        self.x.duration_s()
    }

    pub fn map_axes<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&SampleSeries<T>) -> Result<SampleSeries<T>>,
    {
        Self::new(f(&self.x)?, f(&self.y)?, f(&self.z)?)
    }
}

/// Complex DFT bins of a zero-padded or truncated window.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    bins: Vec<Complex<T>>,
    sample_rate_hz: T,
}

impl<T: Real> Spectrum<T> {
    pub fn bins(&self) -> &[Complex<T>] {
        &self.bins
    }

    pub fn size(&self) -> usize {
        self.bins.len()
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    /// Frequency in Hz of bin `k`.
    pub fn bin_frequency(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.sample_rate_hz / T::from_usize_lossy(self.bins.len())
    }
}

/// Precomputed twiddle factors for one power-of-two transform size.
#[derive(Debug, Clone)]
pub struct FftPlan<T: Real> {
    size: usize,
    twiddles: Vec<Complex<T>>,
}

impl<T: Real> FftPlan<T> {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(invalid(format!("FFT size must be a power of two >= 2, got {size}")));
        }
        let n = T::from_usize_lossy(size);
        let twiddles = (0..size / 2)
            .map(|k| {
                let angle = -T::TAU() * T::from_usize_lossy(k) / n;
                Complex::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { size, twiddles })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
    pub fn process(&self, buf: &mut [Complex<T>]) {
        let n = self.size;
        assert_eq!(buf.len(), n, "buffer length must equal the plan size");

        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }

        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// FFT of `series`, truncated or zero-padded to `size` samples.
pub fn fft<T: Real>(series: &SampleSeries<T>, size: usize) -> Result<Spectrum<T>> {
    let plan = FftPlan::new(size)?;
    let mut bins: Vec<Complex<T>> = series
        .values
        .iter()
        .take(size)
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    bins.resize(size, Complex::new(T::zero(), T::zero()));
    plan.process(&mut bins);
    Ok(Spectrum {
        bins,
        sample_rate_hz: series.sample_rate_hz,
    })
}

/// One-sided power spectrum `|X[k]|^2 / N` for `k = 0..=N/2`.
pub fn magnitude_spectrum<T: Real>(spec: &Spectrum<T>) -> Vec<T> {
    let n = T::from_usize_lossy(spec.size());
    spec.bins[..=spec.size() / 2].iter().map(|c| c.norm_sqr() / n).collect()
}

/// Single-pole exponential smoother `y[n] = a x[n] + (1 - a) y[n-1]`, `y[0] = x[0]`.
pub fn low_pass<T: Real>(series: &SampleSeries<T>, alpha: T) -> Result<SampleSeries<T>> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(invalid(format!("low-pass alpha must be in (0, 1], got {alpha}")));
    }
    if alpha == T::one() {
        return Ok(series.clone());
    }
    let mut out = Vec::with_capacity(series.len());
    let mut prev = series.values[0];
    out.push(prev);
    // Written as an increment so that constant input is an exact fixed point.
    for &x in &series.values[1..] {
        prev += alpha * (x - prev);
        out.push(prev);
    }
    Ok(SampleSeries {
        values: out,
        sample_rate_hz: series.sample_rate_hz,
    })
}

/// Per-sample Euclidean norm of the three axes.
pub fn magnitude<T: Real>(tri: &TriaxialSeries<T>) -> SampleSeries<T> {
    let values = tri
        .x
        .values
        .iter()
        .zip(&tri.y.values)
        .zip(&tri.z.values)
        .map(|((&x, &y), &z)| (x * x + y * y + z * z).sqrt())
        .collect();
    SampleSeries {
        values,
        sample_rate_hz: tri.sample_rate_hz(),
    }
}

/// Mean, population standard deviation and variance, median and extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RawStats<T: Real> {
    pub mean: T,
    pub std_dev: T,
    pub variance: T,
    pub median: T,
    pub maximum: T,
    pub minimum: T,
}

impl<T: Real> RawStats<T> {
    pub fn zero() -> Self {
        Self {
            mean: T::zero(),
            std_dev: T::zero(),
            variance: T::zero(),
            median: T::zero(),
            maximum: T::zero(),
            minimum: T::zero(),
        }
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("statistics of an empty series are undefined"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("statistics require finite values"));
        }
        let n = T::from_usize_lossy(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let variance = values
            .iter()
            .map(|&v| {
                let d = v - mean;
                d * d
            })
            .sum::<T>()
            / n;

        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / T::lit(2.0)
        };

        Ok(Self {
            mean,
            std_dev: variance.sqrt(),
            variance,
            median,
            maximum: sorted[sorted.len() - 1],
            minimum: sorted[0],
        })
    }
}

pub fn raw_stats<T: Real>(series: &SampleSeries<T>) -> Result<RawStats<T>> {
    RawStats::from_slice(&series.values)
}
