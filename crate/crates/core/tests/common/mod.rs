//! Reference computations and fixtures shared by the integration and
//! acceptance tests. The oracles never call into the library's numeric code.

#![allow(dead_code)]

use std::f64::consts::PI;

use adl_sense::nn::{NetworkConfig, NetworkModel, OutputActivation, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Direct O(N^2) DFT of `x` truncated or zero-padded to `n`.
pub fn naive_dft(x: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, &v) in x.iter().take(n).enumerate() {
                let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            (re, im)
        })
        .collect()
}

/// (mean, std, variance, median, max, min) straight from the definitions.
pub fn direct_stats(x: &[f64]) -> [f64; 6] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let variance = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    [
        mean,
        variance.sqrt(),
        variance,
        median,
        *sorted.last().unwrap(),
        sorted[0],
    ]
}

/// Exhaustive scan for strict interior local maxima.
pub fn brute_peaks(x: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    for n in 1..x.len().saturating_sub(1) {
        if x[n] > x[n - 1] && x[n] > x[n + 1] {
            idx.push(n);
        }
    }
    let amps = idx.iter().map(|&i| x[i]).collect();
    (idx, amps)
}

/// Five largest consecutive gaps, zero padded.
pub fn gap_sort(indices: &[usize]) -> [f64; 5] {
    let mut gaps: Vec<usize> = indices.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = [0.0; 5];
    for (o, g) in out.iter_mut().zip(gaps) {
        *o = g as f64;
    }
    out
}

pub fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).ln() / std::f64::consts::LN_10
}

pub fn inv_mel(m: f64) -> f64 {
    700.0 * ((m * std::f64::consts::LN_10 / 2595.0).exp() - 1.0)
}

pub struct MfccParams {
    pub rate: f64,
    pub frame: usize,
    pub hop: usize,
    pub nfft: usize,
    pub filters: usize,
    pub coeffs: usize,
    pub low: f64,
    pub high: f64,
    pub floor: f64,
}

impl Default for MfccParams {
    fn default() -> Self {
        Self {
            rate: 8000.0,
            frame: 200,
            hop: 80,
            nfft: 256,
            filters: 26,
            coeffs: 26,
            low: 0.0,
            high: 4000.0,
            floor: 1e-10,
        }
    }
}

/// Filter center frequencies in Hz.
pub fn mel_centers(p: &MfccParams) -> Vec<f64> {
    let (a, b) = (mel(p.low), mel(p.high));
    (1..=p.filters)
        .map(|i| inv_mel(a + (b - a) * i as f64 / (p.filters + 1) as f64))
        .collect()
}

/// Weight of triangle `m` at FFT bin `k`, bins rounded to the nearest index.
fn triangle(p: &MfccParams, m: usize, k: usize) -> f64 {
    let (a, b) = (mel(p.low), mel(p.high));
    let bin = |i: usize| {
        let hz = inv_mel(a + (b - a) * i as f64 / (p.filters + 1) as f64);
        ((p.nfft as f64 * hz / p.rate).round() as usize).min(p.nfft / 2)
    };
    let (l, c, r) = (bin(m), bin(m + 1), bin(m + 2));
    if k < l || k > r {
        0.0
    } else if k <= c {
        (k - l) as f64 / (c - l) as f64
    } else {
        (r - k) as f64 / (r - c) as f64
    }
}

/// Reference MFCC: Hamming frames, naive DFT power, triangular mel
/// energies, floored natural log, orthonormal DCT-II, mean over frames.
pub fn mfcc_oracle(x: &[f64], p: &MfccParams) -> Vec<f64> {
    let frames = (x.len() - p.frame) / p.hop + 1;
    let mut acc = vec![0.0; p.coeffs];
    for f in 0..frames {
        let windowed: Vec<f64> = (0..p.frame)
            .map(|n| {
                let w = 0.54 - 0.46 * (2.0 * PI * n as f64 / (p.frame - 1) as f64).cos();
                x[f * p.hop + n] * w
            })
            .collect();
        let spec = naive_dft(&windowed, p.nfft);
        let power: Vec<f64> = spec[..=p.nfft / 2]
            .iter()
            .map(|(re, im)| (re * re + im * im) / p.nfft as f64)
            .collect();
        let logmel: Vec<f64> = (0..p.filters)
            .map(|m| {
                let e: f64 = power.iter().enumerate().map(|(k, pw)| triangle(p, m, k) * pw).sum();
                e.max(p.floor).ln()
            })
            .collect();
        for (j, a) in acc.iter_mut().enumerate() {
            let scale = if j == 0 {
                (1.0 / p.filters as f64).sqrt()
            } else {
                (2.0 / p.filters as f64).sqrt()
            };
            let c: f64 = logmel
                .iter()
                .enumerate()
                .map(|(n, v)| v * (PI * j as f64 * (2 * n + 1) as f64 / (2 * p.filters) as f64).cos())
                .sum();
            *a += scale * c;
        }
    }
    acc.iter().map(|a| a / frames as f64).collect()
}

/// Population mean and std of one column.
pub fn column_stats(rows: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Smallest, over label pairs, of the largest per-feature ratio
/// |mean difference| / larger within-label std.
pub fn separation_margin(rows: &[Vec<f64>], labels: &[usize], label_count: usize) -> f64 {
    let width = rows[0].len();
    let groups: Vec<Vec<Vec<f64>>> = (0..label_count)
        .map(|l| {
            rows.iter()
                .zip(labels)
                .filter(|(_, &x)| x == l)
                .map(|(r, _)| r.clone())
                .collect()
        })
        .collect();
    let stats: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|g| (0..width).map(|j| column_stats(g, j)).collect())
        .collect();
    let mut worst = f64::INFINITY;
    for a in 0..label_count {
        for b in a + 1..label_count {
            let best = (0..width)
                .map(|j| {
                    let (ma, sa) = stats[a][j];
                    let (mb, sb) = stats[b][j];
                    let d = (ma - mb).abs();
                    let s = sa.max(sb);
                    if s == 0.0 {
                        if d > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    } else {
                        d / s
                    }
                })
                .fold(0.0, f64::max);
            worst = worst.min(best);
        }
    }
    worst
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("l{i}")).collect()
}

pub fn net(sizes: &[usize], seed: u64, output: OutputActivation) -> NetworkModel<f64> {
    let mut cfg = NetworkConfig::for_preset(Preset::Mlp).with_seed(seed);
    cfg.hidden_layers = sizes[1..sizes.len() - 1].to_vec();
    cfg.output = output;
    let mut m = NetworkModel::init(&cfg, sizes[0], labels(*sizes.last().unwrap())).unwrap();
    // Non-zero biases exercise every partial derivative.
    let mut r = rng(seed ^ 0xb1a5);
    for b in m.biases.iter_mut().flatten() {
        *b = r.random_range(-0.5..0.5);
    }
    m
}

/// Largest relative disagreement between backprop and central differences.
pub fn worst_gradient_error(sizes: &[usize], seed: u64, l2: f64, output: OutputActivation) -> f64 {
    let m = net(sizes, seed, output);
    let mut r = rng(seed.wrapping_mul(7919));
    let x = random_vec(&mut r, sizes[0], 1.5);
    let label = r.random_range(0..*sizes.last().unwrap());
    let (_, g) = m.loss_and_gradients(&x, label, l2).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, plus: f64, minus: f64| {
        let fd = (plus - minus) / (2.0 * h);
        let denom = analytic.abs().max(fd.abs()).max(1e-8);
        worst = worst.max((analytic - fd).abs() / denom);
    };
    for l in 0..m.weights.len() {
        for i in 0..m.weights[l].len() {
            let mut p = m.clone();
            p.weights[l][i] += h;
            let mut q = m.clone();
            q.weights[l][i] -= h;
            check(
                g.weights[l][i],
                p.loss(&x, label, l2).unwrap(),
                q.loss(&x, label, l2).unwrap(),
            );
        }
        for i in 0..m.biases[l].len() {
            let mut p = m.clone();
            p.biases[l][i] += h;
            let mut q = m.clone();
            q.biases[l][i] -= h;
            check(
                g.biases[l][i],
                p.loss(&x, label, l2).unwrap(),
                q.loss(&x, label, l2).unwrap(),
            );
        }
    }
    worst
}
