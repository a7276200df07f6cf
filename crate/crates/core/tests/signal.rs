mod common;

use adl_sense::signal::{
    fft, low_pass, magnitude, magnitude_spectrum, raw_stats, FftPlan, SampleSeries, TriaxialSeries,
};
use common::{direct_stats, naive_dft, random_vec, rel_err, rng};
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

fn series(v: Vec<f64>) -> SampleSeries<f64> {
    SampleSeries::new(v, 100.0).unwrap()
}

#[test]
fn fft_matches_naive_dft() {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random_vec(&mut r, 256, 1.0);
        let spec = fft(&series(x.clone()), 256).unwrap();
        for (got, (re, im)) in spec.bins().iter().zip(naive_dft(&x, 256)) {
            let diff = ((got.re - re).powi(2) + (got.im - im).powi(2)).sqrt();
            worst = worst.max(diff / (re * re + im * im).sqrt());
        }
    }
    assert!(worst <= 1e-9, "worst relative bin error {worst:e}");
}

#[test]
fn fft_pads_and_truncates() {
    let x: Vec<f64> = (0..10).map(f64::from).collect();
    let padded = fft(&series(x.clone()), 16).unwrap();
    for (got, (re, im)) in padded.bins().iter().zip(naive_dft(&x, 16)) {
        assert!((got.re - re).abs() < 1e-9 && (got.im - im).abs() < 1e-9);
    }
    let cut = fft(&series(x.clone()), 8).unwrap();
    for (got, (re, im)) in cut.bins().iter().zip(naive_dft(&x[..8], 8)) {
        assert!((got.re - re).abs() < 1e-9 && (got.im - im).abs() < 1e-9);
    }
    assert!(fft(&series(x), 12).is_err());
    assert!(FftPlan::<f64>::new(1).is_err());
}

#[test]
fn spectrum_examples() {
    let imp = fft(&series(vec![1.0, 0.0, 0.0, 0.0]), 4).unwrap();
    assert!(imp.bins().iter().all(|b| *b == Complex::new(1.0, 0.0)));
    assert_eq!(magnitude_spectrum(&imp), vec![0.25; 3]);
    let dc = fft(&series(vec![1.0; 4]), 4).unwrap();
    assert_eq!(dc.bins()[0], Complex::new(4.0, 0.0));
    assert!(dc.bins()[1..].iter().all(|b| b.norm() < 1e-15));
    assert_eq!(magnitude_spectrum(&dc), vec![4.0, 0.0, 0.0]);
}

#[test]
fn parseval_holds() {
    let mut r = rng(2);
    for _ in 0..100 {
        let x = random_vec(&mut r, 256, 3.0);
        let spec = fft(&series(x.clone()), 256).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = spec.bins().iter().map(|b| b.norm_sqr()).sum::<f64>() / 256.0;
        assert!(rel_err(time, freq) <= 1e-9);
    }
}

#[test]
fn fft_is_linear() {
    let mut r = rng(3);
    for _ in 0..50 {
        let u = random_vec(&mut r, 128, 1.0);
        let v = random_vec(&mut r, 128, 1.0);
        let (a, b) = (r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let fu = fft(&series(u), 128).unwrap();
        let fv = fft(&series(v), 128).unwrap();
        let fm = fft(&series(mix), 128).unwrap();
        let scale = fm.bins().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for k in 0..128 {
            let expect = fu.bins()[k] * a + fv.bins()[k] * b;
            assert!((fm.bins()[k] - expect).norm() <= 1e-9 * scale);
        }
    }
}

#[test]
fn low_pass_examples() {
    let y = low_pass(&series(vec![0.0, 1.0, 1.0]), 0.5).unwrap();
    assert_eq!(y.values(), &[0.0, 0.5, 0.75]);
    let c = low_pass(&series(vec![3.0; 3]), 0.3).unwrap();
    assert_eq!(c.values(), &[3.0; 3]);
    let x = series(vec![1.0, -2.0, 5.0]);
    assert_eq!(low_pass(&x, 1.0).unwrap(), x);
    assert!(low_pass(&x, 0.0).is_err());
    assert!(low_pass(&x, 1.5).is_err());
}

#[test]
fn magnitude_examples_and_oracle() {
    let t = TriaxialSeries::from_axes(vec![3.0], vec![4.0], vec![0.0], 100.0).unwrap();
    assert_eq!(magnitude(&t).values(), &[5.0]);
    let z = TriaxialSeries::from_axes(vec![0.0; 4], vec![0.0; 4], vec![0.0; 4], 100.0).unwrap();
    assert!(magnitude(&z).values().iter().all(|&v| v == 0.0));
    let mut r = rng(4);
    let (x, y, zz) = (
        random_vec(&mut r, 300, 9.0),
        random_vec(&mut r, 300, 9.0),
        random_vec(&mut r, 300, 9.0),
    );
    let m = magnitude(&TriaxialSeries::from_axes(x.clone(), y.clone(), zz.clone(), 100.0).unwrap());
    for i in 0..300 {
        assert!(rel_err(m.values()[i], (x[i] * x[i] + y[i] * y[i] + zz[i] * zz[i]).sqrt()) < 1e-15);
    }
}

/// Rotation matrix from a unit quaternion.
fn rotation(r: &mut rand_chacha::ChaCha8Rng) -> [[f64; 3]; 3] {
    let q: Vec<f64> = random_vec(r, 4, 1.0);
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

#[test]
fn magnitude_is_rotation_invariant() {
    let mut r = rng(5);
    for _ in 0..50 {
        let axes = [
            random_vec(&mut r, 200, 20.0),
            random_vec(&mut r, 200, 20.0),
            random_vec(&mut r, 200, 20.0),
        ];
        let rot = rotation(&mut r);
        let rotated: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..200).map(|n| (0..3).map(|j| rot[i][j] * axes[j][n]).sum()).collect())
            .collect();
        let a =
            magnitude(&TriaxialSeries::from_axes(axes[0].clone(), axes[1].clone(), axes[2].clone(), 100.0).unwrap());
        let b = magnitude(
            &TriaxialSeries::from_axes(rotated[0].clone(), rotated[1].clone(), rotated[2].clone(), 100.0).unwrap(),
        );
        for (p, q) in a.values().iter().zip(b.values()) {
            assert!(rel_err(*p, *q) <= 1e-9);
        }
    }
}

#[test]
fn raw_stats_examples() {
    let s = raw_stats(&series(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
    assert_eq!(
        (s.mean, s.median, s.maximum, s.minimum, s.variance),
        (2.5, 2.5, 4.0, 1.0, 1.25)
    );
    assert!((s.std_dev - 1.118034).abs() < 1e-6);
    let c = raw_stats(&series(vec![5.0; 3])).unwrap();
    assert_eq!((c.variance, c.std_dev, c.median), (0.0, 0.0, 5.0));
}

#[test]
fn raw_stats_match_definitions() {
    let mut r = rng(6);
    for n in [1usize, 2, 3, 500, 501] {
        let x = random_vec(&mut r, n, 50.0);
        let s = raw_stats(&series(x.clone())).unwrap();
        let [mean, std, var, median, max, min] = direct_stats(&x);
        for (got, want) in [(s.mean, mean), (s.std_dev, std), (s.variance, var), (s.median, median)] {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        assert_eq!((s.maximum, s.minimum), (max, min));
    }
}

#[test]
fn invalid_series_rejected() {
    assert!(SampleSeries::new(Vec::<f64>::new(), 1.0).is_err());
    assert!(SampleSeries::new(vec![f64::NAN], 1.0).is_err());
    assert!(SampleSeries::new(vec![1.0], 0.0).is_err());
    assert!(TriaxialSeries::from_axes(vec![1.0], vec![1.0, 2.0], vec![1.0], 1.0).is_err());
}

proptest! {
    #[test]
    fn low_pass_stays_in_range(x in prop::collection::vec(-1e3f64..1e3, 1..200), alpha in 0.001f64..=1.0) {
        let y = low_pass(&series(x.clone()), alpha).unwrap();
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(y.len(), x.len());
        for v in y.values() {
            prop_assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
        }
    }

    #[test]
    fn stats_invariants(x in prop::collection::vec(-1e6f64..1e6, 1..300)) {
        let s = raw_stats(&series(x)).unwrap();
        prop_assert!(s.minimum <= s.median && s.median <= s.maximum);
        prop_assert!(s.variance >= 0.0);
        prop_assert!((s.std_dev * s.std_dev - s.variance).abs() <= 1e-9 * s.variance.max(1.0));
    }
}
