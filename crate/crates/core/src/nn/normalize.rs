//! Per-feature scaling learned from training rows only.

use serde::{Deserialize, Serialize};

use super::config::NormalizationKind;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// `MinMax` params are `(min, max)`, `ZScore` params are `(mean, std)`.
/// A constant training column maps every value to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Normalizer<T: Real> {
    pub kind: NormalizationKind,
    pub params: Vec<(T, T)>,
}

impl<T: Real> Normalizer<T> {
    pub fn identity() -> Self {
        Self {
            kind: NormalizationKind::None,
            params: Vec::new(),
        }
    }

    pub fn apply(&self, features: &[T]) -> Result<Vec<T>> {
        if self.kind == NormalizationKind::None {
            return Ok(features.to_vec());
        }
        if features.len() != self.params.len() {
            return Err(invalid(format!(
                "normalizer expects {} features, got {}",
                self.params.len(),
                features.len()
            )));
        }
        Ok(features
            .iter()
            .zip(&self.params)
            .map(|(&x, &(a, b))| match self.kind {
                NormalizationKind::MinMax if b > a => (x - a) / (b - a),
                NormalizationKind::ZScore if b > T::zero() => (x - a) / b,
                _ => T::zero(),
            })
            .collect())
    }

    pub fn apply_rows(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

pub fn fit_normalizer<T: Real>(kind: NormalizationKind, rows: &[Vec<T>]) -> Result<Normalizer<T>> {
    let Some(first) = rows.first() else {
        return Err(invalid("cannot fit a normalizer on an empty dataset"));
    };
    let width = first.len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(invalid("rows have inconsistent widths"));
    }
    let n = T::from_usize_lossy(rows.len());
    let params = match kind {
        NormalizationKind::None => Vec::new(),
        NormalizationKind::MinMax => (0..width)
            .map(|j| {
                rows.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                })
            })
            .collect(),
        NormalizationKind::ZScore => (0..width)
            .map(|j| {
                let mean = rows.iter().map(|r| r[j]).sum::<T>() / n;
                let var = rows
                    .iter()
                    .map(|r| {
                        let d = r[j] - mean;
                        d * d
                    })
                    .sum::<T>()
                    / n;
                (mean, var.sqrt())
            })
            .collect(),
    };
    Ok(Normalizer { kind, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn minmax_example() {
        let rows = column(&[2.0, 4.0, 6.0]);
        let n = fit_normalizer(NormalizationKind::MinMax, &rows).unwrap();
        assert_eq!(n.params, vec![(2.0, 6.0)]);
        let out: Vec<f64> = n.apply_rows(&rows).unwrap().into_iter().map(|r| r[0]).collect();
        assert_eq!(out, vec![0.0, 0.5, 1.0]);
        assert_eq!(n.apply(&[8.0]).unwrap(), vec![1.5], "no clamping");
    }

    #[test]
    fn zscore_example() {
        let rows = column(&[2.0, 4.0, 6.0]);
        let n = fit_normalizer(NormalizationKind::ZScore, &rows).unwrap();
        assert_eq!(n.params[0].0, 4.0);
        assert!((n.params[0].1 - 1.632993).abs() < 1e-6);
        let out: Vec<f64> = n.apply_rows(&rows).unwrap().into_iter().map(|r| r[0]).collect();
        for (o, e) in out.iter().zip([-1.224745, 0.0, 1.224745]) {
            assert!((o - e).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let rows = column(&[3.0, 3.0, 3.0]);
        for kind in [NormalizationKind::MinMax, NormalizationKind::ZScore] {
            let n = fit_normalizer(kind, &rows).unwrap();
            assert!(n.apply_rows(&rows).unwrap().iter().all(|r| r[0] == 0.0));
        }
    }

    #[test]
    fn none_is_identity_and_errors() {
        let n = fit_normalizer(NormalizationKind::None, &column(&[1.0, 9.0])).unwrap();
        assert_eq!(n.apply(&[7.0, 8.0]).unwrap(), vec![7.0, 8.0]);
        assert!(fit_normalizer::<f64>(NormalizationKind::MinMax, &[]).is_err());
        let m = fit_normalizer(NormalizationKind::MinMax, &column(&[1.0, 2.0])).unwrap();
        assert!(m.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn refit_after_minmax_is_unit_range() {
        let rows = vec![vec![1.0, -5.0], vec![3.0, 10.0], vec![2.0, 0.0]];
        let n = fit_normalizer(NormalizationKind::MinMax, &rows).unwrap();
        let scaled = n.apply_rows(&rows).unwrap();
        let again = fit_normalizer(NormalizationKind::MinMax, &scaled).unwrap();
        assert_eq!(again.params, vec![(0.0, 1.0), (0.0, 1.0)]);
    }
}
