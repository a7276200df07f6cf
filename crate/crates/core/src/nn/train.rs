use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::NetworkConfig;
use super::network::{NetworkModel, Scratch};
use super::normalize::fit_normalizer;
use crate::data::LabeledDataset;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Mean loss over consecutive blocks of `interval` iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub interval: u64,
    pub mean_losses: Vec<f64>,
}

impl<T: Real> NetworkModel<T> {
    /// Online SGD over seeded shuffled passes; one iteration is one sample.
    ///
    /// `rows` must already be normalized with this model's normalizer.
    pub fn train(&mut self, rows: &[Vec<T>], labels: &[usize], budget: u64) -> Result<TrainingHistory> {
        let interval = (budget / 100).max(1);
        let mut history = TrainingHistory {
            interval,
            mean_losses: Vec::new(),
        };
        if budget == 0 {
            return Ok(history);
        }
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(invalid("training needs a non-empty set of labelled rows"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != self.input_size()) {
            return Err(invalid(format!(
                "network expects {} inputs, got a row of {}",
                self.input_size(),
                r.len()
            )));
        }
        if labels.iter().any(|&l| l >= self.label_count()) {
            return Err(invalid("label index outside the model's dictionary"));
        }
        let lr = T::lit(self.config.learning_rate);
        let l2 = T::lit(self.config.l2_lambda);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // A resumed run continues on a stream of its own.
        rng.set_stream(self.iterations_trained);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut scratch = Scratch::new(self);
        let mut block_sum = 0.0;
        let mut block_len = 0u64;
        let mut done = 0u64;
        while done < budget {
            order.shuffle(&mut rng);
            for &i in &order {
                if done == budget {
                    break;
                }
                let loss = self.step_with(&rows[i], labels[i], lr, l2, &mut scratch)?;
                block_sum += loss.as_f64();
                block_len += 1;
                done += 1;
                if block_len == interval {
                    history.mean_losses.push(block_sum / block_len as f64);
                    block_sum = 0.0;
                    block_len = 0;
                }
            }
        }
        if block_len > 0 {
            history.mean_losses.push(block_sum / block_len as f64);
        }
        Ok(history)
    }
}

/// Fits the configured normalizer on `train`, initializes, and trains.
pub fn fit_model<T: Real>(
    cfg: &NetworkConfig,
    train: &LabeledDataset<T>,
) -> Result<(NetworkModel<T>, TrainingHistory)> {
    train.validate()?;
    if train.is_empty() {
        return Err(invalid("training dataset is empty"));
    }
    let normalizer = fit_normalizer(cfg.normalization, &train.rows)?;
    let rows = normalizer.apply_rows(&train.rows)?;
    let mut model = NetworkModel::init(cfg, train.feature_count(), train.label_names.clone())?;
    model.normalizer = normalizer;
    model.feature_names = train.feature_names.clone();
    let history = model.train(&rows, &train.labels, cfg.iteration_budget)?;
    Ok((model, history))
}
