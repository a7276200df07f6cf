use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::AudioVariant;
use crate::error::{invalid, Error, Result};
use crate::motion::MotionVariant;
use crate::scalar::Real;
use crate::sensors::SensorSet;

const ENV_PREFIX: &str = "env=";

/// Feature recipe of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Audio(AudioVariant),
    Motion {
        recipe: MotionVariant,
        sensors: SensorSet,
        with_env: bool,
    },
}

impl Variant {
    pub fn motion(recipe: MotionVariant, sensors: SensorSet, with_env: bool) -> Self {
        Variant::Motion {
            recipe,
            sensors,
            with_env,
        }
    }

    pub fn feature_names(&self, coefficient_count: usize, env_labels: &[String]) -> Vec<String> {
        match *self {
            Variant::Audio(v) => v.feature_names(coefficient_count),
            Variant::Motion {
                recipe,
                sensors,
                with_env,
            } => recipe.feature_names(sensors, with_env.then_some(env_labels)),
        }
    }

    pub fn needs_env(&self) -> bool {
        matches!(self, Variant::Motion { with_env: true, .. })
    }

    /// Recovers the recipe from a header; `None` when it matches none.
    pub fn infer(names: &[String]) -> Option<(Variant, Vec<String>)> {
        for v in AudioVariant::ALL {
            let coeffs = names.iter().filter(|n| n.starts_with("mfcc_")).count();
            if v.feature_names(coeffs) == names {
                return Some((Variant::Audio(v), Vec::new()));
            }
        }
        let env_start = names
            .iter()
            .position(|n| n.starts_with(ENV_PREFIX))
            .unwrap_or(names.len());
        let (motion, env) = names.split_at(env_start);
        let env_labels: Vec<String> = env
            .iter()
            .map(|n| n.strip_prefix(ENV_PREFIX).map(str::to_string))
            .collect::<Option<_>>()?;
        let with_env = !env_labels.is_empty();
        for recipe in MotionVariant::ALL {
            for sensors in SensorSet::all_subsets().filter(|s| s.is_motion_only()) {
                if recipe.feature_names(sensors, None) == motion {
                    return Some((Variant::motion(recipe, sensors, with_env), env_labels));
                }
            }
        }
        None
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Audio(v) => write!(f, "{v}"),
            Variant::Motion {
                recipe,
                sensors,
                with_env,
            } => {
                write!(f, "{recipe}:{sensors}")?;
                if *with_env {
                    f.write_str(":env")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Accepts `A1`..`A4`, or `F1`..`F5` optionally followed by
    /// `:<sensors>` and `:env`, e.g. `F1:ACC+MAG:env`. Sensors default to ACC.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default();
        if head.to_ascii_uppercase().starts_with('A') {
            if parts.next().is_some() {
                return Err(invalid(format!("audio variant '{s}' takes no modifiers")));
            }
            return Ok(Variant::Audio(head.parse()?));
        }
        let recipe: MotionVariant = head.parse()?;
        let mut sensors = SensorSet::ACC;
        let mut with_env = false;
        for p in parts {
            if p.eq_ignore_ascii_case("env") {
                with_env = true;
            } else {
                sensors = p.parse()?;
                if !sensors.is_motion_only() {
                    return Err(invalid(format!("'{p}' is not a motion sensor set")));
                }
            }
        }
        Ok(Variant::motion(recipe, sensors, with_env))
    }
}

/// Feature rows with a label column and an ordered label dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T: Real> {
    pub variant: Option<Variant>,
    pub env_labels: Vec<String>,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<T>>,
    /// Index into `label_names` per row.
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
    pub provenance: String,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(feature_names: Vec<String>, label_names: Vec<String>) -> Self {
        Self {
            variant: None,
            env_labels: Vec::new(),
            feature_names,
            rows: Vec::new(),
            labels: Vec::new(),
            label_names,
            provenance: String::new(),
        }
    }

    /// Appends a row, registering `label` in the dictionary if new.
    pub fn push(&mut self, row: Vec<T>, label: &str) -> Result<()> {
        if row.len() != self.feature_names.len() {
            return Err(invalid(format!(
                "row has {} values, dataset has {} features",
                row.len(),
                self.feature_names.len()
            )));
        }
        let idx = match self.label_names.iter().position(|l| l == label) {
            Some(i) => i,
            None => {
                self.label_names.push(label.to_string());
                self.label_names.len() - 1
            }
        };
        self.rows.push(row);
        self.labels.push(idx);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn label_of(&self, row: usize) -> &str {
        &self.label_names[self.labels[row]]
    }

    /// Rows per label index.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() {
            return Err(invalid("row and label counts differ"));
        }
        if let Some(r) = self.rows.iter().position(|r| r.len() != self.feature_names.len()) {
            return Err(invalid(format!("row {r} is not rectangular")));
        }
        if self.labels.iter().any(|&l| l >= self.label_names.len()) {
            return Err(invalid("label index outside the dictionary"));
        }
        Ok(())
    }

    fn subset(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            variant: self.variant,
            env_labels: self.env_labels.clone(),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Checks the header against a claimed recipe.
    pub fn check_variant(&self, claimed: &Variant, coefficient_count: usize) -> Result<()> {
        let expected = claimed.feature_names(coefficient_count, &self.env_labels);
        if expected != self.feature_names {
            return Err(Error::Format(format!(
                "header does not match variant {claimed}: expected {} columns starting {:?}, found {} starting {:?}",
                expected.len(),
                expected.first(),
                self.feature_names.len(),
                self.feature_names.first()
            )));
        }
        Ok(())
    }
}

/// Per-label shuffled split; each label contributes `round(n * test_fraction)`
/// rows (at least one, at most `n - 1`) to the test side.
pub fn stratified_split<T: Real>(
    dataset: &LabeledDataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in dataset.labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in by_label {
        if idx.len() < 2 {
            return Err(invalid(format!(
                "label '{}' has {} row(s); at least 2 are needed to split",
                dataset.label_names[label],
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

pub fn save_dataset<T: Real>(dataset: &LabeledDataset<T>, path: &Path) -> Result<()> {
    if dataset.is_empty() {
        return Err(invalid("refusing to save an empty dataset"));
    }
    dataset.validate()?;
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = dataset.feature_names.clone();
    header.push("label".into());
    writer.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (row, &label) in dataset.rows.iter().zip(&dataset.labels) {
        record.clear();
        record.extend(row.iter().map(|v| format!("{:.*e}", T::EXP_PRECISION, v)));
        record.push(dataset.label_names[label].clone());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Loads a dataset CSV. When `claimed` is given the header must match it.
pub fn load_dataset<T: Real>(path: &Path, claimed: Option<(&Variant, usize)>) -> Result<LabeledDataset<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.last().map(String::as_str) != Some("label") {
        return Err(Error::Format(format!(
            "{}: last column must be 'label'",
            path.display()
        )));
    }
    let names = header[..header.len() - 1].to_vec();
    let mut dataset = LabeledDataset::new(names, Vec::new());
    if let Some((variant, env_labels)) = Variant::infer(&dataset.feature_names) {
        dataset.variant = Some(variant);
        dataset.env_labels = env_labels;
    } else {
        dataset.env_labels = dataset
            .feature_names
            .iter()
            .filter_map(|n| n.strip_prefix(ENV_PREFIX).map(str::to_string))
            .collect();
    }
    if let Some((variant, coeffs)) = claimed {
        dataset.check_variant(variant, coeffs)?;
        dataset.variant = Some(*variant);
    }

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} columns, found {}", header.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .take(header.len() - 1)
            .map(|field| {
                field
                    .trim()
                    .parse::<T>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("'{field}' is not a finite number"),
                    })
            })
            .collect::<Result<Vec<T>>>()?;
        dataset.push(row, &record[header.len() - 1])?;
    }
    if dataset.is_empty() {
        return Err(Error::Format(format!("{}: dataset has no rows", path.display())));
    }
    dataset.provenance = format!("loaded from {}", path.display());
    Ok(dataset)
}
