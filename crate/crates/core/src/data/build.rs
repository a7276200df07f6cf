use serde::{Deserialize, Serialize};

use super::bundle::{LabelKind, WindowBundle};
use super::dataset::{LabeledDataset, Variant};
use crate::audio::{audio_features_with, MfccConfig, MfccExtractor};
use crate::error::{invalid, Result};
use crate::motion::{motion_feature_vector, MotionConfig, OneHot};
use crate::nn::NetworkModel;
use crate::scalar::Real;
use crate::signal::SampleSeries;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mfcc: MfccConfig,
    pub motion: MotionConfig,
}

/// Where the environment one-hot of fusion rows comes from.
#[derive(Debug, Clone, Copy)]
pub enum EnvSource<'a, T: Real> {
    /// Ground-truth scene of each bundle over the given label order.
    Oracle(&'a [String]),
    /// Prediction of a trained audio model on each bundle's audio.
    Predicted(&'a NetworkModel<T>),
}

impl<T: Real> EnvSource<'_, T> {
    pub fn labels(&self) -> &[String] {
        match self {
            EnvSource::Oracle(labels) => labels,
            EnvSource::Predicted(model) => &model.labels,
        }
    }
}

/// Audio recipe a trained environment model expects, read from its
/// feature names.
pub fn env_model_variant<T: Real>(model: &NetworkModel<T>) -> Result<crate::audio::AudioVariant> {
    match Variant::infer(&model.feature_names) {
        Some((Variant::Audio(v), _)) => Ok(v),
        _ => Err(invalid("environment model was not trained on an audio recipe")),
    }
}

/// Environment index and scores predicted from one audio window.
pub fn predict_environment<T: Real>(
    model: &NetworkModel<T>,
    audio: &SampleSeries<T>,
    extractor: &MfccExtractor<T>,
) -> Result<(usize, Vec<T>)> {
    let variant = env_model_variant(model)?;
    let features = audio_features_with(audio, variant, extractor)?;
    model.predict(&features.values)
}

/// Turns labelled windows into one feature row each.
///
/// Fusion recipes with an environment block need `env`; `None` is an error.
pub fn build_dataset<T: Real>(
    bundles: &[WindowBundle<T>],
    variant: &Variant,
    env: Option<EnvSource<'_, T>>,
    cfg: &FeatureConfig,
) -> Result<LabeledDataset<T>> {
    let env = if variant.needs_env() {
        Some(env.ok_or_else(|| invalid(format!("recipe {variant} needs an environment source")))?)
    } else {
        None
    };
    let env_labels: Vec<String> = env.map(|e| e.labels().to_vec()).unwrap_or_default();
    let names = variant.feature_names(cfg.mfcc.coefficient_count, &env_labels);
    let mut ds = LabeledDataset::new(names, Vec::new());
    ds.variant = Some(*variant);
    ds.env_labels = env_labels.clone();
    let needs_audio = matches!(variant, Variant::Audio(_)) || matches!(env, Some(EnvSource::Predicted(_)));
    let extractor = if needs_audio {
        Some(MfccExtractor::<T>::new(&cfg.mfcc)?)
    } else {
        None
    };
    for b in bundles {
        let row = match *variant {
            Variant::Audio(v) => {
                let audio = b
                    .channels
                    .audio
                    .as_ref()
                    .ok_or_else(|| invalid(format!("window '{}' of '{}' has no audio", b.id, b.label)))?;
                audio_features_with(audio, v, extractor.as_ref().unwrap())?.values
            }
            Variant::Motion { recipe, sensors, .. } => {
                let one_hot = match env {
                    None => None,
                    Some(EnvSource::Oracle(labels)) => {
                        let scene = match b.label_kind {
                            LabelKind::Environment => Some(b.label.as_str()),
                            LabelKind::Adl => b.environment.as_deref(),
                        }
                        .ok_or_else(|| {
                            invalid(format!("window '{}' of '{}' has no known environment", b.id, b.label))
                        })?;
                        Some(OneHot::for_label(labels, scene)?)
                    }
                    Some(EnvSource::Predicted(model)) => {
                        let audio = b.channels.audio.as_ref().ok_or_else(|| {
                            invalid(format!(
                                "window '{}' of '{}' has no audio for the environment model",
                                b.id, b.label
                            ))
                        })?;
                        let (idx, _) = predict_environment(model, audio, extractor.as_ref().unwrap())?;
                        Some(OneHot::new(model.labels.clone(), idx)?)
                    }
                };
                motion_feature_vector(&b.channels.motion, recipe, sensors, one_hot.as_ref(), &cfg.motion)
                    .map_err(|e| invalid(format!("window '{}' of '{}': {e}", b.id, b.label)))?
                    .values
            }
        };
        ds.push(row, &b.label)?;
    }
    ds.provenance = format!(
        "{} windows, recipe {variant}{}",
        bundles.len(),
        match env {
            None => "",
            Some(EnvSource::Oracle(_)) => ", ground-truth environment",
            Some(EnvSource::Predicted(_)) => ", predicted environment",
        }
    );
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_corpus, SynthPreset, SynthSpec};
    use crate::sensors::SensorSet;

    #[test]
    fn oracle_env_block() {
        let bundles = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Standing, 2, 3)).unwrap();
        let envs: Vec<String> = crate::data::default_environments()
            .into_iter()
            .map(|e| e.label)
            .collect();
        let v: Variant = "F1:ACC:env".parse().unwrap();
        let ds = build_dataset(&bundles, &v, Some(EnvSource::Oracle(&envs)), &FeatureConfig::default()).unwrap();
        assert_eq!((ds.len(), ds.feature_count()), (4, 24));
        let bedroom = envs.iter().position(|e| e == "bedroom").unwrap();
        let block = &ds.rows[0][15..];
        assert_eq!(block.iter().sum::<f64>(), 1.0);
        assert_eq!(block[bedroom], 1.0);
        assert_eq!(ds.label_names, ["sleeping", "watching TV"]);
    }

    #[test]
    fn missing_inputs_are_errors() {
        let bundles = synth_corpus::<f64>(&SynthSpec::preset(SynthPreset::Adl, 1, 3)).unwrap();
        let cfg = FeatureConfig::default();
        assert!(build_dataset(&bundles, &"F1:ACC:env".parse().unwrap(), None, &cfg).is_err());
        assert!(build_dataset(&bundles, &"A4".parse().unwrap(), None, &cfg).is_err());
        let full = Variant::motion(crate::motion::MotionVariant::F5, SensorSet::ACC_MAG_GYRO, false);
        let ds = build_dataset(&bundles, &full, None, &cfg).unwrap();
        assert_eq!(ds.feature_count(), 6);
    }
}
