//! Hierarchical recognizer: environment from audio, general activity from
//! motion, and standing refinement from motion plus the recognized scene.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::{AudioVariant, MfccExtractor};
use crate::data::Channels;
use crate::data::{
    build_dataset, predict_environment, EnvSource, FeatureConfig, LabelKind, LabeledDataset, Variant, WindowBundle,
};
use crate::error::{invalid, Error, Result};
use crate::motion::{motion_feature_vector, MotionVariant, OneHot};
use crate::nn::{fit_model, NetworkConfig, NetworkModel, NormalizationKind, Preset};
use crate::scalar::Real;
use crate::sensors::{Sensor, SensorSet};

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

/// Recognition methods, from fewest to most sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    /// Microphone only: environment, no activity.
    EnvironmentOnly,
    /// Accelerometer without microphone: general activity only.
    AdlOnly,
    AccEnv,
    AccMagEnv,
    AccMagGyroEnv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Environment,
    Adl,
    Standing,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Environment => "environment",
            Stage::Adl => "adl",
            Stage::Standing => "standing",
        })
    }
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::EnvironmentOnly,
        MethodId::AdlOnly,
        MethodId::AccEnv,
        MethodId::AccMagEnv,
        MethodId::AccMagGyroEnv,
    ];

    /// Sensors the method reads.
    pub fn sensors(self) -> SensorSet {
        let mic = SensorSet::EMPTY.with(Sensor::Mic);
        match self {
            MethodId::EnvironmentOnly => mic,
            MethodId::AdlOnly => SensorSet::ACC,
            MethodId::AccEnv => SensorSet::ACC.with(Sensor::Mic),
            MethodId::AccMagEnv => SensorSet::ACC_MAG.with(Sensor::Mic),
            MethodId::AccMagGyroEnv => SensorSet::ACC_MAG_GYRO.with(Sensor::Mic),
        }
    }

    /// Motion sensors of the standing refinement, if the method has one.
    pub fn standing_sensors(self) -> Option<SensorSet> {
        match self {
            MethodId::EnvironmentOnly | MethodId::AdlOnly => None,
            MethodId::AccEnv => Some(SensorSet::ACC),
            MethodId::AccMagEnv => Some(SensorSet::ACC_MAG),
            MethodId::AccMagGyroEnv => Some(SensorSet::ACC_MAG_GYRO),
        }
    }

    fn for_standing_sensors(sensors: SensorSet) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.standing_sensors() == Some(sensors))
    }

    pub fn stages(self) -> BTreeSet<Stage> {
        match self {
            MethodId::EnvironmentOnly => [Stage::Environment].into(),
            MethodId::AdlOnly => [Stage::Adl].into(),
            _ => [Stage::Environment, Stage::Adl, Stage::Standing].into(),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodId::EnvironmentOnly => "environment_only",
            MethodId::AdlOnly => "adl_only",
            MethodId::AccEnv => "acc_env",
            MethodId::AccMagEnv => "acc_mag_env",
            MethodId::AccMagGyroEnv => "acc_mag_gyro_env",
        })
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string() == s.trim())
            .ok_or_else(|| invalid(format!("unknown method '{s}'")))
    }
}

/// Picks the method using the most available sensors.
///
/// Sets with neither an accelerometer nor a microphone are unsupported.
pub fn route_method(available: SensorSet) -> Result<MethodId> {
    let acc = available.contains(Sensor::Acc);
    let mic = available.contains(Sensor::Mic);
    match (acc, mic) {
        (false, false) => Err(Error::UnsupportedConfiguration(format!(
            "{available} has neither an accelerometer nor a microphone"
        ))),
        (false, true) => Ok(MethodId::EnvironmentOnly),
        (true, false) => Ok(MethodId::AdlOnly),
        (true, true) => Ok(if available.is_superset_of(SensorSet::ACC_MAG_GYRO) {
            MethodId::AccMagGyroEnv
        } else if available.is_superset_of(SensorSet::ACC_MAG) {
            MethodId::AccMagEnv
        } else {
            MethodId::AccEnv
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub network: NetworkConfig,
    /// Training accuracy below which the stage is rejected.
    pub min_train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub env_variant: AudioVariant,
    pub env: StageConfig,
    /// Motion recipe of the general activity stage; accelerometer only.
    pub adl_recipe: MotionVariant,
    pub adl: StageConfig,
    pub standing_recipe: MotionVariant,
    pub standing: StageConfig,
    pub standing_sets: Vec<SensorSet>,
    /// General activity label refined by the standing stage.
    pub standing_label: String,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        let stage = |network: NetworkConfig| StageConfig {
            network: network.with_seed(seed),
            min_train_accuracy: 0.5,
        };
        Self {
            features: FeatureConfig::default(),
            env_variant: AudioVariant::A1,
            env: stage(
                NetworkConfig::for_preset(Preset::Feedforward)
                    .with_normalization(NormalizationKind::None)
                    .with_budget(2_000_000),
            ),
            adl_recipe: MotionVariant::F1,
            adl: stage(NetworkConfig::for_preset(Preset::Deep).with_budget(1_000_000)),
            standing_recipe: MotionVariant::F1,
            standing: stage(NetworkConfig::for_preset(Preset::Deep).with_budget(1_000_000)),
            standing_sets: vec![SensorSet::ACC, SensorSet::ACC_MAG, SensorSet::ACC_MAG_GYRO],
            standing_label: "standing".into(),
        }
    }

    pub fn with_budgets(mut self, env: u64, adl: u64, standing: u64) -> Self {
        self.env.network.iteration_budget = env;
        self.adl.network.iteration_budget = adl;
        self.standing.network.iteration_budget = standing;
        self
    }

    pub fn adl_variant(&self) -> Variant {
        Variant::motion(self.adl_recipe, SensorSet::ACC, false)
    }

    pub fn standing_variant(&self, sensors: SensorSet) -> Variant {
        Variant::motion(self.standing_recipe, sensors, true)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.mfcc.validate()?;
        for s in &self.standing_sets {
            if MethodId::for_standing_sensors(*s).is_none() {
                return Err(invalid(format!("{s} is not a standing sensor set")));
            }
        }
        for (stage, c) in [
            ("environment", &self.env),
            ("adl", &self.adl),
            ("standing", &self.standing),
        ] {
            c.network.validate()?;
            if !(0.0..=1.0).contains(&c.min_train_accuracy) {
                return Err(invalid(format!("{stage}: minimum accuracy must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::new(42)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PipelineModel<T: Real> {
    pub format_version: u32,
    pub features: FeatureConfig,
    pub standing_label: String,
    pub adl_recipe: MotionVariant,
    pub standing_recipe: MotionVariant,
    pub env_model: NetworkModel<T>,
    pub adl_model: NetworkModel<T>,
    pub standing_models: BTreeMap<SensorSet, NetworkModel<T>>,
    /// Method per supported sensor set, adjusted to the trained standing models.
    pub routing: BTreeMap<SensorSet, MethodId>,
}

/// Per-stage scores, in each model's label order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageScores {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adl: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standing: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub method: MethodId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adl: Option<String>,
    /// General activity before standing refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1_adl: Option<String>,
    /// Sensors of the standing model that ran, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standing_sensors: Option<SensorSet>,
    pub scores: StageScores,
}

fn check_kind<T: Real>(stage: &str, bundles: &[WindowBundle<T>], kind: LabelKind) -> Result<()> {
    if bundles.is_empty() {
        return Err(invalid(format!("{stage} corpus is empty")));
    }
    if let Some(b) = bundles.iter().find(|b| b.label_kind != kind) {
        return Err(invalid(format!(
            "{stage} corpus holds window '{}' labelled {} ({}), expected {kind}",
            b.id, b.label, b.label_kind
        )));
    }
    Ok(())
}

fn train_stage<T: Real>(stage: &str, ds: &LabeledDataset<T>, cfg: &StageConfig) -> Result<NetworkModel<T>> {
    let (model, _) = fit_model(&cfg.network, ds).map_err(|e| match e {
        Error::Divergence { .. } => Error::TrainingFailure {
            stage: stage.into(),
            reason: e.to_string(),
        },
        other => other,
    })?;
    let acc = model.evaluate(ds)?.accuracy;
    if acc < cfg.min_train_accuracy {
        return Err(Error::TrainingFailure {
            stage: stage.into(),
            reason: format!(
                "training accuracy {acc:.4} is below the minimum {:.4}",
                cfg.min_train_accuracy
            ),
        });
    }
    Ok(model)
}

fn routing_table(trained: &BTreeSet<SensorSet>) -> BTreeMap<SensorSet, MethodId> {
    SensorSet::all_subsets()
        .filter_map(|s| route_method(s).ok().map(|m| (s, m)))
        .map(|(s, m)| {
            let m = match m.standing_sensors() {
                Some(set) if !trained.contains(&set) => trained
                    .iter()
                    .rev()
                    .find(|t| set.is_superset_of(**t))
                    .and_then(|t| MethodId::for_standing_sensors(*t))
                    .unwrap_or(MethodId::AdlOnly),
                _ => m,
            };
            (s, m)
        })
        .collect()
}

/// Trains the three stages in order; the standing stage sees environment
/// one-hots predicted by the freshly trained environment model.
pub fn train_pipeline<T: Real>(
    env_corpus: &[WindowBundle<T>],
    adl_corpus: &[WindowBundle<T>],
    standing_corpus: &[WindowBundle<T>],
    cfg: &PipelineConfig,
) -> Result<PipelineModel<T>> {
    cfg.validate()?;
    check_kind("environment", env_corpus, LabelKind::Environment)?;
    check_kind("adl", adl_corpus, LabelKind::Adl)?;
    check_kind("standing", standing_corpus, LabelKind::Adl)?;

    let env_ds = build_dataset(env_corpus, &Variant::Audio(cfg.env_variant), None, &cfg.features)?;
    let env_model = train_stage("environment", &env_ds, &cfg.env)?;

    let adl_ds = build_dataset(adl_corpus, &cfg.adl_variant(), None, &cfg.features)?;
    if !adl_ds.label_names.contains(&cfg.standing_label) {
        return Err(invalid(format!(
            "adl corpus lacks the '{}' label refined by the standing stage",
            cfg.standing_label
        )));
    }
    let adl_model = train_stage("adl", &adl_ds, &cfg.adl)?;

    let mut standing_models = BTreeMap::new();
    for &sensors in &cfg.standing_sets {
        let ds = build_dataset(
            standing_corpus,
            &cfg.standing_variant(sensors),
            Some(EnvSource::Predicted(&env_model)),
            &cfg.features,
        )?;
        let model = train_stage(&format!("standing {sensors}"), &ds, &cfg.standing)?;
        standing_models.insert(sensors, model);
    }
    let trained: BTreeSet<SensorSet> = standing_models.keys().copied().collect();
    Ok(PipelineModel {
        format_version: PIPELINE_FORMAT_VERSION,
        features: cfg.features.clone(),
        standing_label: cfg.standing_label.clone(),
        adl_recipe: cfg.adl_recipe,
        standing_recipe: cfg.standing_recipe,
        env_model,
        adl_model,
        standing_models,
        routing: routing_table(&trained),
    })
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

impl<T: Real> PipelineModel<T> {
    /// Method the pipeline uses for a set of available sensors.
    pub fn method_for(&self, available: SensorSet) -> Result<MethodId> {
        route_method(available)?;
        self.routing
            .get(&available)
            .copied()
            .ok_or_else(|| Error::UnsupportedConfiguration(format!("no method is routed for {available}")))
    }

    /// Runs the routed method on one unlabelled window.
    pub fn classify(&self, channels: &Channels<T>) -> Result<RecognitionResult> {
        let method = self.method_for(channels.available())?;
        self.classify_with(channels, method)
    }

    /// Runs `method`; the window must carry every sensor it reads.
    pub fn classify_with(&self, channels: &Channels<T>, method: MethodId) -> Result<RecognitionResult> {
        let available = channels.available();
        if !available.is_superset_of(method.sensors()) {
            return Err(invalid(format!(
                "method {method} needs {}, window has {available}",
                method.sensors()
            )));
        }
        let stages = method.stages();
        let mut result = RecognitionResult {
            method,
            environment: None,
            adl: None,
            stage1_adl: None,
            standing_sensors: None,
            scores: StageScores::default(),
        };
        let mut env_index = None;
        if stages.contains(&Stage::Environment) {
            let audio = channels.audio.as_ref().expect("checked above");
            let extractor = MfccExtractor::<T>::new(&self.features.mfcc)?;
            let (idx, scores) = predict_environment(&self.env_model, audio, &extractor)?;
            result.environment = Some(self.env_model.labels[idx].clone());
            result.scores.environment = Some(to_f64(&scores));
            env_index = Some(idx);
        }
        if stages.contains(&Stage::Adl) {
            let features = motion_feature_vector(
                &channels.motion,
                self.adl_recipe,
                SensorSet::ACC,
                None,
                &self.features.motion,
            )?;
            let (idx, scores) = self.adl_model.predict(&features.values)?;
            let label = self.adl_model.labels[idx].clone();
            result.scores.adl = Some(to_f64(&scores));
            result.stage1_adl = Some(label.clone());
            result.adl = Some(label);
        }
        let refine = stages.contains(&Stage::Standing) && result.stage1_adl.as_deref() == Some(&self.standing_label);
        if let (true, Some(env_idx), Some(sensors)) = (refine, env_index, method.standing_sensors()) {
            let model = self
                .standing_models
                .get(&sensors)
                .ok_or_else(|| invalid(format!("no standing model for {sensors}")))?;
            let one_hot = OneHot::new(self.env_model.labels.clone(), env_idx)?;
            let features = motion_feature_vector(
                &channels.motion,
                self.standing_recipe,
                sensors,
                Some(&one_hot),
                &self.features.motion,
            )?;
            let (idx, scores) = model.predict(&features.values)?;
            result.adl = Some(model.labels[idx].clone());
            result.scores.standing = Some(to_f64(&scores));
            result.standing_sensors = Some(sensors);
        }
        Ok(result)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid pipeline document: {e}")))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(PIPELINE_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::Format(format!(
                    "pipeline format version {v} is not supported (expected {PIPELINE_FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Format("pipeline document has no format_version".into())),
        }
        let p: Self =
            serde_json::from_value(value).map_err(|e| Error::Format(format!("invalid pipeline document: {e}")))?;
        p.env_model.validate()?;
        p.adl_model.validate()?;
        for m in p.standing_models.values() {
            m.validate()?;
        }
        Ok(p)
    }
}

/// Free-function form of [`PipelineModel::classify`].
pub fn classify_window<T: Real>(pipeline: &PipelineModel<T>, channels: &Channels<T>) -> Result<RecognitionResult> {
    pipeline.classify(channels)
}

pub fn save_pipeline<T: Real>(pipeline: &PipelineModel<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, pipeline.to_json()?)?;
    Ok(())
}

pub fn load_pipeline<T: Real>(path: impl AsRef<Path>) -> Result<PipelineModel<T>> {
    PipelineModel::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_examples() {
        assert_eq!(route_method(SensorSet::ACC).unwrap(), MethodId::AdlOnly);
        let full: SensorSet = "ACC+MAG+GYRO+MIC".parse().unwrap();
        assert_eq!(route_method(full).unwrap(), MethodId::AccMagGyroEnv);
        assert!(matches!(
            route_method(SensorSet::EMPTY),
            Err(Error::UnsupportedConfiguration(_))
        ));
        assert_eq!(route_method("ACC+GYRO+MIC".parse().unwrap()).unwrap(), MethodId::AccEnv);
        assert_eq!(
            route_method("MAG+MIC".parse().unwrap()).unwrap(),
            MethodId::EnvironmentOnly
        );
    }

    #[test]
    fn routing_is_monotone() {
        for s in SensorSet::all_subsets() {
            let Ok(m) = route_method(s) else { continue };
            for extra in Sensor::ALL {
                let bigger = route_method(s.with(extra)).unwrap();
                assert!(bigger.stages().is_superset(&m.stages()), "{s} + {extra}");
            }
        }
    }

    #[test]
    fn table_downgrades_to_trained_sets() {
        let trained: BTreeSet<SensorSet> = [SensorSet::ACC].into();
        let t = routing_table(&trained);
        assert_eq!(t[&"ACC+MAG+GYRO+MIC".parse().unwrap()], MethodId::AccEnv);
        assert_eq!(t.len(), 12);
        let none = routing_table(&BTreeSet::new());
        assert_eq!(none[&"ACC+MIC".parse().unwrap()], MethodId::AdlOnly);
    }
}
