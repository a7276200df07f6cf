//! Sensor logs, window bundles, labelled datasets and synthetic corpora.

mod build;
mod bundle;
mod dataset;
mod logfile;
mod synth;

pub use build::{build_dataset, env_model_variant, predict_environment, EnvSource, FeatureConfig};
pub use bundle::{merge_bundles, Channels, LabelKind, WindowBundle, WINDOW_SECONDS, WINDOW_TOLERANCE};
pub use dataset::{load_dataset, save_dataset, stratified_split, LabeledDataset, Variant};
pub use logfile::{
    group_by_label, load_log_dir, parse_sensor_log, parse_sensor_log_str, render_sensor_log, write_sensor_log,
    LogHeader, LogKind,
};
pub use synth::{
    default_adls, default_environments, default_standing, synth_audio, synth_corpus, synth_motion, synth_window,
    AdlProfile, EnvProfile, SynthPreset, SynthSpec, AUDIO_RATE_HZ, MOTION_RATE_HZ,
};
