//! Optional `--config` files in the `key = value` format.
//!
//! Feature keys apply to every command that extracts features:
//!
//! ```text
//! mfcc.frame_length = 200
//! mfcc.hop = 80
//! mfcc.fft_size = 256
//! mfcc.filter_count = 26
//! mfcc.coefficient_count = 26
//! mfcc.mel_low_hz = 0
//! mfcc.mel_high_hz = 4000
//! mfcc.log_floor = 1e-10
//! motion.low_pass_alpha = 0.1
//! ```
//!
//! Network keys take an optional stage prefix (`env.`, `adl.`, `standing.`
//! for pipelines): `preset`, `hidden_layers`, `learning_rate`, `l2_lambda`,
//! `iterations`, `normalize`. A `preset` key resets the others to that
//! preset's defaults before they apply. Command-line flags win over the file.

use std::path::Path;
use std::str::FromStr;

use adl_sense::data::FeatureConfig;
use adl_sense::kv::{split_list, KvDocument};
use adl_sense::nn::{NetworkConfig, NormalizationKind, Preset};

use crate::error::{CliError, CliResult};

pub const FEATURE_KEYS: [&str; 10] = [
    "mfcc.sample_rate_hz",
    "mfcc.frame_length",
    "mfcc.hop",
    "mfcc.fft_size",
    "mfcc.filter_count",
    "mfcc.coefficient_count",
    "mfcc.mel_low_hz",
    "mfcc.mel_high_hz",
    "mfcc.log_floor",
    "motion.low_pass_alpha",
];

pub const NETWORK_KEYS: [&str; 6] = [
    "preset",
    "hidden_layers",
    "learning_rate",
    "l2_lambda",
    "iterations",
    "normalize",
];

pub fn load(path: Option<&Path>) -> CliResult<KvDocument> {
    match path {
        None => Ok(KvDocument::default()),
        Some(p) => KvDocument::read(p).map_err(|e| CliError::usage(e).in_file(p)),
    }
}

/// Rejects keys outside `allowed`.
pub fn check_keys(doc: &KvDocument, allowed: &[String]) -> CliResult {
    for key in doc.keys() {
        if !allowed.iter().any(|a| a == key) {
            return Err(CliError::usage(format!("unknown configuration key '{key}'")));
        }
    }
    Ok(())
}

pub fn network_keys(prefix: &str) -> Vec<String> {
    NETWORK_KEYS.iter().map(|k| format!("{prefix}{k}")).collect()
}

pub fn value<T: FromStr>(doc: &KvDocument, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    doc.parse_value(key).map_err(CliError::usage)
}

pub fn features(doc: &KvDocument) -> CliResult<FeatureConfig> {
    let mut f = FeatureConfig::default();
    let m = &mut f.mfcc;
    macro_rules! set {
        ($field:expr, $key:literal) => {
            if let Some(v) = value(doc, $key)? {
                $field = v;
            }
        };
    }
    set!(m.sample_rate_hz, "mfcc.sample_rate_hz");
    set!(m.frame_length, "mfcc.frame_length");
    set!(m.hop, "mfcc.hop");
    set!(m.fft_size, "mfcc.fft_size");
    set!(m.filter_count, "mfcc.filter_count");
    set!(m.coefficient_count, "mfcc.coefficient_count");
    set!(m.mel_low_hz, "mfcc.mel_low_hz");
    set!(m.mel_high_hz, "mfcc.mel_high_hz");
    set!(m.log_floor, "mfcc.log_floor");
    set!(f.motion.low_pass_alpha, "motion.low_pass_alpha");
    f.mfcc.validate().map_err(CliError::usage)?;
    Ok(f)
}

/// Applies prefixed network keys on top of `base`.
pub fn network(doc: &KvDocument, prefix: &str, base: NetworkConfig) -> CliResult<NetworkConfig> {
    let cfg = match value::<Preset>(doc, &format!("{prefix}preset"))? {
        Some(p) => NetworkConfig::for_preset(p)
            .with_seed(base.seed)
            .with_budget(base.iteration_budget),
        None => base,
    };
    network_overrides(doc, prefix, cfg)
}

/// Applies prefixed network keys other than `preset`.
pub fn network_overrides(doc: &KvDocument, prefix: &str, mut cfg: NetworkConfig) -> CliResult<NetworkConfig> {
    let key = |k: &str| format!("{prefix}{k}");
    if let Some(v) = doc.get(&key("hidden_layers")) {
        cfg.hidden_layers = split_list(&key("hidden_layers"), v).map_err(CliError::usage)?;
    }
    if let Some(v) = value(doc, &key("learning_rate"))? {
        cfg.learning_rate = v;
    }
    if let Some(v) = value(doc, &key("l2_lambda"))? {
        cfg.l2_lambda = v;
    }
    if let Some(v) = doc.get(&key("iterations")) {
        cfg.iteration_budget = parse_count(v).map_err(CliError::usage)?;
    }
    if let Some(v) = value::<NormalizationKind>(doc, &key("normalize"))? {
        cfg.normalization = v;
    }
    Ok(cfg)
}

/// Parses iteration counts such as `2000000`, `2_000_000`, `2M` or `500k`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    let (digits, scale) = match t.chars().last() {
        Some('k' | 'K') => (&t[..t.len() - 1], 1_000),
        Some('m' | 'M') => (&t[..t.len() - 1], 1_000_000),
        _ => (t.as_str(), 1),
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| format!("invalid count '{s}'"))
}

/// Short form used in result tables: `2M`, `500k`, or the plain number.
pub fn format_count(n: u64) -> String {
    if n >= 1_000_000 && n.is_multiple_of(1_000_000) {
        format!("{}M", n / 1_000_000)
    } else if n >= 1_000 && n.is_multiple_of(1_000) {
        format!("{}k", n / 1_000)
    } else {
        n.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("2M"), Ok(2_000_000));
        assert_eq!(parse_count("500k"), Ok(500_000));
        assert_eq!(parse_count("1_000_000"), Ok(1_000_000));
        assert!(parse_count("two").is_err());
        assert_eq!(format_count(4_000_000), "4M");
        assert_eq!(format_count(60_000), "60k");
        assert_eq!(format_count(1234), "1234");
    }

    #[test]
    fn preset_key_resets_then_overrides() {
        let doc = KvDocument::parse("env.preset = deep\nenv.learning_rate = 0.05\n").unwrap();
        let base = NetworkConfig::for_preset(Preset::Mlp).with_seed(7);
        let cfg = network(&doc, "env.", base).unwrap();
        assert_eq!(cfg.hidden_layers, vec![64, 32, 16]);
        assert_eq!(cfg.learning_rate, 0.05);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn feature_overrides_are_validated() {
        let doc = KvDocument::parse("mfcc.coefficient_count = 40\n").unwrap();
        assert!(features(&doc).is_err());
        let doc = KvDocument::parse("mfcc.coefficient_count = 13\n").unwrap();
        assert_eq!(features(&doc).unwrap().mfcc.coefficient_count, 13);
    }
}
