use adl_sense::data::{build_dataset, default_environments, save_dataset, EnvSource};
use adl_sense::kv::split_list;
use adl_sense::Model;
use serde::Serialize;

use crate::config;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};
use crate::ExtractArgs;

#[derive(Serialize)]
struct Resolved<'a> {
    variant: String,
    env_source: &'a str,
    env_labels: &'a [String],
    features: &'a adl_sense::data::FeatureConfig,
}

pub fn run(args: &ExtractArgs) -> CliResult {
    let doc = config::load(args.config.as_deref())?;
    config::check_keys(&doc, &config::FEATURE_KEYS.map(String::from))?;
    let features = config::features(&doc)?;
    if args.variant.needs_env() && args.env_model.is_none() && !args.oracle_env {
        return Err(CliError::usage(format!(
            "recipe {} has an environment block; pass --env-model or --oracle-env",
            args.variant
        )));
    }
    let oracle_labels: Vec<String> = match &args.env_labels {
        Some(list) => split_list("env-labels", list).map_err(CliError::usage)?,
        None => default_environments().into_iter().map(|e| e.label).collect(),
    };
    let env_model = args
        .env_model
        .as_ref()
        .map(|p| Model::load(p).map_err(|e| CliError::from(e).in_file(p)))
        .transpose()?;
    let (source, source_name) = match (&env_model, args.oracle_env) {
        (Some(m), _) => (Some(EnvSource::Predicted(m)), "model"),
        (None, true) => (Some(EnvSource::Oracle(&oracle_labels)), "oracle"),
        (None, false) => (None, "none"),
    };
    let env_labels: Vec<String> = match (&source, args.variant.needs_env()) {
        (Some(s), true) => s.labels().to_vec(),
        _ => Vec::new(),
    };

    let bundles = super::load_bundles(&args.logs)?;
    let ds = build_dataset(&bundles, &args.variant, source, &features)?;
    save_dataset(&ds, &args.out)?;

    let resolved = Resolved {
        variant: args.variant.to_string(),
        env_source: source_name,
        env_labels: &env_labels,
        features: &features,
    };
    let mut manifest = RunManifest::new("extract", &resolved)?;
    for p in &args.logs {
        manifest = manifest.input(p)?;
    }
    if let Some(p) = &args.env_model {
        manifest = manifest.input(p)?;
    }
    manifest.output(&args.out)?.write(&manifest_path(&args.out))?;
    eprintln!(
        "wrote {} rows x {} features over {} labels to {}",
        ds.len(),
        ds.feature_count(),
        ds.label_names.len(),
        args.out.display()
    );
    Ok(())
}
