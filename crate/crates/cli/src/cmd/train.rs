use adl_sense::data::{load_dataset, stratified_split};
use adl_sense::nn::{fit_model, NetworkConfig, Preset};
use serde::Serialize;

use crate::config;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};
use crate::TrainArgs;

#[derive(Serialize)]
struct Resolved<'a> {
    network: &'a NetworkConfig,
    holdout: Option<f64>,
}

pub fn run(args: &TrainArgs) -> CliResult {
    let doc = config::load(args.config.as_deref())?;
    let mut allowed = config::network_keys("");
    allowed.push("holdout".into());
    config::check_keys(&doc, &allowed)?;

    let preset = match args.preset {
        Some(p) => p,
        None => config::value(&doc, "preset")?.unwrap_or(Preset::Feedforward),
    };
    let mut cfg = config::network_overrides(&doc, "", NetworkConfig::for_preset(preset))?;
    if let Some(n) = args.normalize {
        cfg.normalization = n;
    }
    if let Some(i) = args.iterations {
        cfg.iteration_budget = i;
    }
    cfg.seed = args.seed;
    cfg.validate().map_err(CliError::usage)?;
    let holdout = args.holdout.or(config::value(&doc, "holdout")?);
    if let Some(h) = holdout {
        if !(h > 0.0 && h < 1.0) {
            return Err(CliError::usage(format!("holdout must lie in (0, 1), got {h}")));
        }
    }

    let ds = load_dataset::<f64>(&args.data, None).map_err(|e| CliError::from(e).in_file(&args.data))?;
    let (train, test) = match holdout {
        Some(h) => {
            let (a, b) = stratified_split(&ds, h, args.seed)?;
            (a, Some(b))
        }
        None => (ds, None),
    };
    let (model, history) = fit_model(&cfg, &train)?;
    model.save(&args.out)?;

    let resolved = Resolved { network: &cfg, holdout };
    RunManifest::new("train", &resolved)?
        .seed("train", cfg.seed)
        .input(&args.data)?
        .output(&args.out)?
        .write(&manifest_path(&args.out))?;

    let train_acc = model.evaluate(&train)?.accuracy;
    eprintln!(
        "trained {} ({:?}, {}) on {} rows for {} iterations; final mean loss {:.6}",
        cfg.preset,
        model.layer_sizes,
        cfg.normalization,
        train.len(),
        model.iterations_trained,
        history.mean_losses.last().copied().unwrap_or(f64::NAN)
    );
    println!("training accuracy: {}%", super::percent(train_acc));
    if let Some(test) = test {
        println!("test accuracy: {}%", super::percent(model.evaluate(&test)?.accuracy));
    }
    Ok(())
}
