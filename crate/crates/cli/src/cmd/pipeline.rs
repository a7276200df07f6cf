use std::fs::File;
use std::io::{self, BufWriter, Write};

use adl_sense::kv::split_list;
use adl_sense::pipeline::{load_pipeline, save_pipeline, train_pipeline, PipelineConfig, RecognitionResult};
use adl_sense::sensors::SensorSet;
use adl_sense::{Bundle, Error, Pipeline};
use serde::Serialize;

use crate::config;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};
use crate::{PipelineRunArgs, PipelineTrainArgs};

const STAGE_KEYS: [&str; 6] = [
    "env_variant",
    "adl_recipe",
    "standing_recipe",
    "standing_sets",
    "standing_label",
    "min_train_accuracy",
];

fn resolve_config(args: &PipelineTrainArgs) -> CliResult<PipelineConfig> {
    let doc = config::load(args.config.as_deref())?;
    let mut allowed: Vec<String> = config::FEATURE_KEYS.map(String::from).to_vec();
    allowed.extend(STAGE_KEYS.map(String::from));
    for prefix in ["env.", "adl.", "standing."] {
        allowed.extend(config::network_keys(prefix));
    }
    config::check_keys(&doc, &allowed)?;

    let mut cfg = PipelineConfig::new(args.seed);
    cfg.features = config::features(&doc)?;
    if let Some(v) = config::value(&doc, "env_variant")? {
        cfg.env_variant = v;
    }
    if let Some(v) = config::value(&doc, "adl_recipe")? {
        cfg.adl_recipe = v;
    }
    if let Some(v) = config::value(&doc, "standing_recipe")? {
        cfg.standing_recipe = v;
    }
    if let Some(v) = doc.get("standing_sets") {
        cfg.standing_sets = split_list("standing_sets", v).map_err(CliError::usage)?;
    }
    if let Some(v) = doc.get("standing_label") {
        cfg.standing_label = v.to_string();
    }
    if let Some(v) = config::value::<f64>(&doc, "min_train_accuracy")? {
        for stage in [&mut cfg.env, &mut cfg.adl, &mut cfg.standing] {
            stage.min_train_accuracy = v;
        }
    }
    cfg.env.network = config::network(&doc, "env.", cfg.env.network)?;
    cfg.adl.network = config::network(&doc, "adl.", cfg.adl.network)?;
    cfg.standing.network = config::network(&doc, "standing.", cfg.standing.network)?;
    let budgets = [
        (&mut cfg.env.network, args.env_iterations),
        (&mut cfg.adl.network, args.adl_iterations),
        (&mut cfg.standing.network, args.standing_iterations),
    ];
    for (net, flag) in budgets {
        if let Some(i) = flag {
            net.iteration_budget = i;
        }
        net.seed = args.seed;
    }
    cfg.validate().map_err(CliError::usage)?;
    Ok(cfg)
}

pub fn train(args: &PipelineTrainArgs) -> CliResult {
    let cfg = resolve_config(args)?;
    let env = super::load_bundles(&[&args.env_logs])?;
    let adl = super::load_bundles(&[&args.adl_logs])?;
    let standing = super::load_bundles(&[&args.standing_logs])?;
    eprintln!(
        "training on {} environment, {} activity and {} standing windows",
        env.len(),
        adl.len(),
        standing.len()
    );
    let pipeline = train_pipeline(&env, &adl, &standing, &cfg)?;
    save_pipeline(&pipeline, &args.out)?;
    RunManifest::new("pipeline train", &cfg)?
        .seed("pipeline", args.seed)
        .input(&args.env_logs)?
        .input(&args.adl_logs)?
        .input(&args.standing_logs)?
        .output(&args.out)?
        .write(&manifest_path(&args.out))?;
    for (set, method) in &pipeline.routing {
        eprintln!("  {set:<16} -> {method}");
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct Line<'a> {
    id: &'a str,
    label: &'a str,
    available: SensorSet,
    #[serde(flatten)]
    result: Option<RecognitionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Writes one JSON line per window; returns how many were rejected.
fn write_lines(
    pipeline: &Pipeline,
    bundles: &[Bundle],
    sensors: Option<SensorSet>,
    sink: &mut dyn Write,
) -> io::Result<usize> {
    let mut rejected = 0;
    for b in bundles {
        let channels = match sensors {
            Some(s) => b.channels.restricted_to(s),
            None => b.channels.clone(),
        };
        let (result, error) = match pipeline.classify(&channels) {
            Ok(r) => (Some(r), None),
            Err(e @ Error::UnsupportedConfiguration(_)) => {
                rejected += 1;
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(io::Error::other(e)),
        };
        let line = Line {
            id: &b.id,
            label: &b.label,
            available: channels.available(),
            result,
            error,
        };
        serde_json::to_writer(&mut *sink, &line)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(rejected)
}

pub fn run(args: &PipelineRunArgs) -> CliResult {
    let pipeline: Pipeline = load_pipeline(&args.pipeline).map_err(|e| CliError::from(e).in_file(&args.pipeline))?;
    let bundles = super::load_bundles(&args.logs)?;
    let mut sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let rejected = match write_lines(&pipeline, &bundles, args.sensors, sink.as_mut()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
        other => other?,
    };
    drop(sink);
    if let Some(p) = &args.out {
        #[derive(Serialize)]
        struct Resolved {
            sensors: Option<SensorSet>,
        }
        let mut m = RunManifest::new("pipeline run", Resolved { sensors: args.sensors })?.input(&args.pipeline)?;
        for l in &args.logs {
            m = m.input(l)?;
        }
        m.output(p)?.write(&manifest_path(p))?;
    }
    eprintln!(
        "classified {} windows, {rejected} without a usable sensor",
        bundles.len()
    );
    Ok(())
}
