use std::fs;

use adl_sense::data::{group_by_label, synth_corpus, write_sensor_log, LabelKind, LogKind, SynthSpec};
use adl_sense::kv::KvDocument;
use adl_sense::sensors::Sensor;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::SynthArgs;

/// File-name stem for a label: lowercase alphanumerics, everything else `_`.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

pub fn run(args: &SynthArgs) -> CliResult {
    let doc = KvDocument::read(&args.spec).map_err(|e| CliError::usage(e).in_file(&args.spec))?;
    let mut spec = SynthSpec::from_kv(&doc).map_err(CliError::usage)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let mut kinds = Vec::new();
    if spec.kind == LabelKind::Adl {
        kinds.push(LogKind::Motion);
    }
    if spec.kind == LabelKind::Environment || spec.sensors.contains(Sensor::Mic) {
        kinds.push(LogKind::Audio);
    }
    let stems: Vec<String> = spec.labels().iter().map(|l| slug(l)).collect();
    if let Some(dup) = stems.iter().enumerate().find(|(i, s)| stems[..*i].contains(s)) {
        return Err(CliError::usage(format!("two labels map to the file name '{}'", dup.1)));
    }

    let corpus = synth_corpus::<f64>(&spec)?;
    fs::create_dir_all(&args.out)?;
    let mut manifest = RunManifest::new("synth", &spec)?
        .seed("synth", spec.seed)
        .input(&args.spec)?;
    for (label, bundles) in group_by_label(&corpus) {
        for &kind in &kinds {
            let path = args.out.join(format!("{}.{kind}.log", slug(&label)));
            write_sensor_log(&path, &bundles, kind)?;
            manifest = manifest.output(&path)?;
        }
    }
    manifest.write(&args.out.join("manifest.json"))?;
    eprintln!(
        "wrote {} windows over {} labels to {}",
        corpus.len(),
        spec.labels().len(),
        args.out.display()
    );
    Ok(())
}
