use std::fmt::Write as _;
use std::fs;

use adl_sense::data::{load_dataset, stratified_split};
use adl_sense::nn::EvalReport;
use adl_sense::Model;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};
use crate::{EvalArgs, ReportFormat};

#[derive(Serialize)]
struct Resolved {
    report: &'static str,
    holdout: Option<f64>,
}

/// Plain-text report: accuracy, confusion matrix, per-label precision and
/// recall. Percentages carry two decimals.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let total = report.total();
    let correct: u64 = (0..report.labels.len()).map(|i| report.confusion[i][i]).sum();
    writeln!(
        out,
        "accuracy: {}% ({correct} of {total})",
        super::percent(report.accuracy)
    )
    .unwrap();
    let width = report.labels.iter().map(String::len).max().unwrap_or(0).max(10);
    let cell = report
        .labels
        .iter()
        .map(String::len)
        .chain(report.confusion.iter().flatten().map(|c| c.to_string().len()))
        .max()
        .unwrap_or(1);
    writeln!(out, "\nconfusion matrix (rows: true label, columns: predicted)").unwrap();
    write!(out, "{:width$}", "").unwrap();
    for l in &report.labels {
        write!(out, "  {l:>cell$}").unwrap();
    }
    out.push('\n');
    for (l, row) in report.labels.iter().zip(&report.confusion) {
        write!(out, "{l:width$}").unwrap();
        for c in row {
            write!(out, "  {c:>cell$}").unwrap();
        }
        out.push('\n');
    }
    writeln!(
        out,
        "\n{:width$}  {:>9}  {:>9}  {:>7}",
        "label", "precision", "recall", "support"
    )
    .unwrap();
    for (i, l) in report.labels.iter().enumerate() {
        let support: u64 = report.confusion[i].iter().sum();
        writeln!(
            out,
            "{l:width$}  {:>9}  {:>9}  {support:>7}",
            super::percent(report.precision[i]),
            super::percent(report.recall[i])
        )
        .unwrap();
    }
    out
}

pub fn run(args: &EvalArgs) -> CliResult {
    if let Some(h) = args.holdout {
        if !(h > 0.0 && h < 1.0) {
            return Err(CliError::usage(format!("holdout must lie in (0, 1), got {h}")));
        }
    }
    let model = Model::load(&args.model).map_err(|e| CliError::from(e).in_file(&args.model))?;
    let ds = load_dataset::<f64>(&args.data, None).map_err(|e| CliError::from(e).in_file(&args.data))?;
    let ds = match args.holdout {
        Some(h) => stratified_split(&ds, h, args.seed)?.1,
        None => ds,
    };
    let report = model.evaluate(&ds)?;
    let text = match args.report {
        ReportFormat::Table => render_table(&report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
    };
    match &args.out {
        None => print!("{text}"),
        Some(path) => {
            fs::write(path, &text)?;
            let resolved = Resolved {
                report: match args.report {
                    ReportFormat::Table => "table",
                    ReportFormat::Json => "json",
                },
                holdout: args.holdout,
            };
            let mut m = RunManifest::new("eval", &resolved)?
                .input(&args.model)?
                .input(&args.data)?
                .output(path)?;
            if args.holdout.is_some() {
                m = m.seed("split", args.seed);
            }
            m.write(&manifest_path(path))?;
        }
    }
    Ok(())
}
