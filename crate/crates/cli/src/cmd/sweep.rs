//! Grid sweeps over preset, recipe, normalization and iteration budget.
//!
//! Grid file keys, all optional:
//!
//! ```text
//! presets = mlp, feedforward, deep
//! variants = A1, A2, A3, A4
//! normalizations = none, protocol
//! budgets = 1M, 2M, 4M
//! test_fraction = 0.3
//! seed = 42
//! env_labels = bar, classroom, ...
//! ```
//!
//! `protocol` stands for each preset's usual normalization. Recipes with an
//! environment block use the ground-truth scene of each window.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use adl_sense::data::{build_dataset, default_environments, stratified_split, EnvSource, Variant};
use adl_sense::kv::{split_list, KvDocument};
use adl_sense::nn::{fit_model, NetworkConfig, NormalizationKind, Preset};
use adl_sense::Dataset;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, format_count, parse_count};
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};
use crate::SweepArgs;

const GRID_KEYS: [&str; 7] = [
    "presets",
    "variants",
    "normalizations",
    "budgets",
    "test_fraction",
    "seed",
    "env_labels",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormChoice {
    Fixed(NormalizationKind),
    Protocol,
}

impl NormChoice {
    fn resolve(self, preset: Preset) -> NormalizationKind {
        match self {
            NormChoice::Fixed(k) => k,
            NormChoice::Protocol => preset.protocol_normalization(),
        }
    }
}

impl Serialize for NormChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NormChoice::Fixed(k) => s.collect_str(k),
            NormChoice::Protocol => s.serialize_str("protocol"),
        }
    }
}

impl FromStr for NormChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("protocol") {
            return Ok(NormChoice::Protocol);
        }
        s.parse()
            .map(NormChoice::Fixed)
            .map_err(|e: adl_sense::Error| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub presets: Vec<Preset>,
    pub variants: Vec<String>,
    pub normalizations: Vec<NormChoice>,
    pub budgets: Vec<u64>,
    pub test_fraction: f64,
    pub seed: u64,
    pub env_labels: Vec<String>,
}

impl Grid {
    pub fn from_kv(doc: &KvDocument) -> CliResult<Self> {
        for key in doc.keys() {
            if !GRID_KEYS.contains(&key) {
                return Err(CliError::usage(format!("unknown grid key '{key}'")));
            }
        }
        let list = |key: &str, default: &str| -> CliResult<Vec<String>> {
            split_list(key, doc.get(key).unwrap_or(default)).map_err(CliError::usage)
        };
        let grid = Self {
            presets: list("presets", "mlp, feedforward, deep")?
                .iter()
                .map(|s| s.parse().map_err(CliError::usage))
                .collect::<CliResult<_>>()?,
            variants: list("variants", "A1, A2, A3, A4")?,
            normalizations: list("normalizations", "none, protocol")?
                .iter()
                .map(|s| s.parse().map_err(CliError::usage))
                .collect::<CliResult<_>>()?,
            budgets: list("budgets", "1M, 2M, 4M")?
                .iter()
                .map(|s| parse_count(s).map_err(CliError::usage))
                .collect::<CliResult<_>>()?,
            test_fraction: config::value(doc, "test_fraction")?.unwrap_or(0.3),
            seed: config::value(doc, "seed")?.unwrap_or(42),
            env_labels: match doc.get("env_labels") {
                Some(v) => split_list("env_labels", v).map_err(CliError::usage)?,
                None => default_environments().into_iter().map(|e| e.label).collect(),
            },
        };
        for v in &grid.variants {
            Variant::from_str(v).map_err(CliError::usage)?;
        }
        if grid.presets.is_empty()
            || grid.variants.is_empty()
            || grid.normalizations.is_empty()
            || grid.budgets.is_empty()
        {
            return Err(CliError::usage("every grid axis needs at least one value"));
        }
        if !(grid.test_fraction > 0.0 && grid.test_fraction < 1.0) {
            return Err(CliError::usage("test_fraction must lie in (0, 1)"));
        }
        Ok(grid)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &preset in &self.presets {
            for variant in &self.variants {
                for &norm in &self.normalizations {
                    for &budget in &self.budgets {
                        cells.push(Cell {
                            preset,
                            variant: variant.clone(),
                            normalization: norm.resolve(preset),
                            budget,
                        });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub preset: Preset,
    pub variant: String,
    pub normalization: NormalizationKind,
    pub budget: u64,
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    preset: Preset,
    variant: String,
    normalization: NormalizationKind,
    iterations: u64,
    seed: u64,
    train_rows: usize,
    test_rows: usize,
    accuracy_pct: String,
    #[serde(skip)]
    accuracy: f64,
}

/// Best cell per preset, laid out like a results table.
fn best_table(rows: &[Row]) -> String {
    let mut best: BTreeMap<Preset, &Row> = BTreeMap::new();
    for r in rows {
        let slot = best.entry(r.preset).or_insert(r);
        if r.accuracy > slot.accuracy {
            *slot = r;
        }
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:<12}  {:<16}  {:<14}  {:>10}  BEST ACCURACY ACHIEVED (%)",
        "FRAMEWORK", "TEST DATASET", "NORMALIZATION", "ITERATIONS"
    )
    .unwrap();
    for (preset, r) in best {
        writeln!(
            out,
            "{:<12}  {:<16}  {:<14}  {:>10}  {}",
            preset.to_string().to_uppercase(),
            r.variant,
            r.normalization.to_string(),
            format_count(r.iterations),
            r.accuracy_pct
        )
        .unwrap();
    }
    out
}

pub fn run(args: &SweepArgs) -> CliResult {
    let cfg_doc = config::load(args.config.as_deref())?;
    config::check_keys(&cfg_doc, &config::FEATURE_KEYS.map(String::from))?;
    let features = config::features(&cfg_doc)?;
    let doc = KvDocument::read(&args.grid).map_err(|e| CliError::usage(e).in_file(&args.grid))?;
    let mut grid = Grid::from_kv(&doc)?;
    if let Some(seed) = args.seed {
        grid.seed = seed;
    }

    let bundles = super::load_bundles(&[&args.corpus])?;
    let mut splits: BTreeMap<String, (Dataset, Dataset)> = BTreeMap::new();
    for name in &grid.variants {
        let variant: Variant = name.parse().map_err(CliError::usage)?;
        let env = variant.needs_env().then_some(EnvSource::Oracle(&grid.env_labels));
        let ds = build_dataset(&bundles, &variant, env, &features)?;
        splits.insert(name.clone(), stratified_split(&ds, grid.test_fraction, grid.seed)?);
    }

    let cells = grid.cells();
    eprintln!("sweeping {} cells", cells.len());
    let rows: Vec<Row> = cells
        .par_iter()
        .map(|c| -> CliResult<Row> {
            let (train, test) = &splits[&c.variant];
            let net = NetworkConfig::for_preset(c.preset)
                .with_normalization(c.normalization)
                .with_budget(c.budget)
                .with_seed(grid.seed);
            let (model, _) = fit_model(&net, train)?;
            let accuracy = model.evaluate(test)?.accuracy;
            Ok(Row {
                preset: c.preset,
                variant: c.variant.clone(),
                normalization: c.normalization,
                iterations: c.budget,
                seed: grid.seed,
                train_rows: train.len(),
                test_rows: test.len(),
                accuracy_pct: super::percent(accuracy),
                accuracy,
            })
        })
        .collect::<CliResult<_>>()?;

    let mut writer = csv::Writer::from_path(&args.out)?;
    for r in &rows {
        writer.serialize(r)?;
    }
    writer.flush()?;

    #[derive(Serialize)]
    struct Resolved<'a> {
        grid: &'a Grid,
        features: &'a adl_sense::data::FeatureConfig,
    }
    RunManifest::new(
        "sweep",
        Resolved {
            grid: &grid,
            features: &features,
        },
    )?
    .seed("sweep", grid.seed)
    .input(&args.grid)?
    .input(&args.corpus)?
    .output(&args.out)?
    .write(&manifest_path(&args.out))?;
    print!("{}", best_table(&rows));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_72_cells() {
        let grid = Grid::from_kv(&KvDocument::default()).unwrap();
        assert_eq!(grid.cells().len(), 72);
        assert_eq!(grid.budgets, vec![1_000_000, 2_000_000, 4_000_000]);
    }

    #[test]
    fn protocol_normalization_follows_preset() {
        let doc = KvDocument::parse("presets = mlp, deep\nvariants = A1\nnormalizations = protocol\nbudgets = 10k\n")
            .unwrap();
        let cells = Grid::from_kv(&doc).unwrap().cells();
        let norms: Vec<_> = cells.iter().map(|c| c.normalization).collect();
        assert_eq!(norms, [NormalizationKind::MinMax, NormalizationKind::ZScore]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Grid::from_kv(&KvDocument::parse("preset = mlp\n").unwrap()).is_err());
        assert!(Grid::from_kv(&KvDocument::parse("variants = A9\n").unwrap()).is_err());
        assert!(Grid::from_kv(&KvDocument::parse("budgets = lots\n").unwrap()).is_err());
    }
}
