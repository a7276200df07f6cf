pub mod eval;
pub mod extract;
pub mod pipeline;
pub mod sweep;
pub mod synth;
pub mod train;

use std::path::Path;

use adl_sense::data::{load_log_dir, merge_bundles, parse_sensor_log};
use adl_sense::Bundle;

use crate::error::{CliError, CliResult};

/// Reads log files and directories of logs, joining audio and motion
/// windows that share label and id.
pub fn load_bundles(paths: &[impl AsRef<Path>]) -> CliResult<Vec<Bundle>> {
    let mut all = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let loaded = if p.is_dir() {
            load_log_dir::<f64>(p)
        } else {
            parse_sensor_log::<f64>(p, None)
        };
        all.extend(loaded.map_err(|e| CliError::from(e).in_file(p))?);
    }
    Ok(merge_bundles(all)?)
}

pub fn percent(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}
