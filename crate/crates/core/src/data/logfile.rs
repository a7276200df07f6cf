//! Plain-text sensor log format.
//!
//! ```text
//! #adl-sense v1 kind=motion label=walking label_kind=ADL rate_hz=100 sensors=ACC+MAG env=street
//! #window 0
//! 0,0.1,0.2,9.8,22.0,-5.0,-40.0
//! 10,0.1,0.3,9.7,22.1,-5.1,-40.2
//! ```
//!
//! Audio logs hold one sample per line. Header values may contain spaces;
//! `sensors` applies to motion logs only and `env` is optional.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::bundle::{Channels, LabelKind, WindowBundle};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::sensors::{Sensor, SensorSet};
use crate::signal::{SampleSeries, TriaxialSeries};

const MAGIC: &str = "#adl-sense";
const VERSION: &str = "v1";
const WINDOW: &str = "#window";
const HEADER_KEYS: [&str; 6] = ["kind", "label", "label_kind", "rate_hz", "sensors", "env"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogKind {
    Audio,
    Motion,
}

impl fmt::Display for LogKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogKind::Audio => "audio",
            LogKind::Motion => "motion",
        })
    }
}

impl FromStr for LogKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "audio" => Ok(LogKind::Audio),
            "motion" => Ok(LogKind::Motion),
            other => Err(invalid(format!("unknown log kind '{other}'"))),
        }
    }
}

/// Parsed first line of a log file.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHeader {
    pub kind: LogKind,
    pub label: String,
    pub label_kind: LabelKind,
    pub rate_hz: f64,
    pub sensors: SensorSet,
    pub environment: Option<String>,
}

impl LogHeader {
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let rest = line
            .strip_prefix(MAGIC)
            .ok_or_else(|| format!("missing '{MAGIC}' header"))?;
        let mut tokens = rest.split_whitespace();
        match tokens.next() {
            Some(VERSION) => {}
            Some(v) => return Err(format!("unsupported log version '{v}'")),
            None => return Err("missing log version".into()),
        }
        let mut fields: Vec<(String, String)> = Vec::new();
        for tok in tokens {
            let starts_pair = tok.split_once('=').is_some_and(|(k, _)| HEADER_KEYS.contains(&k));
            if starts_pair {
                let (k, v) = tok.split_once('=').unwrap();
                if fields.iter().any(|(f, _)| f == k) {
                    return Err(format!("duplicate header key '{k}'"));
                }
                fields.push((k.to_string(), v.to_string()));
            } else if let Some((_, v)) = fields.last_mut() {
                v.push(' ');
                v.push_str(tok);
            } else {
                return Err(format!("unexpected header token '{tok}'"));
            }
        }
        let get = |k: &str| fields.iter().find(|(f, _)| f == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| format!("header lacks '{k}'"));
        let kind: LogKind = need("kind")?.parse().map_err(|e: Error| e.to_string())?;
        let label = need("label")?.to_string();
        if label.is_empty() {
            return Err("empty label".into());
        }
        let label_kind: LabelKind = need("label_kind")?.parse().map_err(|e: Error| e.to_string())?;
        let rate_hz: f64 = need("rate_hz")?
            .parse()
            .map_err(|_| format!("invalid rate_hz '{}'", get("rate_hz").unwrap()))?;
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(format!("rate_hz must be positive, got {rate_hz}"));
        }
        let sensors = match (kind, get("sensors")) {
            (LogKind::Audio, None) => SensorSet::EMPTY.with(Sensor::Mic),
            (LogKind::Audio, Some(_)) => return Err("audio logs take no 'sensors' key".into()),
            (LogKind::Motion, None) => SensorSet::ACC,
            (LogKind::Motion, Some(s)) => {
                let set: SensorSet = s.parse().map_err(|e: Error| e.to_string())?;
                if set.is_empty() || !set.is_motion_only() {
                    return Err(format!("'{s}' is not a motion sensor set"));
                }
                set
            }
        };
        let environment = get("env").map(str::to_string).filter(|e| !e.is_empty());
        Ok(Self {
            kind,
            label,
            label_kind,
            rate_hz,
            sensors,
            environment,
        })
    }
}

impl fmt::Display for LogHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{MAGIC} {VERSION} kind={} label={} label_kind={} rate_hz={}",
            self.kind, self.label, self.label_kind, self.rate_hz
        )?;
        if self.kind == LogKind::Motion {
            write!(f, " sensors={}", self.sensors)?;
        }
        if let Some(env) = &self.environment {
            write!(f, " env={env}")?;
        }
        Ok(())
    }
}

struct WindowAcc<T> {
    id: String,
    line: usize,
    audio: Vec<T>,
    axes: Vec<Vec<T>>,
    last_t: Option<f64>,
}

fn finish_window<T: Real>(path: &Path, header: &LogHeader, w: WindowAcc<T>) -> Result<WindowBundle<T>> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: w.line,
        message,
    };
    let rate = T::lit(header.rate_hz);
    let mut channels = Channels::default();
    match header.kind {
        LogKind::Audio => {
            channels.audio = Some(SampleSeries::new(w.audio, rate).map_err(|e| err(e.to_string()))?);
        }
        LogKind::Motion => {
            let mut axes = w.axes.into_iter();
            for sensor in header.sensors.motion() {
                let (x, y, z) = (axes.next().unwrap(), axes.next().unwrap(), axes.next().unwrap());
                let tri = TriaxialSeries::from_axes(x, y, z, rate).map_err(|e| err(e.to_string()))?;
                channels.motion.insert(sensor, tri);
            }
        }
    }
    let mut bundle = WindowBundle::new(w.id.clone(), channels, header.label.clone(), header.label_kind)
        .map_err(|e| err(format!("window '{}': {}", w.id, e)))?;
    bundle.environment = header.environment.clone();
    Ok(bundle)
}

/// Parses a log file into one bundle per `#window` block.
///
/// An empty file yields no bundles. `expected` rejects a log of the other kind.
pub fn parse_sensor_log<T: Real>(path: impl AsRef<Path>, expected: Option<LogKind>) -> Result<Vec<WindowBundle<T>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_sensor_log_str(&text, path, expected)
}

/// Same as [`parse_sensor_log`] on in-memory text; `path` only labels errors.
pub fn parse_sensor_log_str<T: Real>(
    text: &str,
    path: &Path,
    expected: Option<LogKind>,
) -> Result<Vec<WindowBundle<T>>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = loop {
        match lines.next() {
            None => return Ok(Vec::new()),
            Some((_, "")) => continue,
            Some((n, l)) => break LogHeader::parse(l).map_err(|m| err(n, m))?,
        }
    };
    if let Some(k) = expected {
        if k != header.kind {
            return Err(err(1, format!("expected a {k} log, found {}", header.kind)));
        }
    }
    let columns = 1 + 3 * header.sensors.motion().count();
    let mut out = Vec::new();
    let mut current: Option<WindowAcc<T>> = None;
    let mut seen_ids: Vec<String> = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(WINDOW) {
            let id = rest.trim();
            if id.is_empty() || !rest.starts_with(char::is_whitespace) {
                return Err(err(n, "window line lacks an id".into()));
            }
            if seen_ids.iter().any(|s| s == id) {
                return Err(err(n, format!("duplicate window id '{id}'")));
            }
            seen_ids.push(id.to_string());
            if let Some(w) = current.take() {
                out.push(finish_window(path, &header, w)?);
            }
            current = Some(WindowAcc {
                id: id.to_string(),
                line: n,
                audio: Vec::new(),
                axes: vec![Vec::new(); columns - 1],
                last_t: None,
            });
            continue;
        }
        if line.starts_with('#') {
            return Err(err(n, format!("unexpected directive '{line}'")));
        }
        let w = current
            .as_mut()
            .ok_or_else(|| err(n, "sample before the first '#window' line".into()))?;
        let parse = |s: &str| -> Result<T> {
            let v: T = s
                .trim()
                .parse()
                .map_err(|_| err(n, format!("invalid number '{}'", s.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(n, format!("non-finite sample '{}'", s.trim())))
            }
        };
        match header.kind {
            LogKind::Audio => {
                if line.contains(',') {
                    return Err(err(n, "audio lines hold exactly one sample".into()));
                }
                w.audio.push(parse(line)?);
            }
            LogKind::Motion => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != columns {
                    return Err(err(
                        n,
                        format!(
                            "expected {columns} columns for {}, found {}",
                            header.sensors,
                            fields.len()
                        ),
                    ));
                }
                let t = parse(fields[0])?.as_f64();
                if w.last_t.is_some_and(|prev| t <= prev) {
                    return Err(err(n, format!("timestamp {t} does not increase")));
                }
                w.last_t = Some(t);
                for (axis, f) in w.axes.iter_mut().zip(&fields[1..]) {
                    axis.push(parse(f)?);
                }
            }
        }
    }
    if let Some(w) = current.take() {
        out.push(finish_window(path, &header, w)?);
    }
    Ok(out)
}

/// Renders bundles of one label as a log of the given kind.
///
/// Every bundle must carry the channels of `kind`; motion timestamps are
/// regenerated from the sample rate.
pub fn render_sensor_log<T: Real>(bundles: &[WindowBundle<T>], kind: LogKind) -> Result<String> {
    let first = bundles.first().ok_or_else(|| invalid("no windows to write"))?;
    let sensors = match kind {
        LogKind::Audio => SensorSet::EMPTY.with(Sensor::Mic),
        LogKind::Motion => SensorSet::from_sensors(first.channels.motion.keys().copied()),
    };
    let rate = match kind {
        LogKind::Audio => first.channels.audio.as_ref().map(|a| a.sample_rate_hz()),
        LogKind::Motion => first.channels.motion.values().next().map(|t| t.sample_rate_hz()),
    }
    .ok_or_else(|| invalid(format!("window '{}' has no {kind} channel", first.id)))?;
    let header = LogHeader {
        kind,
        label: first.label.clone(),
        label_kind: first.label_kind,
        rate_hz: rate.as_f64(),
        sensors,
        environment: first.environment.clone(),
    };
    let mut out = String::new();
    writeln!(out, "{header}").unwrap();
    for b in bundles {
        if b.label != header.label || b.label_kind != header.label_kind || b.environment != header.environment {
            return Err(invalid(format!("window '{}' does not share the log's label", b.id)));
        }
        writeln!(out, "{WINDOW} {}", b.id).unwrap();
        match kind {
            LogKind::Audio => {
                let a = b
                    .channels
                    .audio
                    .as_ref()
                    .filter(|a| a.sample_rate_hz() == rate)
                    .ok_or_else(|| invalid(format!("window '{}' lacks audio at {rate} Hz", b.id)))?;
                for v in a.values() {
                    writeln!(out, "{v}").unwrap();
                }
            }
            LogKind::Motion => {
                let tris: Vec<&TriaxialSeries<T>> = sensors
                    .motion()
                    .map(|s| b.channels.motion.get(&s).filter(|t| t.sample_rate_hz() == rate))
                    .collect::<Option<_>>()
                    .ok_or_else(|| invalid(format!("window '{}' lacks {sensors} at {rate} Hz", b.id)))?;
                let n = tris[0].len();
                if tris.iter().any(|t| t.len() != n) {
                    return Err(invalid(format!("window '{}' has sensors of different lengths", b.id)));
                }
                let step_ms = 1000.0 / rate.as_f64();
                for i in 0..n {
                    write!(out, "{}", i as f64 * step_ms).unwrap();
                    for t in &tris {
                        write!(
                            out,
                            ",{},{},{}",
                            t.x().values()[i],
                            t.y().values()[i],
                            t.z().values()[i]
                        )
                        .unwrap();
                    }
                    out.push('\n');
                }
            }
        }
    }
    Ok(out)
}

pub fn write_sensor_log<T: Real>(path: impl AsRef<Path>, bundles: &[WindowBundle<T>], kind: LogKind) -> Result<()> {
    fs::write(path, render_sensor_log(bundles, kind)?)?;
    Ok(())
}

/// Parses every `*.log` file under `dir` in file-name order and merges
/// audio and motion windows that share label and id.
pub fn load_log_dir<T: Real>(dir: impl AsRef<Path>) -> Result<Vec<WindowBundle<T>>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "log"))
        .collect();
    paths.sort();
    let mut all = Vec::new();
    for p in paths {
        all.extend(parse_sensor_log(&p, None)?);
    }
    super::bundle::merge_bundles(all)
}

/// Groups bundles by label in first-appearance order.
pub fn group_by_label<T: Real>(bundles: &[WindowBundle<T>]) -> Vec<(String, Vec<WindowBundle<T>>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<WindowBundle<T>>> = BTreeMap::new();
    for b in bundles {
        if !groups.contains_key(&b.label) {
            order.push(b.label.clone());
        }
        groups.entry(b.label.clone()).or_default().push(b.clone());
    }
    order
        .into_iter()
        .map(|l| {
            let g = groups.remove(&l).unwrap();
            (l, g)
        })
        .collect()
}
