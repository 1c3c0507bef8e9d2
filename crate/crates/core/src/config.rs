//! Pipeline configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! input = data/bungalows/input
//! output = out/bungalows
//! first = 1
//! last = 300
//! threshold = 10
//! erosion_passes = 1
//! structuring_element = square
//! intervals = 0 150 250 400
//! emit = motion,filled,dualmap,classes,report
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::motion::MotionThreshold;
use crate::morphology::StructuringElement;
use crate::shadow::{ShadowIntervals, DEFAULT_PERCENTILE};

pub const KEYS: &[&str] = &[
    "input",
    "output",
    "first",
    "last",
    "threshold",
    "erosion_passes",
    "structuring_element",
    "intervals",
    "calibrate",
    "percentile",
    "ground_truth",
    "emit",
    "dataset",
];

/// Raw key/value pairs, later entries overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigEntries(BTreeMap<String, String>);

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config("<file>", format!("line {}: expected `key = value`", n + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::config(key, format!("line {}: unknown key", n + 1)));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigEntries(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("`{v}`: {e}"))))
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFlags {
    pub motion: bool,
    pub filled: bool,
    pub dualmap: bool,
    pub classes: bool,
    pub report: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags {
            motion: true,
            filled: true,
            dualmap: true,
            classes: true,
            report: true,
        }
    }
}

impl EmitFlags {
    pub fn none() -> Self {
        EmitFlags {
            motion: false,
            filled: false,
            dualmap: false,
            classes: false,
            report: false,
        }
    }

    pub fn parse(list: &str) -> Result<Self> {
        let mut flags = EmitFlags::none();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "motion" => flags.motion = true,
                "filled" => flags.filled = true,
                "dualmap" => flags.dualmap = true,
                "classes" => flags.classes = true,
                "report" => flags.report = true,
                "all" => flags = EmitFlags::default(),
                "none" => flags = EmitFlags::none(),
                other => return Err(Error::config("emit", format!("unknown artifact `{other}`"))),
            }
        }
        Ok(flags)
    }

    fn render(&self) -> String {
        let names = [
            (self.motion, "motion"),
            (self.filled, "filled"),
            (self.dualmap, "dualmap"),
            (self.classes, "classes"),
            (self.report, "report"),
        ];
        let on: Vec<_> = names.iter().filter(|(b, _)| *b).map(|(_, n)| *n).collect();
        if on.is_empty() {
            "none".into()
        } else {
            on.join(",")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementShape {
    Square,
    Cross,
}

impl ElementShape {
    pub fn element(self) -> StructuringElement {
        match self {
            ElementShape::Square => StructuringElement::square(),
            ElementShape::Cross => StructuringElement::cross(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ElementShape::Square => "square",
            ElementShape::Cross => "cross",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalSource {
    Fixed(ShadowIntervals<f64>),
    /// Fit intervals to the sequence's own ground truth before classifying.
    Calibrate { percentile: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub first: Option<u64>,
    pub last: Option<u64>,
    pub threshold: MotionThreshold<f64>,
    pub erosion_passes: usize,
    pub element: ElementShape,
    pub intervals: IntervalSource,
    pub ground_truth: Option<PathBuf>,
    pub emit: EmitFlags,
    pub dataset: Option<String>,
}

pub fn parse_intervals(text: &str) -> Result<ShadowIntervals<f64>> {
    let bounds: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Error::config("intervals", format!("`{s}`: {e}"))))
        .collect::<Result<_>>()?;
    let [cast_min, cast_max, self_min, self_max] = bounds[..] else {
        return Err(Error::config(
            "intervals",
            format!("expected four numbers `cast_min cast_max self_min self_max`, got {}", bounds.len()),
        ));
    };
    ShadowIntervals::new(cast_min, cast_max, self_min, self_max)
        .map_err(|e| Error::config("intervals", e.to_string()))
}

pub fn format_intervals(iv: &ShadowIntervals<f64>) -> String {
    format!("{} {} {} {}", iv.cast_min, iv.cast_max, iv.self_min, iv.self_max)
}

impl PipelineConfig {
    /// Defaults for everything but the input directory and the intervals.
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>, intervals: IntervalSource) -> Self {
        PipelineConfig {
            input: input.into(),
            output: output.into(),
            first: None,
            last: None,
            threshold: MotionThreshold::default(),
            erosion_passes: 1,
            element: ElementShape::Square,
            intervals,
            ground_truth: None,
            emit: EmitFlags::default(),
            dataset: None,
        }
    }

    pub fn from_entries(e: &ConfigEntries) -> Result<Self> {
        let input = e
            .get("input")
            .map(PathBuf::from)
            .ok_or_else(|| Error::config("input", "required"))?;
        let output = e
            .get("output")
            .map(PathBuf::from)
            .ok_or_else(|| Error::config("output", "required"))?;
        let threshold = match e.parsed::<f64>("threshold")? {
            Some(t) => MotionThreshold::new(t).map_err(|err| Error::config("threshold", err.to_string()))?,
            None => MotionThreshold::default(),
        };
        let element = match e.get("structuring_element") {
            None | Some("square") => ElementShape::Square,
            Some("cross") => ElementShape::Cross,
            Some(other) => {
                return Err(Error::config(
                    "structuring_element",
                    format!("`{other}` is not `square` or `cross`"),
                ))
            }
        };
        let calibrate = e.parsed::<bool>("calibrate")?.unwrap_or(false);
        let percentile = e.parsed::<f64>("percentile")?.unwrap_or(DEFAULT_PERCENTILE);
        let intervals = match (e.get("intervals"), calibrate) {
            (_, true) => IntervalSource::Calibrate { percentile },
            (Some(text), false) => IntervalSource::Fixed(parse_intervals(text)?),
            (None, false) => {
                return Err(Error::config(
                    "intervals",
                    "required unless `calibrate = true`",
                ))
            }
        };
        let cfg = PipelineConfig {
            input,
            output,
            first: e.parsed("first")?,
            last: e.parsed("last")?,
            threshold,
            erosion_passes: e.parsed("erosion_passes")?.unwrap_or(1),
            element,
            intervals,
            ground_truth: e.get("ground_truth").map(PathBuf::from),
            emit: e.get("emit").map(EmitFlags::parse).transpose()?.unwrap_or_default(),
            dataset: e.get("dataset").map(str::to_string),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let (Some(first), Some(last)) = (self.first, self.last) {
            if first > last {
                return Err(Error::config("first", format!("frame range {first}..={last} is empty")));
            }
        }
        match self.intervals {
            IntervalSource::Fixed(iv) => iv.validate().map_err(|e| Error::config("intervals", e.to_string()))?,
            IntervalSource::Calibrate { percentile } => {
                if !(percentile > 0.0 && percentile < 50.0) {
                    return Err(Error::config(
                        "percentile",
                        format!("must be in (0, 50), got {percentile}"),
                    ));
                }
                if self.ground_truth.is_none() {
                    return Err(Error::config("ground_truth", "calibration needs ground truth"));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the key/value format; `from_entries(parse(to_text()))` restores `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "input = {}", self.input.display()).unwrap();
        writeln!(out, "output = {}", self.output.display()).unwrap();
        if let Some(first) = self.first {
            writeln!(out, "first = {first}").unwrap();
        }
        if let Some(last) = self.last {
            writeln!(out, "last = {last}").unwrap();
        }
        writeln!(out, "threshold = {}", self.threshold.value()).unwrap();
        writeln!(out, "erosion_passes = {}", self.erosion_passes).unwrap();
        writeln!(out, "structuring_element = {}", self.element.name()).unwrap();
        match self.intervals {
            IntervalSource::Fixed(iv) => writeln!(out, "intervals = {}", format_intervals(&iv)).unwrap(),
            IntervalSource::Calibrate { percentile } => {
                writeln!(out, "calibrate = true").unwrap();
                writeln!(out, "percentile = {percentile}").unwrap();
            }
        }
        if let Some(gt) = &self.ground_truth {
            writeln!(out, "ground_truth = {}", gt.display()).unwrap();
        }
        writeln!(out, "emit = {}", self.emit.render()).unwrap();
        if let Some(name) = &self.dataset {
            writeln!(out, "dataset = {name}").unwrap();
        }
        out
    }

    /// Dataset label for reports: the configured name or the input directory's name.
    pub fn dataset_name(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            let dir = if self.input.file_name().is_some_and(|n| n == "input") {
                self.input.parent().unwrap_or(&self.input)
            } else {
                &self.input
            };
            dir.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sequence".into())
        })
    }

    pub fn in_range(&self, number: Option<u64>) -> bool {
        if self.first.is_none() && self.last.is_none() {
            return true;
        }
        number.is_some_and(|n| self.first.is_none_or(|f| n >= f) && self.last.is_none_or(|l| n <= l))
    }
}
