//! Pixel-level precision, recall and F-score of shadow predictions.

use std::fmt::{self, Write as _};

use crate::error::{check_dims, Error, Result};
use crate::frame::GroundTruth;
use crate::shadow::{ClassMap, ShadowClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShadowKind {
    Cast,
    Self_,
}

impl ShadowKind {
    pub const ALL: [ShadowKind; 2] = [ShadowKind::Cast, ShadowKind::Self_];

    pub fn class(self) -> ShadowClass {
        match self {
            ShadowKind::Cast => ShadowClass::CastShadow,
            ShadowKind::Self_ => ShadowClass::SelfShadow,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShadowKind::Cast => "cast",
            ShadowKind::Self_ => "self",
        }
    }
}

impl fmt::Display for ShadowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Nothing predicted and nothing to find.
    pub fn is_vacuous(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

pub fn confusion(pred: &ClassMap, gt: &GroundTruth, kind: ShadowKind) -> Result<ConfusionCounts> {
    check_dims("confusion", pred.dims(), gt.dims())?;
    let truth = match kind {
        ShadowKind::Cast => gt.cast(),
        ShadowKind::Self_ => gt.self_shadow(),
    };
    let class = kind.class();
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.classes().iter().zip(truth.bits()) {
        match (p == class, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and their harmonic mean; every 0/0 ratio is taken as 0.
pub fn score(c: &ConfusionCounts) -> ClassScore {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassScore {
        precision,
        recall,
        f,
    }
}

/// Counts and score for one class of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassEval {
    pub counts: ConfusionCounts,
    pub score: ClassScore,
}

impl ClassEval {
    /// `None` for a vacuous frame, which is left out of the means.
    pub fn scored(&self) -> Option<&ClassScore> {
        (!self.counts.is_vacuous()).then_some(&self.score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameScore {
    pub frame_id: String,
    pub cast: ClassEval,
    pub self_: ClassEval,
}

impl FrameScore {
    pub fn get(&self, kind: ShadowKind) -> &ClassEval {
        match kind {
            ShadowKind::Cast => &self.cast,
            ShadowKind::Self_ => &self.self_,
        }
    }
}

pub fn evaluate_frame(frame_id: impl Into<String>, pred: &ClassMap, gt: &GroundTruth) -> Result<FrameScore> {
    let eval = |kind| -> Result<ClassEval> {
        let counts = confusion(pred, gt, kind)?;
        Ok(ClassEval {
            counts,
            score: score(&counts),
        })
    };
    Ok(FrameScore {
        frame_id: frame_id.into(),
        cast: eval(ShadowKind::Cast)?,
        self_: eval(ShadowKind::Self_)?,
    })
}

/// Per-frame scores of one sequence with per-class means over the scored frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub dataset: String,
    pub frames: Vec<FrameScore>,
    /// `None` when no frame had anything to score for the class.
    pub mean_cast: Option<f64>,
    pub mean_self: Option<f64>,
}

impl DatasetReport {
    pub fn mean(&self, kind: ShadowKind) -> Option<f64> {
        match kind {
            ShadowKind::Cast => self.mean_cast,
            ShadowKind::Self_ => self.mean_self,
        }
    }

    /// Mean of the available class means.
    pub fn combined(&self) -> f64 {
        let present: Vec<f64> = [self.mean_cast, self.mean_self].into_iter().flatten().collect();
        if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        }
    }

    pub fn scored_frames(&self, kind: ShadowKind) -> usize {
        self.frames.iter().filter(|f| f.get(kind).scored().is_some()).count()
    }

    /// One line per frame and class, then a summary block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# dataset {}", self.dataset).unwrap();
        writeln!(out, "frame\tclass\ttp\tfp\tfn\tprecision\trecall\tf").unwrap();
        for frame in &self.frames {
            for kind in ShadowKind::ALL {
                let e = frame.get(kind);
                let c = e.counts;
                if e.scored().is_some() {
                    writeln!(
                        out,
                        "{}\t{kind}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                        frame.frame_id, c.tp, c.fp, c.fn_, e.score.precision, e.score.recall, e.score.f
                    )
                } else {
                    writeln!(out, "{}\t{kind}\t{}\t{}\t{}\t-\t-\t-", frame.frame_id, c.tp, c.fp, c.fn_)
                }
                .unwrap();
            }
        }
        out.push('\n');
        out.push_str(&render_table(std::slice::from_ref(self)));
        out
    }
}

/// Arithmetic mean of per-frame F over the frames scored for each class.
pub fn aggregate(dataset: impl Into<String>, frames: Vec<FrameScore>) -> Result<DatasetReport> {
    if frames.is_empty() {
        return Err(Error::Validation("no frames to aggregate".into()));
    }
    let mean = |kind: ShadowKind| {
        let fs: Vec<f64> = frames.iter().filter_map(|f| f.get(kind).scored().map(|s| s.f)).collect();
        (!fs.is_empty()).then(|| fs.iter().sum::<f64>() / fs.len() as f64)
    };
    let (mean_cast, mean_self) = (mean(ShadowKind::Cast), mean(ShadowKind::Self_));
    Ok(DatasetReport {
        dataset: dataset.into(),
        frames,
        mean_cast,
        mean_self,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// Dataset / F cast / F self table with a trailing mean row over datasets.
pub fn render_table(reports: &[DatasetReport]) -> String {
    let mut out = String::new();
    writeln!(out, "Dataset\tF Cast shadow\tF Self shadow").unwrap();
    for r in reports {
        writeln!(out, "{}\t{}\t{}", r.dataset, cell(r.mean_cast), cell(r.mean_self)).unwrap();
    }
    let mean = |kind: ShadowKind| {
        let v: Vec<f64> = reports.iter().filter_map(|r| r.mean(kind)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    writeln!(out, "Mean\t{}\t{}", cell(mean(ShadowKind::Cast)), cell(mean(ShadowKind::Self_))).unwrap();
    out
}
