//! End-to-end processing of a frame sequence: motion, post-processing,
//! eigen-sum classification, artifact writing, evaluation and sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::ImageFormat;

use crate::config::{format_intervals, IntervalSource, PipelineConfig};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate, evaluate_frame, DatasetReport, FrameScore};
use crate::frame::{
    ground_truth_paths, list_frames, load_frame, load_ground_truth, save_frame, save_mask, save_png,
    FrameEntry, GroundTruth, RgbFrame,
};
use crate::morphology::{postprocess, HoleFilledFrame, StructuringElement};
use crate::motion::{segment_motion, MotionFrame, MotionThreshold};
use crate::shadow::{calibrate_intervals, classify_shadows, eigen_sum_map, ClassMap, EigenSumMap, ShadowIntervals};

/// Motion and blob stages for one frame pair, before classification.
#[derive(Debug, Clone)]
pub struct BlobStage {
    pub motion: MotionFrame,
    pub filled: HoleFilledFrame,
    pub sums: EigenSumMap<f64>,
}

#[derive(Debug, Clone)]
pub struct PairOutput {
    pub blobs: BlobStage,
    pub classes: ClassMap,
    pub overlay: RgbFrame,
}

pub fn blob_stage(
    prev: &RgbFrame,
    cur: &RgbFrame,
    threshold: MotionThreshold<f64>,
    se: &StructuringElement,
    passes: usize,
) -> Result<BlobStage> {
    let motion = segment_motion(prev, cur, threshold)?;
    let filled = postprocess(cur, &motion.mask, se, passes)?;
    let sums = eigen_sum_map(&filled)?;
    Ok(BlobStage { motion, filled, sums })
}

pub fn classify_stage(blobs: BlobStage, intervals: &ShadowIntervals<f64>) -> Result<PairOutput> {
    let (classes, overlay) = classify_shadows(&blobs.sums, &blobs.filled, intervals)?;
    Ok(PairOutput {
        blobs,
        classes,
        overlay,
    })
}

pub fn save_class_map(map: &ClassMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    save_png(path, |p| map.to_image().save_with_format(p, ImageFormat::Png))
}

pub fn load_class_map(path: impl AsRef<Path>) -> Result<ClassMap> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io {
            path: path.into(),
            source: io,
        },
        other => Error::Format {
            path: path.into(),
            message: other.to_string(),
        },
    })?;
    if img.color() != image::ColorType::L8 {
        return Err(Error::Format {
            path: path.into(),
            message: format!("class map must be 8-bit grayscale, got {:?}", img.color()),
        });
    }
    ClassMap::from_image(&img.to_luma8()).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Artifact path for a frame: `<dir>/<id>.<stage>.png`.
pub fn artifact_path(dir: &Path, id: &str, stage: &str) -> PathBuf {
    dir.join(format!("{id}.{stage}.png"))
}

pub const REPORT_FILE: &str = "report.txt";
pub const CALIBRATION_FILE: &str = "calibration.cfg";

/// Ground truth for a frame if both class masks exist.
fn ground_truth_for(dir: Option<&Path>, id: &str) -> Result<Option<GroundTruth>> {
    let Some(dir) = dir else {
        return Ok(None);
    };
    let (cast, self_) = ground_truth_paths(dir, id);
    match (cast.is_file(), self_.is_file()) {
        (true, true) => load_ground_truth(&cast, &self_).map(Some),
        (false, false) => Ok(None),
        (true, false) => Err(Error::Io {
            path: self_,
            source: std::io::ErrorKind::NotFound.into(),
        }),
        (false, true) => Err(Error::Io {
            path: cast,
            source: std::io::ErrorKind::NotFound.into(),
        }),
    }
}

/// Frames selected by the configured range, at least two of them.
pub fn select_frames(cfg: &PipelineConfig) -> Result<Vec<FrameEntry>> {
    if !cfg.input.is_dir() {
        return Err(Error::Io {
            path: cfg.input.clone(),
            source: std::io::ErrorKind::NotFound.into(),
        });
    }
    let frames: Vec<_> = list_frames(&cfg.input)?
        .into_iter()
        .filter(|f| cfg.in_range(f.number))
        .collect();
    if frames.len() < 2 {
        return Err(Error::config(
            "first",
            format!(
                "{} frame(s) selected from {}; at least two are needed",
                frames.len(),
                cfg.input.display()
            ),
        ));
    }
    Ok(frames)
}

/// Calls `f` with the blob stage of every consecutive frame pair whose later
/// frame index passes `wanted`.
fn for_each_pair(
    frames: &[FrameEntry],
    threshold: MotionThreshold<f64>,
    se: &StructuringElement,
    passes: usize,
    wanted: impl Fn(usize) -> bool,
    mut f: impl FnMut(usize, &FrameEntry, BlobStage) -> Result<()>,
) -> Result<()> {
    let mut prev = load_frame(&frames[0].path)?;
    for (i, entry) in frames.iter().enumerate().skip(1) {
        let cur = load_frame(&entry.path)?;
        if !wanted(i) {
            prev = cur;
            continue;
        }
        if cur.dims() != prev.dims() {
            return Err(Error::Format {
                path: entry.path.clone(),
                message: format!(
                    "frame is {}x{} but the previous frame is {}x{}",
                    cur.width(),
                    cur.height(),
                    prev.width(),
                    prev.height()
                ),
            });
        }
        let blobs = blob_stage(&prev, &cur, threshold, se, passes)?;
        f(i, entry, blobs)?;
        prev = cur;
    }
    Ok(())
}

fn load_truths(frames: &[FrameEntry], gt_dir: &Path) -> Result<Vec<Option<GroundTruth>>> {
    frames.iter().map(|f| ground_truth_for(Some(gt_dir), &f.id)).collect()
}

/// Fits intervals to every ground-truth frame of the configured sequence.
pub fn calibrate(cfg: &PipelineConfig, percentile: f64) -> Result<ShadowIntervals<f64>> {
    let gt_dir = cfg
        .ground_truth
        .as_deref()
        .ok_or_else(|| Error::config("ground_truth", "calibration needs ground truth"))?;
    let frames = select_frames(cfg)?;
    let mut gts = load_truths(&frames, gt_dir)?;
    let mut maps = Vec::new();
    let mut truths = Vec::new();
    for_each_pair(
        &frames,
        cfg.threshold,
        &cfg.element.element(),
        cfg.erosion_passes,
        |i| gts[i].is_some(),
        |i, _, blobs| {
            maps.push(blobs.sums);
            truths.push(i);
            Ok(())
        },
    )?;
    let truths: Vec<GroundTruth> = truths
        .into_iter()
        .map(|i| gts[i].take().expect("selected frames have ground truth"))
        .collect();
    if maps.is_empty() {
        return Err(Error::Calibration(format!(
            "no ground truth found under {} for the selected frames",
            gt_dir.display()
        )));
    }
    calibrate_intervals(&maps, &truths, percentile)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub pairs: usize,
    pub intervals: ShadowIntervals<f64>,
    pub report: Option<DatasetReport>,
}

/// Runs the whole pipeline over the configured sequence and writes the enabled artifacts.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let frames = select_frames(cfg)?;
    let intervals = match cfg.intervals {
        IntervalSource::Fixed(iv) => iv,
        IntervalSource::Calibrate { percentile } => calibrate(cfg, percentile)?,
    };
    fs::create_dir_all(&cfg.output).map_err(|e| Error::Io {
        path: cfg.output.clone(),
        source: e,
    })?;
    if matches!(cfg.intervals, IntervalSource::Calibrate { .. }) {
        let path = cfg.output.join(CALIBRATION_FILE);
        fs::write(&path, format!("intervals = {}\n", format_intervals(&intervals)))
            .map_err(|e| Error::Io { path, source: e })?;
    }

    let se = cfg.element.element();
    let out = cfg.output.as_path();
    let mut scores: Vec<FrameScore> = Vec::new();
    let mut pairs = 0;
    for_each_pair(&frames, cfg.threshold, &se, cfg.erosion_passes, |_| true, |_, entry, blobs| {
        let result = classify_stage(blobs, &intervals)?;
        pairs += 1;
        if cfg.emit.motion {
            save_mask(&result.blobs.motion.mask, artifact_path(out, &entry.id, "motion"))?;
        }
        if cfg.emit.filled {
            save_mask(&result.blobs.filled.mask, artifact_path(out, &entry.id, "filled"))?;
        }
        if cfg.emit.dualmap {
            save_frame(&result.overlay, artifact_path(out, &entry.id, "dualmap"))?;
        }
        if cfg.emit.classes {
            save_class_map(&result.classes, artifact_path(out, &entry.id, "classes"))?;
        }
        if let Some(gt) = ground_truth_for(cfg.ground_truth.as_deref(), &entry.id)? {
            scores.push(evaluate_frame(&entry.id, &result.classes, &gt)?);
        }
        Ok(())
    })?;

    let report = if scores.is_empty() {
        None
    } else {
        Some(aggregate(cfg.dataset_name(), scores)?)
    };
    if let (Some(report), true) = (&report, cfg.emit.report) {
        let path = out.join(REPORT_FILE);
        fs::write(&path, report.render()).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(RunSummary {
        pairs,
        intervals,
        report,
    })
}

/// Scores saved class maps (`<id>.classes.png`) against ground truth.
pub fn evaluate_dir(pred_dir: &Path, gt_dir: &Path, dataset: &str) -> Result<DatasetReport> {
    let mut ids: Vec<String> = fs::read_dir(pred_dir)
        .map_err(|e| Error::Io {
            path: pred_dir.into(),
            source: e,
        })?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix(".classes.png"))
                .map(str::to_string)
        })
        .collect();
    ids.sort();
    let mut scores = Vec::new();
    for id in ids {
        if let Some(gt) = ground_truth_for(Some(gt_dir), &id)? {
            let pred = load_class_map(artifact_path(pred_dir, &id, "classes"))?;
            scores.push(evaluate_frame(&id, &pred, &gt)?);
        }
    }
    if scores.is_empty() {
        return Err(Error::Validation(format!(
            "no class maps in {} have ground truth in {}",
            pred_dir.display(),
            gt_dir.display()
        )));
    }
    aggregate(dataset, scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub intervals: ShadowIntervals<f64>,
    pub report: DatasetReport,
}

impl SweepRow {
    pub fn combined(&self) -> f64 {
        self.report.combined()
    }
}

/// Scores every (threshold, intervals) combination on the configured sequence.
///
/// Rows are sorted by combined mean F, best first; ties break on
/// `(threshold, cast_min, self_min)` ascending.
pub fn sweep(
    cfg: &PipelineConfig,
    thresholds: &[f64],
    candidates: &[ShadowIntervals<f64>],
) -> Result<Vec<SweepRow>> {
    let gt_dir = cfg
        .ground_truth
        .as_deref()
        .ok_or_else(|| Error::config("ground_truth", "a sweep needs ground truth"))?;
    if thresholds.is_empty() {
        return Err(Error::config("thresholds", "at least one threshold is needed"));
    }
    if candidates.is_empty() {
        return Err(Error::config("intervals", "at least one interval candidate is needed"));
    }
    for iv in candidates {
        iv.validate().map_err(|e| Error::config("intervals", e.to_string()))?;
    }
    let thresholds = thresholds
        .iter()
        .map(|&t| MotionThreshold::new(t).map_err(|e| Error::config("thresholds", e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let frames = select_frames(cfg)?;
    let gts = load_truths(&frames, gt_dir)?;
    if gts.iter().skip(1).all(Option::is_none) {
        return Err(Error::config(
            "ground_truth",
            format!("no ground truth in {} for the selected frames", gt_dir.display()),
        ));
    }

    let se = cfg.element.element();
    let dataset = cfg.dataset_name();
    let mut rows = Vec::new();
    for &t in &thresholds {
        let mut per_candidate: Vec<Vec<FrameScore>> = vec![Vec::new(); candidates.len()];
        for_each_pair(
            &frames,
            t,
            &se,
            cfg.erosion_passes,
            |i| gts[i].is_some(),
            |i, entry, blobs| {
                let gt = gts[i].as_ref().expect("selected frames have ground truth");
                for (iv, scores) in candidates.iter().zip(per_candidate.iter_mut()) {
                    let (classes, _) = classify_shadows(&blobs.sums, &blobs.filled, iv)?;
                    scores.push(evaluate_frame(&entry.id, &classes, gt)?);
                }
                Ok(())
            },
        )?;
        for (iv, scores) in candidates.iter().zip(per_candidate) {
            rows.push(SweepRow {
                threshold: t.value(),
                intervals: *iv,
                report: aggregate(dataset.clone(), scores)?,
            });
        }
    }
    rows.sort_by(|a, b| {
        b.combined()
            .total_cmp(&a.combined())
            .then(a.threshold.total_cmp(&b.threshold))
            .then(a.intervals.cast_min.total_cmp(&b.intervals.cast_min))
            .then(a.intervals.self_min.total_cmp(&b.intervals.self_min))
    });
    Ok(rows)
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    writeln!(out, "rank\tthreshold\tcast_min\tcast_max\tself_min\tself_max\tF_cast\tF_self\tF_mean").unwrap();
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    for (i, r) in rows.iter().enumerate() {
        let iv = r.intervals;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}",
            i + 1,
            r.threshold,
            iv.cast_min,
            iv.cast_max,
            iv.self_min,
            iv.self_max,
            cell(r.report.mean_cast),
            cell(r.report.mean_self),
            r.combined()
        )
        .unwrap();
    }
    out
}
