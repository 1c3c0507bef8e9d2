//! `eigenshadow` command-line driver.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigenshadow::config::{format_intervals, parse_intervals};
use eigenshadow::evaluation::render_table;
use eigenshadow::pipeline::{self, evaluate_dir, render_sweep};
use eigenshadow::synth::{write_shadow_scene, ShadowScene};
use eigenshadow::{ConfigEntries, Error, IntervalSource, PipelineConfig};

/// Default output directory when neither a flag nor the config file names one.
const OUTPUT_ENV: &str = "EIGENSHADOW_OUTPUT";
const FALLBACK_OUTPUT: &str = "eigenshadow-out";

#[derive(Parser, Debug)]
#[command(name = "eigenshadow", version, about = "Moving cast and self shadow detection from summed window eigenvalues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment, post-process and classify every frame pair; write artifacts and a report.
    Run(PipelineArgs),
    /// Score every threshold / interval combination against ground truth.
    Sweep(SweepArgs),
    /// Fit shadow intervals to ground truth and print them as a config line.
    Calibrate(CalibrateArgs),
    /// Score saved class maps: `eval NAME PRED_DIR GT_DIR [NAME PRED_DIR GT_DIR ...]`.
    Eval(EvalArgs),
    /// Write a synthetic scene sequence with ground truth, for trying the tool out.
    Synth(SynthArgs),
}

/// Pipeline settings. Flags override values read from `--config`.
#[derive(Args, Debug)]
struct PipelineArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory of input frames (`in000001.png`, ...).
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output directory [default: $EIGENSHADOW_OUTPUT, else ./eigenshadow-out].
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// First frame number to use (from the digits in the file name).
    #[arg(long)]
    first: Option<u64>,
    /// Last frame number to use.
    #[arg(long)]
    last: Option<u64>,
    /// Motion threshold on the mean neighborhood gray difference.
    #[arg(long, short)]
    threshold: Option<f64>,
    /// Erosion passes after hole filling.
    #[arg(long)]
    erosion_passes: Option<usize>,
    /// `square` or `cross`.
    #[arg(long)]
    structuring_element: Option<String>,
    /// Shadow intervals `cast_min cast_max self_min self_max`.
    #[arg(long, allow_hyphen_values = true)]
    intervals: Option<String>,
    /// Fit the intervals to ground truth before classifying.
    #[arg(long)]
    calibrate: bool,
    /// Trimming percentile for calibration, in (0, 50).
    #[arg(long)]
    percentile: Option<f64>,
    /// Directory with `<frame>.cast.png` / `<frame>.self.png` masks.
    #[arg(long, short)]
    ground_truth: Option<PathBuf>,
    /// Artifacts to write: comma list of motion, filled, dualmap, classes, report; or `all` / `none`.
    #[arg(long)]
    emit: Option<String>,
    /// Dataset name used in reports.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comma-separated motion thresholds [default: the configured threshold].
    #[arg(long)]
    thresholds: Option<String>,
    /// Interval candidate `cast_min cast_max self_min self_max`; repeatable
    /// [default: the configured intervals].
    #[arg(long = "candidate", allow_hyphen_values = true)]
    candidates: Vec<String>,
    /// Also write the ranking to this file.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Also write the `intervals = ...` line to this file.
    #[arg(long)]
    write: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Triples of dataset name, prediction directory, ground-truth directory.
    #[arg(required = true, num_args = 3.., value_names = ["NAME", "PRED_DIR", "GT_DIR"])]
    triples: Vec<String>,
    /// Print per-frame scores before the table.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Directory for the frames.
    #[arg(long, short)]
    input: PathBuf,
    /// Directory for the ground-truth masks.
    #[arg(long, short)]
    ground_truth: PathBuf,
    #[arg(long, default_value_t = 160)]
    width: usize,
    #[arg(long, default_value_t = 120)]
    height: usize,
    #[arg(long, default_value_t = 20)]
    frames: usize,
    /// Erosion passes the ground truth is drawn for.
    #[arg(long, default_value_t = 1)]
    erosion_passes: usize,
}

impl PipelineArgs {
    fn entries(&self) -> Result<ConfigEntries, Error> {
        let mut e = match &self.config {
            Some(path) => ConfigEntries::load(path)?,
            None => ConfigEntries::default(),
        };
        let path = |p: &PathBuf| p.to_string_lossy().into_owned();
        let flags = [
            ("input", self.input.as_ref().map(path)),
            ("output", self.output.as_ref().map(path)),
            ("first", self.first.map(|v| v.to_string())),
            ("last", self.last.map(|v| v.to_string())),
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("erosion_passes", self.erosion_passes.map(|v| v.to_string())),
            ("structuring_element", self.structuring_element.clone()),
            ("intervals", self.intervals.clone()),
            ("calibrate", self.calibrate.then(|| "true".to_string())),
            ("percentile", self.percentile.map(|v| v.to_string())),
            ("ground_truth", self.ground_truth.as_ref().map(path)),
            ("emit", self.emit.clone()),
            ("dataset", self.dataset.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                e.set(key, v);
            }
        }
        if e.get("output").is_none() {
            let dir = std::env::var(OUTPUT_ENV)
                .ok()
                .filter(|v| !v.is_empty())
                .unwrap_or_else(|| FALLBACK_OUTPUT.into());
            e.set("output", dir);
        }
        Ok(e)
    }

    fn config(&self) -> Result<PipelineConfig, Error> {
        PipelineConfig::from_entries(&self.entries()?)
    }
}

fn usage(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })
}

fn run(args: &PipelineArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let summary = pipeline::run_pipeline(&cfg)?;
    println!(
        "{}: {} frame pairs, intervals {}, output {}",
        cfg.dataset_name(),
        summary.pairs,
        summary.intervals,
        cfg.output.display()
    );
    match &summary.report {
        Some(report) => print!("{}", render_table(std::slice::from_ref(report))),
        None => println!("no ground truth matched; nothing scored"),
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<(), Error> {
    let mut entries = args.pipeline.entries()?;
    let candidates = args
        .candidates
        .iter()
        .map(|c| parse_intervals(c))
        .collect::<Result<Vec<_>, _>>()?;
    // The configured intervals only matter when no candidate is given.
    if let (Some(first), None) = (candidates.first(), entries.get("intervals")) {
        entries.set("intervals", format_intervals(first));
    }
    let cfg = PipelineConfig::from_entries(&entries)?;
    let candidates = if candidates.is_empty() {
        match cfg.intervals {
            IntervalSource::Fixed(iv) => vec![iv],
            IntervalSource::Calibrate { .. } => {
                return Err(usage("candidate", "a sweep needs fixed interval candidates, not calibration"))
            }
        }
    } else {
        candidates
    };
    let thresholds = match &args.thresholds {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| usage("thresholds", format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![cfg.threshold.value()],
    };
    let rows = pipeline::sweep(&cfg, &thresholds, &candidates)?;
    let table = render_sweep(&rows);
    print!("{table}");
    if let Some(path) = &args.table {
        write_file(path, &table)?;
    }
    Ok(())
}

fn run_calibrate(args: &CalibrateArgs) -> Result<(), Error> {
    let mut entries = args.pipeline.entries()?;
    entries.set("calibrate", "true");
    let cfg = PipelineConfig::from_entries(&entries)?;
    let IntervalSource::Calibrate { percentile } = cfg.intervals else {
        unreachable!("calibrate is forced on")
    };
    let iv = pipeline::calibrate(&cfg, percentile)?;
    let line = format!("intervals = {}\n", format_intervals(&iv));
    print!("{line}");
    if let Some(path) = &args.write {
        write_file(path, &line)?;
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<(), Error> {
    if !args.triples.len().is_multiple_of(3) {
        return Err(usage(
            "eval",
            format!("expected NAME PRED_DIR GT_DIR triples, got {} values", args.triples.len()),
        ));
    }
    let reports = args
        .triples
        .chunks(3)
        .map(|t| evaluate_dir(t[1].as_ref(), t[2].as_ref(), &t[0]))
        .collect::<Result<Vec<_>, _>>()?;
    if args.verbose {
        for r in &reports {
            println!("{}", r.render());
        }
    }
    print!("{}", render_table(&reports));
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<(), Error> {
    let scenes = write_shadow_scene(
        &args.input,
        &args.ground_truth,
        args.width,
        args.height,
        args.frames,
        args.erosion_passes,
    )?;
    println!(
        "wrote {} frames to {} and {} ground-truth pairs to {}",
        scenes.len(),
        args.input.display(),
        scenes.iter().flatten().count(),
        args.ground_truth.display()
    );
    println!("intervals = {}", format_intervals(&ShadowScene::intervals()));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
