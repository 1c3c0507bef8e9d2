//! Moving-object and cast/self shadow segmentation for frame sequences.
//!
//! Moving pixels are found by thresholding the mean absolute difference of
//! 3x3 gray neighborhoods between successive frames. Motion blobs are
//! hole-filled, eroded and recolored, then every blob pixel is classified by
//! the sum of the eigenvalues of its 3x3 gray neighborhood: one interval marks
//! cast shadow, a second marks self shadow, everything else is object.
//!
//! The numeric stages are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases. The file-driven
//! pipeline in [`pipeline`] runs in `f64`.
//!
//! ```no_run
//! use eigenshadow::{
//!     classify_shadows, eigen_sum_map, load_frame, postprocess, segment_motion, MotionThreshold,
//!     ShadowIntervals64, StructuringElement,
//! };
//!
//! # fn main() -> eigenshadow::Result<()> {
//! let prev = load_frame("in000135.png")?;
//! let cur = load_frame("in000136.png")?;
//! let motion = segment_motion::<f64>(&prev, &cur, MotionThreshold::new(10.0)?)?;
//! let d_hf = postprocess(&cur, &motion.mask, &StructuringElement::square(), 1)?;
//! let sums = eigen_sum_map::<f64>(&d_hf)?;
//! let intervals = ShadowIntervals64::new(0.0, 150.0, 250.0, 400.0)?;
//! let (classes, overlay) = classify_shadows(&sums, &d_hf, &intervals)?;
//! # let _ = (classes, overlay);
//! # Ok(())
//! # }
//! ```

pub mod config;
pub mod eigen;
pub mod error;
pub mod evaluation;
pub mod frame;
pub mod morphology;
pub mod motion;
pub mod pipeline;
pub mod scalar;
pub mod shadow;
pub mod synth;

pub use config::{ConfigEntries, EmitFlags, IntervalSource, PipelineConfig};
pub use eigen::{eigen_sum, eigen_values_3x3, EigenTriple};
pub use error::{Error, Result};
pub use evaluation::{aggregate, confusion, score, ClassScore, ConfusionCounts, DatasetReport, ShadowKind};
pub use frame::{
    load_frame, load_ground_truth, neighborhood, save_frame, to_gray, BinaryMask, GrayFrame, GroundTruth,
    Neighborhood3x3, RgbFrame,
};
pub use morphology::{erode, fill_holes, postprocess, superimpose, HoleFilledFrame, StructuringElement};
pub use motion::{mean_neighborhood_distance, segment_motion, MotionFrame, MotionThreshold};
pub use pipeline::{run_pipeline, sweep, RunSummary, SweepRow};
pub use scalar::Scalar;
pub use shadow::{
    calibrate_intervals, classify_shadows, eigen_sum_map, ClassMap, EigenSumMap, ShadowClass, ShadowIntervals,
};

pub type GrayFrame64 = GrayFrame<f64>;
pub type GrayFrame32 = GrayFrame<f32>;
pub type Neighborhood64 = Neighborhood3x3<f64>;
pub type Neighborhood32 = Neighborhood3x3<f32>;
pub type EigenTriple64 = EigenTriple<f64>;
pub type EigenTriple32 = EigenTriple<f32>;
pub type EigenSumMap64 = EigenSumMap<f64>;
pub type EigenSumMap32 = EigenSumMap<f32>;
pub type ShadowIntervals64 = ShadowIntervals<f64>;
pub type ShadowIntervals32 = ShadowIntervals<f32>;
pub type MotionThreshold64 = MotionThreshold<f64>;
pub type MotionThreshold32 = MotionThreshold<f32>;
