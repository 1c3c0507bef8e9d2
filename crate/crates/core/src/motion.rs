//! Motion segmentation by mean 3x3 neighborhood distance between successive frames.

use crate::error::{check_dims, Error, Result};
use crate::frame::{to_gray, BinaryMask, GrayFrame, RgbFrame};
use crate::scalar::Scalar;

/// Threshold on the mean neighborhood distance, in gray-level units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MotionThreshold<S>(S);

impl<S: Scalar> MotionThreshold<S> {
    pub const DEFAULT: f64 = 10.0;

    pub fn new(t: S) -> Result<Self> {
        if !t.is_finite() || t < S::zero() {
            return Err(Error::Validation(format!(
                "motion threshold must be finite and >= 0, got {t}"
            )));
        }
        Ok(MotionThreshold(t))
    }

    pub fn value(self) -> S {
        self.0
    }
}

impl<S: Scalar> Default for MotionThreshold<S> {
    fn default() -> Self {
        MotionThreshold(S::lit(Self::DEFAULT))
    }
}

/// Moving pixels with their current-frame colors; everything else black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionFrame {
    pub frame: RgbFrame,
    pub mask: BinaryMask,
}

/// Mean absolute difference between the replicate-padded 3x3 windows at `(w, h)`.
pub fn mean_neighborhood_distance<S: Scalar>(
    prev: &GrayFrame<S>,
    cur: &GrayFrame<S>,
    w: usize,
    h: usize,
) -> Result<S> {
    check_dims("mean neighborhood distance", prev.dims(), cur.dims())?;
    if w >= cur.width() || h >= cur.height() {
        return Err(Error::OutOfBounds {
            w,
            h,
            width: cur.width(),
            height: cur.height(),
        });
    }
    Ok(window_distance(prev, cur, w, h))
}

fn window_distance<S: Scalar>(prev: &GrayFrame<S>, cur: &GrayFrame<S>, w: usize, h: usize) -> S {
    let mut sum = S::zero();
    for dh in -1..=1isize {
        for dw in -1..=1isize {
            let (x, y) = (w as isize + dw, h as isize + dh);
            sum += (prev.get_clamped(x, y) - cur.get_clamped(x, y)).abs();
        }
    }
    sum / S::lit(9.0)
}

/// Per-pixel absolute difference image of two gray frames.
fn abs_diff<S: Scalar>(prev: &GrayFrame<S>, cur: &GrayFrame<S>) -> Vec<S> {
    prev.values()
        .iter()
        .zip(cur.values())
        .map(|(&a, &b)| (a - b).abs())
        .collect()
}

/// Mean neighborhood distance at every pixel.
///
/// Sums the precomputed difference image over each clamped window in the
/// same row-then-column order as [`mean_neighborhood_distance`], so both
/// routes produce bit-identical values.
pub fn distance_map<S: Scalar>(prev: &GrayFrame<S>, cur: &GrayFrame<S>) -> Result<Vec<S>> {
    check_dims("distance map", prev.dims(), cur.dims())?;
    let (width, height) = cur.dims();
    let diff = abs_diff(prev, cur);
    let nine = S::lit(9.0);
    let mut out = Vec::with_capacity(width * height);
    for h in 0..height {
        let rows = [h.saturating_sub(1), h, (h + 1).min(height - 1)];
        for w in 0..width {
            let cols = [w.saturating_sub(1), w, (w + 1).min(width - 1)];
            let mut sum = S::zero();
            for &y in &rows {
                let row = &diff[y * width..(y + 1) * width];
                for &x in &cols {
                    sum += row[x];
                }
            }
            out.push(sum / nine);
        }
    }
    Ok(out)
}

/// Marks pixels whose mean neighborhood distance strictly exceeds `threshold`
/// and copies `cur_rgb`'s colors onto them.
pub fn segment_motion<S: Scalar>(
    prev_rgb: &RgbFrame,
    cur_rgb: &RgbFrame,
    threshold: MotionThreshold<S>,
) -> Result<MotionFrame> {
    check_dims("segment motion", prev_rgb.dims(), cur_rgb.dims())?;
    let prev = to_gray::<S>(prev_rgb);
    let cur = to_gray::<S>(cur_rgb);
    segment_motion_gray(&prev, &cur, cur_rgb, threshold)
}

pub(crate) fn segment_motion_gray<S: Scalar>(
    prev: &GrayFrame<S>,
    cur: &GrayFrame<S>,
    cur_rgb: &RgbFrame,
    threshold: MotionThreshold<S>,
) -> Result<MotionFrame> {
    let (width, height) = cur.dims();
    let distances = distance_map(prev, cur)?;
    let bits = distances.iter().map(|&d| d > threshold.value()).collect();
    let mask = BinaryMask::new(width, height, bits)?;
    let frame = cur_rgb.masked(&mask)?;
    Ok(MotionFrame { frame, mask })
}
