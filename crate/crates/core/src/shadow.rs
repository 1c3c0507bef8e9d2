//! Cast / self shadow classification by interval tests on summed neighborhood eigenvalues.

use std::fmt;

use crate::eigen::eigen_sum;
use crate::error::{check_dims, Error, Result};
use crate::frame::{to_gray, window, BinaryMask, GrayFrame, GroundTruth, Rgb, RgbFrame, BLACK};
use crate::morphology::HoleFilledFrame;
use crate::scalar::Scalar;

pub const CAST_RGB: Rgb = [255, 0, 0];
pub const SELF_RGB: Rgb = [0, 0, 255];

/// Default trimming percentile for [`calibrate_intervals`].
pub const DEFAULT_PERCENTILE: f64 = 5.0;

/// Summed eigenvalues per pixel, defined only inside the blob mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSumMap<S> {
    width: usize,
    height: usize,
    sums: Vec<S>,
    valid: BinaryMask,
}

impl<S: Scalar> EigenSumMap<S> {
    /// Builds a map from raw sums; entries outside `valid` are ignored.
    pub fn new(sums: Vec<S>, valid: BinaryMask) -> Result<Self> {
        let (width, height) = valid.dims();
        if sums.len() != width * height {
            return Err(Error::Validation(format!(
                "eigen sum map {width}x{height} needs {} values, got {}",
                width * height,
                sums.len()
            )));
        }
        Ok(EigenSumMap {
            width,
            height,
            sums,
            valid,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn valid(&self) -> &BinaryMask {
        &self.valid
    }

    /// Summed eigenvalues at `(w, h)`, or `None` off the blob.
    pub fn get(&self, w: usize, h: usize) -> Option<S> {
        let i = h * self.width + w;
        self.valid.bits()[i].then(|| self.sums[i])
    }

    /// Every valid pixel as `(index, sum)` in row-major order.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, S)> + '_ {
        self.sums
            .iter()
            .zip(self.valid.bits())
            .enumerate()
            .filter_map(|(i, (&s, &v))| v.then_some((i, s)))
    }

    /// Adds `delta` to every sum.
    pub fn shifted(&self, delta: S) -> Self {
        EigenSumMap {
            sums: self.sums.iter().map(|&s| s + delta).collect(),
            ..self.clone()
        }
    }
}

/// Closed cast and self shadow intervals over summed eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowIntervals<S> {
    pub cast_min: S,
    pub cast_max: S,
    pub self_min: S,
    pub self_max: S,
}

impl<S: Scalar> ShadowIntervals<S> {
    pub fn new(cast_min: S, cast_max: S, self_min: S, self_max: S) -> Result<Self> {
        let iv = ShadowIntervals {
            cast_min,
            cast_max,
            self_min,
            self_max,
        };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.cast_min, self.cast_max, self.self_min, self.self_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::Validation(format!("non-finite interval bound in {self}")));
        }
        if self.cast_min > self.cast_max {
            return Err(Error::Validation(format!(
                "cast interval [{}, {}] is reversed",
                self.cast_min, self.cast_max
            )));
        }
        if self.self_min > self.self_max {
            return Err(Error::Validation(format!(
                "self interval [{}, {}] is reversed",
                self.self_min, self.self_max
            )));
        }
        Ok(())
    }

    pub fn in_cast(&self, sum: S) -> bool {
        self.cast_min <= sum && sum <= self.cast_max
    }

    pub fn in_self(&self, sum: S) -> bool {
        self.self_min <= sum && sum <= self.self_max
    }

    /// Class of a blob pixel; the cast test runs first.
    pub fn classify(&self, sum: S) -> ShadowClass {
        if self.in_cast(sum) {
            ShadowClass::CastShadow
        } else if self.in_self(sum) {
            ShadowClass::SelfShadow
        } else {
            ShadowClass::Object
        }
    }

    pub fn shifted(&self, delta: S) -> Self {
        ShadowIntervals {
            cast_min: self.cast_min + delta,
            cast_max: self.cast_max + delta,
            self_min: self.self_min + delta,
            self_max: self.self_max + delta,
        }
    }
}

impl<S: Scalar> fmt::Display for ShadowIntervals<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cast [{}, {}] self [{}, {}]",
            self.cast_min, self.cast_max, self.self_min, self.self_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShadowClass {
    Background,
    Object,
    CastShadow,
    SelfShadow,
}

impl ShadowClass {
    /// Label stored in class-map images.
    pub fn label(self) -> u8 {
        match self {
            ShadowClass::Background => 0,
            ShadowClass::Object => 1,
            ShadowClass::CastShadow => 2,
            ShadowClass::SelfShadow => 3,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        Some(match label {
            0 => ShadowClass::Background,
            1 => ShadowClass::Object,
            2 => ShadowClass::CastShadow,
            3 => ShadowClass::SelfShadow,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    width: usize,
    height: usize,
    classes: Vec<ShadowClass>,
}

impl ClassMap {
    pub fn new(width: usize, height: usize, classes: Vec<ShadowClass>) -> Result<Self> {
        if classes.len() != width * height {
            return Err(Error::Validation(format!(
                "class map {width}x{height} needs {} entries, got {}",
                width * height,
                classes.len()
            )));
        }
        Ok(ClassMap {
            width,
            height,
            classes,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn classes(&self) -> &[ShadowClass] {
        &self.classes
    }

    pub fn get(&self, w: usize, h: usize) -> ShadowClass {
        self.classes[h * self.width + w]
    }

    pub fn mask_of(&self, class: ShadowClass) -> BinaryMask {
        let bits = self.classes.iter().map(|&c| c == class).collect();
        BinaryMask::new(self.width, self.height, bits).expect("same dimensions")
    }

    pub fn count(&self, class: ShadowClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Grayscale label image (see [`ShadowClass::label`]).
    pub fn to_image(&self) -> image::GrayImage {
        let raw = self.classes.iter().map(|c| c.label()).collect();
        image::GrayImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer sized from dims")
    }

    pub fn from_image(img: &image::GrayImage) -> Result<Self> {
        let classes = img
            .pixels()
            .map(|p| {
                ShadowClass::from_label(p.0[0])
                    .ok_or_else(|| Error::Validation(format!("unknown class label {}", p.0[0])))
            })
            .collect::<Result<Vec<_>>>()?;
        ClassMap::new(img.width() as usize, img.height() as usize, classes)
    }
}

/// Summed eigenvalues of the gray 3x3 window at every blob pixel of `d_hf`.
///
/// Windows at the blob border see the black background of `d_hf`.
pub fn eigen_sum_map<S: Scalar>(d_hf: &HoleFilledFrame) -> Result<EigenSumMap<S>> {
    check_dims("eigen sum map", d_hf.frame.dims(), d_hf.mask.dims())?;
    let gray = to_gray::<S>(&d_hf.frame);
    Ok(eigen_sum_map_gray(&gray, &d_hf.mask))
}

pub(crate) fn eigen_sum_map_gray<S: Scalar>(gray: &GrayFrame<S>, mask: &BinaryMask) -> EigenSumMap<S> {
    let (width, height) = gray.dims();
    let mut sums = vec![S::zero(); width * height];
    for h in 0..height {
        for w in 0..width {
            if mask.get(w, h) {
                sums[h * width + w] = eigen_sum(&window(gray, w, h));
            }
        }
    }
    EigenSumMap {
        width,
        height,
        sums,
        valid: mask.clone(),
    }
}

/// Classifies every blob pixel and renders cast red, self blue and the rest of
/// the blob in its own colors.
pub fn classify_shadows<S: Scalar>(
    map: &EigenSumMap<S>,
    d_hf: &HoleFilledFrame,
    intervals: &ShadowIntervals<S>,
) -> Result<(ClassMap, RgbFrame)> {
    intervals.validate()?;
    check_dims("classify shadows", map.dims(), d_hf.frame.dims())?;
    let (width, height) = map.dims();
    let mut classes = Vec::with_capacity(width * height);
    let mut pixels = Vec::with_capacity(width * height);
    for (i, &valid) in map.valid.bits().iter().enumerate() {
        let class = if valid {
            intervals.classify(map.sums[i])
        } else {
            ShadowClass::Background
        };
        let rgb = match class {
            ShadowClass::Background => BLACK,
            ShadowClass::CastShadow => CAST_RGB,
            ShadowClass::SelfShadow => SELF_RGB,
            ShadowClass::Object => d_hf.frame.pixels()[i],
        };
        classes.push(class);
        pixels.push(rgb);
    }
    Ok((
        ClassMap::new(width, height, classes)?,
        RgbFrame::new(width, height, pixels)?,
    ))
}

/// Index of the lower `p`-th percentile among `n` sorted samples (nearest rank, rounding down).
fn lower_rank(n: usize, p: f64) -> usize {
    ((p / 100.0) * (n - 1) as f64).floor() as usize
}

/// Bounds trimming the same number of samples from each end of the sorted values.
fn trimmed_bounds<S: Scalar>(mut values: Vec<S>, p: f64) -> (S, S) {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigen sums"));
    let k = lower_rank(values.len(), p);
    (values[k], values[values.len() - 1 - k])
}

/// Fits cast and self intervals to the labeled pixels of `gt`.
///
/// Each bound is the `p`-th (resp. `100 - p`-th) percentile of the class's
/// summed eigenvalues, taking the lower nearest rank `floor(p/100 * (n-1))`
/// from each end of the sorted sample.
pub fn calibrate_intervals<S: Scalar>(
    maps: &[EigenSumMap<S>],
    gt: &[GroundTruth],
    p: f64,
) -> Result<ShadowIntervals<S>> {
    if !(p > 0.0 && p < 50.0) {
        return Err(Error::Validation(format!(
            "calibration percentile must be in (0, 50), got {p}"
        )));
    }
    if maps.len() != gt.len() {
        return Err(Error::Validation(format!(
            "{} eigen sum maps but {} ground truth frames",
            maps.len(),
            gt.len()
        )));
    }
    let mut cast = Vec::new();
    let mut self_shadow = Vec::new();
    for (map, truth) in maps.iter().zip(gt) {
        check_dims("calibration", map.dims(), truth.dims())?;
        for (i, sum) in map.iter_valid() {
            if truth.cast().bits()[i] {
                cast.push(sum);
            } else if truth.self_shadow().bits()[i] {
                self_shadow.push(sum);
            }
        }
    }
    if cast.is_empty() {
        return Err(Error::Calibration(
            "no ground-truth cast shadow pixels inside motion blobs".into(),
        ));
    }
    if self_shadow.is_empty() {
        return Err(Error::Calibration(
            "no ground-truth self shadow pixels inside motion blobs".into(),
        ));
    }
    let (cast_min, cast_max) = trimmed_bounds(cast, p);
    let (self_min, self_max) = trimmed_bounds(self_shadow, p);
    ShadowIntervals::new(cast_min, cast_max, self_min, self_max)
}
