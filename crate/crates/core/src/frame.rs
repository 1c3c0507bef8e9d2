//! Frame, mask and neighborhood types plus image-sequence ingestion.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, GrayImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{check_dims, Error, Result};
use crate::scalar::Scalar;

/// Smallest frame side for which a full 3x3 window exists without padding alone.
pub const MIN_FRAME_SIDE: usize = 3;

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];

/// Row-major grid of 8-bit RGB pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
            return Err(Error::Validation(format!(
                "frame {width}x{height} is smaller than {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Validation(format!(
                "frame {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(RgbFrame {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: Rgb) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for h in 0..height {
            for w in 0..width {
                pixels.push(f(w, h));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, w: usize, h: usize) -> Rgb {
        self.pixels[h * self.width + w]
    }

    pub fn set(&mut self, w: usize, h: usize, rgb: Rgb) {
        self.pixels[h * self.width + w] = rgb;
    }

    /// Keeps pixels where `mask` is set and blackens the rest.
    pub fn masked(&self, mask: &BinaryMask) -> Result<RgbFrame> {
        check_dims("masked frame", self.dims(), mask.dims())?;
        let pixels = self
            .pixels
            .iter()
            .zip(mask.bits())
            .map(|(&p, &on)| if on { p } else { BLACK })
            .collect();
        Ok(RgbFrame {
            width: self.width,
            height: self.height,
            pixels,
        })
    }

    pub fn to_image(&self) -> RgbImage {
        let raw = self.pixels.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer sized from dims")
    }
}

/// Real-valued intensities in [0, 255], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame<S> {
    width: usize,
    height: usize,
    values: Vec<S>,
}

impl<S: Scalar> GrayFrame<S> {
    pub fn new(width: usize, height: usize, values: Vec<S>) -> Result<Self> {
        if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
            return Err(Error::Validation(format!(
                "gray frame {width}x{height} is smaller than {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::Validation(format!(
                "gray frame {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !in_intensity_range(**v)) {
            return Err(Error::Validation(format!("gray value {v} outside [0, 255]")));
        }
        Ok(GrayFrame {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: S) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, w: usize, h: usize) -> S {
        self.values[h * self.width + w]
    }

    /// Value at a possibly out-of-frame position, clamped to the nearest edge pixel.
    pub fn get_clamped(&self, w: isize, h: isize) -> S {
        let w = w.clamp(0, self.width as isize - 1) as usize;
        let h = h.clamp(0, self.height as isize - 1) as usize;
        self.get(w, h)
    }
}

fn in_intensity_range<S: Scalar>(v: S) -> bool {
    v >= S::zero() && v <= S::lit(255.0)
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Validation(format!(
                "mask {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryMask { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for h in 0..height {
            for w in 0..width {
                bits.push(f(w, h));
            }
        }
        BinaryMask { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, w: usize, h: usize) -> bool {
        self.bits[h * self.width + w]
    }

    pub fn set(&mut self, w: usize, h: usize, on: bool) {
        self.bits[h * self.width + w] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersects(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b)
    }

    /// 0/255 grayscale rendering.
    pub fn to_image(&self) -> GrayImage {
        let raw = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        GrayImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer sized from dims")
    }
}

pub type Matrix3<S> = [[S; 3]; 3];

/// 3x3 intensity window centered on a pixel; `rows()[r][c]` sits at offset `(c - 1, r - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighborhood3x3<S> {
    rows: Matrix3<S>,
}

impl<S: Scalar> Neighborhood3x3<S> {
    pub fn new(rows: Matrix3<S>) -> Result<Self> {
        if let Some(v) = rows.iter().flatten().find(|v| !in_intensity_range(**v)) {
            return Err(Error::Validation(format!(
                "neighborhood value {v} outside [0, 255]"
            )));
        }
        Ok(Neighborhood3x3 { rows })
    }

    pub fn constant(value: S) -> Result<Self> {
        Self::new([[value; 3]; 3])
    }

    pub fn rows(&self) -> &Matrix3<S> {
        &self.rows
    }

    pub fn center(&self) -> S {
        self.rows[1][1]
    }

    pub fn iter(&self) -> impl Iterator<Item = S> + '_ {
        self.rows.iter().flatten().copied()
    }
}

/// Disjoint cast / self shadow annotation of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    cast: BinaryMask,
    self_shadow: BinaryMask,
}

impl GroundTruth {
    pub fn new(cast: BinaryMask, self_shadow: BinaryMask) -> Result<Self> {
        check_dims("ground truth", cast.dims(), self_shadow.dims())?;
        if cast.intersects(&self_shadow) {
            return Err(Error::Validation(
                "ground truth labels a pixel as both cast and self shadow".into(),
            ));
        }
        Ok(GroundTruth { cast, self_shadow })
    }

    pub fn cast(&self) -> &BinaryMask {
        &self.cast
    }

    pub fn self_shadow(&self) -> &BinaryMask {
        &self.self_shadow
    }

    pub fn dims(&self) -> (usize, usize) {
        self.cast.dims()
    }
}

/// Mean of the three channels, unrounded.
pub fn to_gray<S: Scalar>(frame: &RgbFrame) -> GrayFrame<S> {
    let three = S::lit(3.0);
    let values = frame
        .pixels
        .iter()
        .map(|&[r, g, b]| S::lit(f64::from(u16::from(r) + u16::from(g) + u16::from(b))) / three)
        .collect();
    GrayFrame {
        width: frame.width,
        height: frame.height,
        values,
    }
}

/// The replicate-padded 3x3 window centered on `(w, h)`.
pub fn neighborhood<S: Scalar>(frame: &GrayFrame<S>, w: usize, h: usize) -> Result<Neighborhood3x3<S>> {
    if w >= frame.width || h >= frame.height {
        return Err(Error::OutOfBounds {
            w,
            h,
            width: frame.width,
            height: frame.height,
        });
    }
    Ok(window(frame, w, h))
}

pub(crate) fn window<S: Scalar>(frame: &GrayFrame<S>, w: usize, h: usize) -> Neighborhood3x3<S> {
    let mut rows = [[S::zero(); 3]; 3];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = frame.get_clamped(w as isize + c as isize - 1, h as isize + r as isize - 1);
        }
    }
    Neighborhood3x3 { rows }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })
}

fn check_depth(path: &Path, img: &DynamicImage) -> Result<()> {
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => Ok(()),
        other => Err(Error::format(
            path,
            format!("unsupported pixel format {other:?}; only 8-bit images are accepted"),
        )),
    }
}

/// Decodes an 8-bit PNG or JPEG into an RGB frame. Alpha is dropped.
pub fn load_frame(path: impl AsRef<Path>) -> Result<RgbFrame> {
    let path = path.as_ref();
    let img = decode(path)?;
    check_depth(path, &img)?;
    let rgb = img.to_rgb8();
    let (width, height) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbFrame::new(width, height, pixels).map_err(|e| match e {
        Error::Validation(msg) => Error::format(path, msg),
        other => other,
    })
}

pub fn save_frame(frame: &RgbFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    save_png(path, |p| frame.to_image().save_with_format(p, ImageFormat::Png))
}

/// Writes the mask as a 0/255 grayscale PNG.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    save_png(path, |p| mask.to_image().save_with_format(p, ImageFormat::Png))
}

pub(crate) fn save_png(
    path: &Path,
    write: impl FnOnce(&Path) -> image::ImageResult<()>,
) -> Result<()> {
    write(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })
}

/// Reads an 8-bit image as a mask; any nonzero pixel is set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let img = decode(path)?;
    check_depth(path, &img)?;
    let luma = img.to_luma8();
    let bits = luma.pixels().map(|p| p.0[0] != 0).collect();
    BinaryMask::new(luma.width() as usize, luma.height() as usize, bits)
}

pub fn load_ground_truth(cast_path: impl AsRef<Path>, self_path: impl AsRef<Path>) -> Result<GroundTruth> {
    let cast = load_mask(cast_path.as_ref())?;
    let self_shadow = load_mask(self_path.as_ref())?;
    if cast.dims() != self_shadow.dims() {
        return Err(Error::format(
            self_path.as_ref(),
            format!(
                "self shadow mask is {}x{} but cast mask is {}x{}",
                self_shadow.width(),
                self_shadow.height(),
                cast.width(),
                cast.height()
            ),
        ));
    }
    GroundTruth::new(cast, self_shadow)
}

/// One image of a numbered frame sequence, e.g. `in000136.jpg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameEntry {
    /// File stem, used to name every derived artifact.
    pub id: String,
    /// Trailing decimal digits of the stem, if any.
    pub number: Option<u64>,
    pub path: PathBuf,
}

impl FrameEntry {
    fn from_path(path: PathBuf) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        if !matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
            return None;
        }
        let id = path.file_stem()?.to_str()?.to_string();
        // Derived artifacts (`in000001.motion.png`) are not frames.
        if id.contains('.') {
            return None;
        }
        let digits = id.len() - id.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let number = id[id.len() - digits..].parse().ok();
        Some(FrameEntry { id, number, path })
    }
}

/// PNG/JPEG frames in `dir`, sorted by file name.
pub fn list_frames(dir: impl AsRef<Path>) -> Result<Vec<FrameEntry>> {
    let dir = dir.as_ref();
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if !entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_file() {
            continue;
        }
        if let Some(frame) = FrameEntry::from_path(entry.path()) {
            entries.push(frame);
        }
    }
    entries.sort_by(|a, b| a.path.file_name().cmp(&b.path.file_name()));
    Ok(entries)
}

/// Ground-truth file locations for a frame id: `<dir>/<id>.cast.png` and `<dir>/<id>.self.png`.
pub fn ground_truth_paths(dir: impl AsRef<Path>, id: &str) -> (PathBuf, PathBuf) {
    let dir = dir.as_ref();
    (
        dir.join(format!("{id}.cast.png")),
        dir.join(format!("{id}.self.png")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray_from(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> GrayFrame<f64> {
        let mut values = Vec::new();
        for h in 0..height {
            for w in 0..width {
                values.push(f(w, h));
            }
        }
        GrayFrame::new(width, height, values).unwrap()
    }

    #[test]
    fn gray_is_unrounded_mean() {
        let frame = RgbFrame::from_fn(3, 3, |w, _| match w {
            0 => [30, 60, 90],
            1 => [255, 255, 255],
            _ => [10, 20, 40],
        })
        .unwrap();
        let gray = to_gray::<f64>(&frame);
        assert_eq!(gray.get(0, 0), 60.0);
        assert_eq!(gray.get(1, 0), 255.0);
        assert!((gray.get(2, 0) - 70.0 / 3.0).abs() < 1e-12);
        assert!((to_gray::<f32>(&frame).get(2, 1) - 23.333_334).abs() < 1e-5);
    }

    #[test]
    fn rejects_small_frames() {
        assert!(matches!(RgbFrame::filled(2, 2, BLACK), Err(Error::Validation(_))));
        assert!(RgbFrame::new(3, 3, vec![BLACK; 8]).is_err());
        assert!(GrayFrame::new(3, 3, vec![256.0; 9]).is_err());
    }

    #[test]
    fn interior_window_of_constant_frame() {
        let gray = GrayFrame::filled(6, 5, 50.0).unwrap();
        let n = neighborhood(&gray, 2, 2).unwrap();
        assert!(n.iter().all(|v| v == 50.0));
    }

    #[test]
    fn corner_window_replicates_edges() {
        let gray = gray_from(4, 4, |w, h| (h * 4 + w) as f64);
        let n = neighborhood(&gray, 0, 0).unwrap();
        assert_eq!(n.rows(), &[[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [4.0, 4.0, 5.0]]);
        // Top row and left column (5 cells) come from padding.
        let replicated = [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0)];
        let original = [[0.0, 1.0], [4.0, 5.0]];
        for (r, c) in replicated {
            let (sr, sc) = (r.max(1) - 1, c.max(1) - 1);
            assert_eq!(n.rows()[r][c], original[sr][sc]);
        }
    }

    #[test]
    fn window_of_3x3_frame_center_is_the_frame() {
        let gray = gray_from(3, 3, |w, h| (h * 3 + w) as f64 * 10.0);
        let n = neighborhood(&gray, 1, 1).unwrap();
        assert_eq!(n.rows(), &[[0.0, 10.0, 20.0], [30.0, 40.0, 50.0], [60.0, 70.0, 80.0]]);
    }

    #[test]
    fn window_bounds_error() {
        let gray = GrayFrame::filled(3, 3, 0.0).unwrap();
        assert!(matches!(
            neighborhood(&gray, 3, 0),
            Err(Error::OutOfBounds { w: 3, h: 0, .. })
        ));
    }

    #[test]
    fn ground_truth_rejects_overlap() {
        let mut cast = BinaryMask::empty(4, 4);
        let mut self_shadow = BinaryMask::empty(4, 4);
        cast.set(1, 1, true);
        self_shadow.set(1, 1, true);
        assert!(matches!(
            GroundTruth::new(cast, self_shadow),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn frame_entry_parses_cdnet_names() {
        let e = FrameEntry::from_path(PathBuf::from("x/in000136.jpg")).unwrap();
        assert_eq!(e.id, "in000136");
        assert_eq!(e.number, Some(136));
        assert!(FrameEntry::from_path(PathBuf::from("x/in000136.motion.png")).is_none());
        assert!(FrameEntry::from_path(PathBuf::from("x/notes.txt")).is_none());
        assert_eq!(FrameEntry::from_path(PathBuf::from("frame.png")).unwrap().number, None);
    }

    proptest! {
        #[test]
        fn gray_ignores_channel_order(r in any::<u8>(), g in any::<u8>(), b in any::<u8>()) {
            let a = to_gray::<f64>(&RgbFrame::filled(3, 3, [r, g, b]).unwrap()).get(1, 1);
            let z = to_gray::<f64>(&RgbFrame::filled(3, 3, [b, g, r]).unwrap()).get(1, 1);
            prop_assert_eq!(a, z);
            let lo = f64::from(r.min(g).min(b));
            let hi = f64::from(r.max(g).max(b));
            prop_assert!(lo <= a && a <= hi);
        }

        #[test]
        fn interior_window_holds_the_nine_source_values(
            values in proptest::collection::vec(0.0f64..=255.0, 25),
            w in 1usize..4,
            h in 1usize..4,
        ) {
            let gray = GrayFrame::new(5, 5, values.clone()).unwrap();
            let n = neighborhood(&gray, w, h).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    prop_assert_eq!(n.rows()[r][c], values[(h + r - 1) * 5 + (w + c - 1)]);
                }
            }
        }

        #[test]
        fn padding_only_uses_frame_values(
            values in proptest::collection::vec(0u8..=255, 16),
            w in 0usize..4,
            h in 0usize..4,
        ) {
            let gray = GrayFrame::new(4, 4, values.iter().map(|&v| f64::from(v)).collect()).unwrap();
            let n = neighborhood(&gray, w, h).unwrap();
            for v in n.iter() {
                prop_assert!(values.iter().any(|&x| f64::from(x) == v));
            }
        }
    }
}
