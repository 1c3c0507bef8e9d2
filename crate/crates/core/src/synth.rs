//! Synthetic frame sequences with known answers, for tests, benchmarks and demos.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::{save_frame, save_mask, BinaryMask, GroundTruth, Rgb, RgbFrame, BLACK};
use crate::shadow::ShadowIntervals;

/// White `side`x`side` square on black moving `step` pixels right per frame,
/// wrapping around horizontally. Row position drifts one pixel every 5 frames.
pub fn moving_square(width: usize, height: usize, side: usize, step: usize, frames: usize) -> Result<Vec<RgbFrame>> {
    if side >= width || side >= height {
        return Err(Error::Validation(format!(
            "square side {side} does not fit a {width}x{height} frame"
        )));
    }
    (0..frames)
        .map(|t| {
            let x0 = (t * step) % (width - side);
            let y0 = ((height - side) / 2 + t / 5) % (height - side);
            RgbFrame::from_fn(width, height, |w, h| {
                if (x0..x0 + side).contains(&w) && (y0..y0 + side).contains(&h) {
                    [255, 255, 255]
                } else {
                    BLACK
                }
            })
        })
        .collect()
}

/// Colors of the designed blob. Their channel means are 24, 100 and 200.
pub const RIM_RGB: Rgb = [24, 24, 24];
pub const SELF_REGION_RGB: Rgb = [120, 100, 80];
pub const OBJECT_REGION_RGB: Rgb = [220, 200, 180];

/// Width of the dark rim around the blob.
pub const RIM: usize = 3;

/// A rectangular blob on black whose summed-eigenvalue bands are known by construction.
///
/// The blob has a dark rim (gray 24), a left half at gray 100 and a right
/// half at gray 200. Over a black previous frame, motion at threshold 10 marks
/// exactly the rectangle: pixels outside see at most three rim pixels
/// (72 / 9 = 8), rim corners see four (96 / 9 > 10). After hole filling and
/// `passes` erosions with the square element the blob loses `passes` rings.
/// Window diagonals then sum to 24, 48, 72 or 148 near the rim, 300 inside
/// the left half and 224..600 elsewhere, so [`ShadowScene::intervals`]
/// separate the three classes with gaps around every attained value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShadowScene {
    pub width: usize,
    pub height: usize,
    pub x: usize,
    pub y: usize,
    pub blob_width: usize,
    pub blob_height: usize,
}

impl ShadowScene {
    pub const THRESHOLD: f64 = 10.0;

    pub fn new(width: usize, height: usize, x: usize, y: usize, blob_width: usize, blob_height: usize) -> Result<Self> {
        let scene = ShadowScene {
            width,
            height,
            x,
            y,
            blob_width,
            blob_height,
        };
        let min_side = 2 * RIM + 4;
        if blob_width < min_side || blob_height < min_side {
            return Err(Error::Validation(format!("blob must be at least {min_side} pixels per side")));
        }
        if x < 2 || y < 2 || x + blob_width + 2 > width || y + blob_height + 2 > height {
            return Err(Error::Validation(
                "blob must keep two pixels of black around it".into(),
            ));
        }
        Ok(scene)
    }

    /// Cast [0, 160], self [290, 310].
    pub fn intervals() -> ShadowIntervals<f64> {
        ShadowIntervals::new(0.0, 160.0, 290.0, 310.0).expect("ordered bounds")
    }

    fn in_blob(&self, w: usize, h: usize, inset: usize) -> bool {
        w >= self.x + inset
            && w + inset < self.x + self.blob_width
            && h >= self.y + inset
            && h + inset < self.y + self.blob_height
    }

    pub fn color(&self, w: usize, h: usize) -> Rgb {
        if !self.in_blob(w, h, 0) {
            BLACK
        } else if !self.in_blob(w, h, RIM) {
            RIM_RGB
        } else if w < self.x + self.blob_width / 2 {
            SELF_REGION_RGB
        } else {
            OBJECT_REGION_RGB
        }
    }

    pub fn frame(&self) -> RgbFrame {
        RgbFrame::from_fn(self.width, self.height, |w, h| self.color(w, h)).expect("validated dimensions")
    }

    /// Blob support after `passes` erosions.
    pub fn blob_mask(&self, passes: usize) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |w, h| self.in_blob(w, h, passes))
    }

    /// Summed channel values (3x the summed gray) of the diagonal `(w-1,h-1), (w,h), (w+1,h+1)`
    /// over the eroded blob, evaluated directly from the scene colors.
    pub fn diagonal_channel_sum(&self, w: usize, h: usize, passes: usize) -> u32 {
        [(w - 1, h - 1), (w, h), (w + 1, h + 1)]
            .into_iter()
            .map(|(x, y)| {
                if self.in_blob(x, y, passes) {
                    self.color(x, y).iter().map(|&c| u32::from(c)).sum()
                } else {
                    0
                }
            })
            .sum()
    }

    /// Cast and self labels from the designed bands.
    pub fn ground_truth(&self, passes: usize) -> GroundTruth {
        let iv = Self::intervals();
        let band = |w: usize, h: usize| {
            let sum = f64::from(self.diagonal_channel_sum(w, h, passes)) / 3.0;
            (iv.in_cast(sum), iv.in_self(sum))
        };
        let cast = BinaryMask::from_fn(self.width, self.height, |w, h| self.in_blob(w, h, passes) && band(w, h).0);
        let self_shadow =
            BinaryMask::from_fn(self.width, self.height, |w, h| self.in_blob(w, h, passes) && band(w, h).1);
        GroundTruth::new(cast, self_shadow).expect("bands are disjoint")
    }
}

/// Alternating black / scene frames, the blob shifting `step` pixels right at each appearance.
///
/// Returns the frames and, per frame, the scene shown (if any).
pub fn shadow_scene_sequence(
    width: usize,
    height: usize,
    frames: usize,
    step: usize,
) -> Result<(Vec<RgbFrame>, Vec<Option<ShadowScene>>)> {
    let blob_w = (width / 3).max(2 * RIM + 4);
    let blob_h = (height / 2).max(2 * RIM + 4);
    let span = width.saturating_sub(blob_w + 4).max(1);
    let black = RgbFrame::filled(width, height, BLACK)?;
    let mut out = Vec::with_capacity(frames);
    let mut scenes = Vec::with_capacity(frames);
    for t in 0..frames {
        if t % 2 == 0 {
            out.push(black.clone());
            scenes.push(None);
        } else {
            let x = 2 + ((t / 2) * step) % span;
            let scene = ShadowScene::new(width, height, x, (height - blob_h) / 2, blob_w, blob_h)?;
            out.push(scene.frame());
            scenes.push(Some(scene));
        }
    }
    Ok((out, scenes))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.into(),
        source: e,
    })
}

/// Frame file name in the `in000001.png` style (1-based).
pub fn frame_name(index: usize) -> String {
    format!("in{:06}", index + 1)
}

/// Writes frames as `in000001.png`, ... into `dir`.
pub fn write_sequence(dir: &Path, frames: &[RgbFrame]) -> Result<()> {
    create_dir(dir)?;
    for (i, f) in frames.iter().enumerate() {
        save_frame(f, dir.join(format!("{}.png", frame_name(i))))?;
    }
    Ok(())
}

/// Writes a scene sequence and its ground truth (`<id>.cast.png`, `<id>.self.png`).
pub fn write_shadow_scene(
    input_dir: &Path,
    gt_dir: &Path,
    width: usize,
    height: usize,
    frames: usize,
    passes: usize,
) -> Result<Vec<Option<ShadowScene>>> {
    let (seq, scenes) = shadow_scene_sequence(width, height, frames, 3)?;
    write_sequence(input_dir, &seq)?;
    create_dir(gt_dir)?;
    for (i, scene) in scenes.iter().enumerate() {
        if let Some(scene) = scene {
            let gt = scene.ground_truth(passes);
            let id = frame_name(i);
            save_mask(gt.cast(), gt_dir.join(format!("{id}.cast.png")))?;
            save_mask(gt.self_shadow(), gt_dir.join(format!("{id}.self.png")))?;
        }
    }
    Ok(scenes)
}
