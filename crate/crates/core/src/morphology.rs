//! Blob post-processing: hole filling, erosion and color superimposition.

use std::collections::VecDeque;

use crate::error::{check_dims, Error, Result};
use crate::frame::{BinaryMask, RgbFrame};

/// 3x3 structuring element with its origin at the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StructuringElement {
    cells: [[bool; 3]; 3],
}

impl StructuringElement {
    pub fn new(cells: [[bool; 3]; 3]) -> Result<Self> {
        if !cells[1][1] {
            return Err(Error::Validation(
                "structuring element origin must be set".into(),
            ));
        }
        Ok(StructuringElement { cells })
    }

    /// Full 3x3 square.
    pub fn square() -> Self {
        StructuringElement {
            cells: [[true; 3]; 3],
        }
    }

    /// 4-connected plus shape.
    pub fn cross() -> Self {
        StructuringElement {
            cells: [[false, true, false], [true, true, true], [false, true, false]],
        }
    }

    pub fn cells(&self) -> &[[bool; 3]; 3] {
        &self.cells
    }

    /// Set offsets as `(dw, dh)`.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        (0..3).flat_map(move |r| {
            (0..3).filter_map(move |c| self.cells[r][c].then_some((c as isize - 1, r as isize - 1)))
        })
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square()
    }
}

/// Hole-filled, eroded blob mask with the input colors laid back onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleFilledFrame {
    pub frame: RgbFrame,
    pub mask: BinaryMask,
}

/// Sets every background pixel that cannot reach the frame border through
/// 4-connected background.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (width, height) = mask.dims();
    if width == 0 || height == 0 {
        return mask.clone();
    }
    let mut outside = vec![false; width * height];
    let mut queue = VecDeque::new();
    let seed = |w: usize, h: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
        let i = h * width + w;
        if !mask.bits()[i] && !outside[i] {
            outside[i] = true;
            queue.push_back((w, h));
        }
    };
    for w in 0..width {
        seed(w, 0, &mut outside, &mut queue);
        seed(w, height - 1, &mut outside, &mut queue);
    }
    for h in 0..height {
        seed(0, h, &mut outside, &mut queue);
        seed(width - 1, h, &mut outside, &mut queue);
    }
    while let Some((w, h)) = queue.pop_front() {
        if w > 0 {
            seed(w - 1, h, &mut outside, &mut queue);
        }
        if w + 1 < width {
            seed(w + 1, h, &mut outside, &mut queue);
        }
        if h > 0 {
            seed(w, h - 1, &mut outside, &mut queue);
        }
        if h + 1 < height {
            seed(w, h + 1, &mut outside, &mut queue);
        }
    }
    let bits = outside.into_iter().map(|o| !o).collect();
    BinaryMask::new(width, height, bits).expect("same dimensions")
}

/// Binary erosion; positions outside the frame count as unset.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (width, height) = mask.dims();
    let offsets: Vec<_> = se.offsets().collect();
    BinaryMask::from_fn(width, height, |w, h| {
        offsets.iter().all(|&(dw, dh)| {
            let (x, y) = (w as isize + dw, h as isize + dh);
            x >= 0
                && y >= 0
                && (x as usize) < width
                && (y as usize) < height
                && mask.get(x as usize, y as usize)
        })
    })
}

pub fn erode_n(mask: &BinaryMask, se: &StructuringElement, passes: usize) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..passes {
        out = erode(&out, se);
    }
    out
}

pub fn superimpose(input: &RgbFrame, mask: &BinaryMask) -> Result<HoleFilledFrame> {
    check_dims("superimpose", input.dims(), mask.dims())?;
    Ok(HoleFilledFrame {
        frame: input.masked(mask)?,
        mask: mask.clone(),
    })
}

/// Fill, then erode `passes` times, then lay `input`'s colors onto the result.
pub fn postprocess(
    input: &RgbFrame,
    motion_mask: &BinaryMask,
    se: &StructuringElement,
    passes: usize,
) -> Result<HoleFilledFrame> {
    let filled = fill_holes(motion_mask);
    let eroded = erode_n(&filled, se, passes);
    superimpose(input, &eroded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(width: usize, height: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |w, h| (x0..x1).contains(&w) && (y0..y1).contains(&h))
    }

    fn brute_erode(mask: &BinaryMask) -> BinaryMask {
        let (width, height) = mask.dims();
        BinaryMask::from_fn(width, height, |w, h| {
            let mut all = true;
            for dy in [-1isize, 0, 1] {
                for dx in [-1isize, 0, 1] {
                    let (x, y) = (w as isize + dx, h as isize + dy);
                    let inside = x >= 0 && y >= 0 && x < width as isize && y < height as isize;
                    all &= inside && mask.get(x as usize, y as usize);
                }
            }
            all
        })
    }

    #[test]
    fn ring_fills_to_square() {
        let outer = rect(14, 14, 2, 2, 12, 12);
        let hole = rect(14, 14, 4, 4, 10, 10);
        let ring = BinaryMask::from_fn(14, 14, |w, h| outer.get(w, h) && !hole.get(w, h));
        assert_eq!(ring.count(), 100 - 36);
        assert_eq!(fill_holes(&ring), outer);
    }

    #[test]
    fn holeless_mask_is_unchanged() {
        let m = rect(10, 10, 1, 1, 6, 4);
        assert_eq!(fill_holes(&m), m);
        assert_eq!(fill_holes(&BinaryMask::empty(5, 5)), BinaryMask::empty(5, 5));
    }

    #[test]
    fn open_cavity_stays_background() {
        // C shape: 8x8 square with a 4x4 cavity opening to the right edge of the square.
        let outer = rect(12, 12, 2, 2, 10, 10);
        let cavity = rect(12, 12, 4, 4, 10, 8);
        let c = BinaryMask::from_fn(12, 12, |w, h| outer.get(w, h) && !cavity.get(w, h));
        assert_eq!(fill_holes(&c), c);
    }

    #[test]
    fn diagonal_leak_is_still_a_hole() {
        // Background touching the outside only through a diagonal gap is not 4-connected to it.
        let mut m = rect(7, 7, 1, 1, 6, 6);
        m.set(3, 3, false);
        m.set(2, 2, false);
        m.set(1, 1, false);
        let filled = fill_holes(&m);
        assert!(filled.get(3, 3) && filled.get(2, 2));
        assert!(!filled.get(1, 1));
    }

    #[test]
    fn erode_block_to_center() {
        let m = rect(7, 7, 2, 2, 5, 5);
        let e = erode(&m, &StructuringElement::square());
        assert_eq!(e, rect(7, 7, 3, 3, 4, 4));
    }

    #[test]
    fn erode_removes_isolated_pixel() {
        let mut m = BinaryMask::empty(5, 5);
        m.set(2, 2, true);
        assert!(erode(&m, &StructuringElement::square()).is_empty());
    }

    #[test]
    fn erode_10x10_to_8x8() {
        let m = rect(14, 14, 2, 2, 12, 12);
        let e = erode(&m, &StructuringElement::square());
        assert_eq!(e, brute_erode(&m));
        assert_eq!(e, rect(14, 14, 3, 3, 11, 11));
    }

    #[test]
    fn frame_edge_counts_as_background() {
        let e = erode(&BinaryMask::full(5, 5), &StructuringElement::square());
        assert_eq!(e, rect(5, 5, 1, 1, 4, 4));
    }

    #[test]
    fn cross_element_keeps_corners_of_plus() {
        let plus = BinaryMask::from_fn(5, 5, |w, h| (w == 2 && (1..4).contains(&h)) || (h == 2 && (1..4).contains(&w)));
        let e = erode(&plus, &StructuringElement::cross());
        assert_eq!(e.count(), 1);
        assert!(e.get(2, 2));
    }

    #[test]
    fn element_needs_origin() {
        let mut cells = [[true; 3]; 3];
        cells[1][1] = false;
        assert!(StructuringElement::new(cells).is_err());
    }

    #[test]
    fn superimpose_cases() {
        let input = RgbFrame::from_fn(4, 4, |w, h| [w as u8 * 40, h as u8 * 40, 7]).unwrap();
        let full = superimpose(&input, &BinaryMask::full(4, 4)).unwrap();
        assert_eq!(full.frame, input);
        let none = superimpose(&input, &BinaryMask::empty(4, 4)).unwrap();
        assert!(none.frame.pixels().iter().all(|&p| p == [0, 0, 0]));
        let checker = BinaryMask::from_fn(4, 4, |w, h| (w + h) % 2 == 0);
        let out = superimpose(&input, &checker).unwrap();
        for h in 0..4 {
            for w in 0..4 {
                let expect = if (w + h) % 2 == 0 { input.get(w, h) } else { [0, 0, 0] };
                assert_eq!(out.frame.get(w, h), expect);
            }
        }
        assert!(superimpose(&input, &BinaryMask::empty(3, 4)).is_err());
    }

    #[test]
    fn pipeline_order_is_fill_then_erode() {
        // A ring of thickness 1: eroding first would wipe it out, filling first leaves a core.
        let outer = rect(9, 9, 1, 1, 8, 8);
        let hole = rect(9, 9, 2, 2, 7, 7);
        let ring = BinaryMask::from_fn(9, 9, |w, h| outer.get(w, h) && !hole.get(w, h));
        let input = RgbFrame::filled(9, 9, [200, 100, 50]).unwrap();
        let out = postprocess(&input, &ring, &StructuringElement::square(), 1).unwrap();
        assert_eq!(out.mask, rect(9, 9, 2, 2, 7, 7));
        assert!(erode(&ring, &StructuringElement::square()).is_empty());
        assert_eq!(out.frame.get(4, 4), [200, 100, 50]);
        assert_eq!(out.frame.get(1, 1), [0, 0, 0]);
    }

    fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
        proptest::collection::vec(proptest::bool::weighted(0.6), 12 * 10)
            .prop_map(|bits| BinaryMask::new(12, 10, bits).unwrap())
    }

    proptest! {
        #[test]
        fn fill_is_idempotent_and_extensive(m in mask_strategy()) {
            let f = fill_holes(&m);
            prop_assert!(m.is_subset_of(&f));
            prop_assert_eq!(fill_holes(&f), f);
        }

        #[test]
        fn erode_matches_brute_force(m in mask_strategy()) {
            prop_assert_eq!(erode(&m, &StructuringElement::square()), brute_erode(&m));
        }

        #[test]
        fn erode_is_anti_extensive_and_monotone(a in mask_strategy(), b in mask_strategy()) {
            let se = StructuringElement::square();
            let ab = BinaryMask::from_fn(12, 10, |w, h| a.get(w, h) && b.get(w, h));
            prop_assert!(erode(&a, &se).is_subset_of(&a));
            prop_assert!(erode(&ab, &se).is_subset_of(&erode(&a, &se)));
        }
    }
}
