use std::path::Path;

use eigenshadow::frame::{list_frames, load_mask, save_mask};
use eigenshadow::{load_frame, load_ground_truth, save_frame, BinaryMask, Error, RgbFrame};
use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

fn write_gray(path: &Path, width: u32, height: u32, lit: &[(u32, u32)]) {
    let mut img = GrayImage::new(width, height);
    for &(x, y) in lit {
        img.put_pixel(x, y, Luma([200]));
    }
    img.save(path).unwrap();
}

#[test]
fn too_small_image_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.png");
    RgbImage::new(2, 2).save(&path).unwrap();
    assert!(matches!(load_frame(&path), Err(Error::Format { .. })));
}

#[test]
fn solid_black_png() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("black.png");
    RgbImage::new(8, 8).save(&path).unwrap();
    let frame = load_frame(&path).unwrap();
    assert_eq!(frame.dims(), (8, 8));
    assert!(frame.pixels().iter().all(|&p| p == [0, 0, 0]));
}

#[test]
fn png_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.png");
    let frame = RgbFrame::from_fn(13, 7, |w, h| [(w * 19) as u8, (h * 37) as u8, (w * h) as u8]).unwrap();
    save_frame(&frame, &path).unwrap();
    assert_eq!(load_frame(&path).unwrap(), frame);
}

#[test]
fn jpeg_frames_decode() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in000001.jpg");
    RgbImage::from_pixel(16, 12, Rgb([90, 90, 90])).save(&path).unwrap();
    let frame = load_frame(&path).unwrap();
    assert_eq!(frame.dims(), (16, 12));
    let [r, g, b] = frame.get(8, 6);
    assert!(r.abs_diff(90) < 4 && g.abs_diff(90) < 4 && b.abs_diff(90) < 4);
}

#[test]
fn sixteen_bit_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deep.png");
    let img: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::new(8, 8);
    img.save(&path).unwrap();
    assert!(matches!(load_frame(&path), Err(Error::Format { .. })));
}

#[test]
fn missing_and_garbage_files() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.png");
    assert!(matches!(load_frame(&missing), Err(Error::Io { path, .. }) if path == missing));
    let garbage = dir.path().join("bad.png");
    std::fs::write(&garbage, b"not an image").unwrap();
    assert!(matches!(load_frame(&garbage), Err(Error::Format { .. })));
}

#[test]
fn ground_truth_cases() {
    let dir = tempfile::tempdir().unwrap();
    let (c, s) = (dir.path().join("c.png"), dir.path().join("s.png"));

    write_gray(&c, 10, 10, &[]);
    write_gray(&s, 10, 10, &[]);
    let gt = load_ground_truth(&c, &s).unwrap();
    assert!(gt.cast().is_empty() && gt.self_shadow().is_empty());

    write_gray(&c, 10, 10, &[(5, 5)]);
    let gt = load_ground_truth(&c, &s).unwrap();
    assert_eq!(gt.cast().count(), 1);
    assert!(gt.cast().get(5, 5));

    write_gray(&s, 10, 10, &[(5, 5)]);
    assert!(matches!(load_ground_truth(&c, &s), Err(Error::Validation(_))));

    write_gray(&s, 11, 10, &[]);
    assert!(matches!(load_ground_truth(&c, &s), Err(Error::Format { .. })));
}

#[test]
fn mask_png_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.png");
    let mask = BinaryMask::from_fn(9, 5, |w, h| (w + 2 * h) % 3 == 0);
    save_mask(&mask, &path).unwrap();
    assert_eq!(load_mask(&path).unwrap(), mask);
}

#[test]
fn frames_listed_in_name_order_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["in000010.png", "in000002.jpg", "in000001.png", "in000002.motion.png"] {
        RgbImage::new(4, 4).save(dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("README"), "x").unwrap();
    let ids: Vec<_> = list_frames(dir.path()).unwrap().into_iter().map(|f| f.id).collect();
    assert_eq!(ids, ["in000001", "in000002", "in000010"]);
}
