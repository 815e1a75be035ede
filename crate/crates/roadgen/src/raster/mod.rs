//! Image-based network extraction: binary masks, overlap metrics, sketch
//! preprocessing, corner detection, and the two-round connection pipeline
//! that turns a road raster into a [`crate::geo::NetworkGraph`].

mod connect;
mod corners;
mod extract;
mod preprocess;

pub use connect::{
    bresenham, classify_points, connect_points, drop_collinear_chords, prune_redundant,
    rasterize_edges, segment_gain, segment_pixels, AdjacencyGraph, ConnectParams, PointClass, PointKind,
};
pub use corners::{
    distance_to_background, enforce_min_distance, shi_tomasi_corners, shi_tomasi_response,
    snap_to_road, structure_tensor, CornerParams, TensorField,
};
pub use extract::{extract_network, extract_network_stages, ExtractStages};
pub use preprocess::preprocess_sketch;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("input image has no pixels")]
    ImageEmpty,
    #[error("segment endpoint ({x}, {y}) is outside the {width}x{height} raster")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },
    #[error("segment endpoints land on the same pixel")]
    DegenerateSegment,
    #[error("no corners found in the mask; nothing to extract")]
    NoCornersFound,
    #[error(transparent)]
    Projection(#[from] crate::geo::GeoError),
}

/// Row-major raster of road bits; `true` means road.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be at least 1x1");
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.data[y * width + x] = f(x, y);
            }
        }
        mask
    }

    /// Thresholds a grayscale image: pixel values >= 128 become road.
    pub fn from_gray(img: &image::GrayImage) -> Self {
        Self::from_fn(img.width() as usize, img.height() as usize, |x, y| {
            img.get_pixel(x as u32, y as u32)[0] >= 128
        })
    }

    pub fn to_gray(&self) -> image::GrayImage {
        image::GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    fn same_dims(&self, other: &BinaryMask) -> Result<(), ExtractError> {
        if self.width != other.width || self.height != other.height {
            return Err(ExtractError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// Intersection over union of two same-size masks; 1 when both are empty.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64, ExtractError> {
    a.same_dims(b)?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (pa, pb) in a.data.iter().zip(b.data.iter()) {
        inter += usize::from(*pa && *pb);
        union += usize::from(*pa || *pb);
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// One minus the Dice coefficient; 0 when both masks are empty.
pub fn dice_loss(a: &BinaryMask, b: &BinaryMask) -> Result<f64, ExtractError> {
    a.same_dims(b)?;
    let mut inter = 0usize;
    let mut total = 0usize;
    for (pa, pb) in a.data.iter().zip(b.data.iter()) {
        inter += usize::from(*pa && *pb);
        total += usize::from(*pa) + usize::from(*pb);
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - 2.0 * inter as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let height = rows.len();
        let width = rows[0].len();
        BinaryMask::from_fn(width, height, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[test]
    fn iou_of_identical_masks_is_one() {
        let m = mask_from_rows(&["##..", "..##"]);
        assert_eq!(iou(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn iou_of_disjoint_masks_is_zero() {
        let a = mask_from_rows(&["##..", "...."]);
        let b = mask_from_rows(&["....", "..##"]);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn iou_counts_pixels() {
        // |a| = 2, |b| = 2, overlap 1 -> 1/3
        let a = mask_from_rows(&["##.."]);
        let b = mask_from_rows(&[".##."]);
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dice_loss_examples() {
        let m = mask_from_rows(&["##..", "..##"]);
        assert_eq!(dice_loss(&m, &m).unwrap(), 0.0);
        let a = mask_from_rows(&["##.."]);
        let b = mask_from_rows(&["..##"]);
        assert_eq!(dice_loss(&a, &b).unwrap(), 1.0);
        let c = mask_from_rows(&[".##."]);
        assert!((dice_loss(&a, &c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn both_empty_edge_cases() {
        let a = BinaryMask::new(4, 4);
        let b = BinaryMask::new(4, 4);
        assert_eq!(iou(&a, &b).unwrap(), 1.0);
        assert_eq!(dice_loss(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = BinaryMask::new(4, 4);
        let b = BinaryMask::new(4, 5);
        assert!(matches!(iou(&a, &b), Err(ExtractError::DimensionMismatch(..))));
        assert!(matches!(dice_loss(&a, &b), Err(ExtractError::DimensionMismatch(..))));
    }
}
