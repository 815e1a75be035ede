//! Hand-drawn sketch preprocessing: resize, median denoise, Otsu threshold
//! with stroke polarity, and a closing pass to heal small stroke gaps.

use image::imageops::FilterType;
use image::GrayImage;

use super::{BinaryMask, ExtractError};

const TARGET_MAX_DIM: u32 = 512;

/// Converts a grayscale sketch into a binary road mask. The threshold
/// polarity is chosen so that strokes (the minority class) map to 1.
pub fn preprocess_sketch(image: &GrayImage) -> Result<BinaryMask, ExtractError> {
    if image.width() == 0 || image.height() == 0 {
        return Err(ExtractError::ImageEmpty);
    }
    let resized = resize_to_max(image, TARGET_MAX_DIM);
    let denoised = median_3x3(&resized);
    let mask = otsu_binarize(&denoised);
    Ok(close_3x3(&mask))
}

fn resize_to_max(img: &GrayImage, max_dim: u32) -> GrayImage {
    let (w, h) = img.dimensions();
    let longest = w.max(h);
    if longest == max_dim {
        return img.clone();
    }
    let scale = f64::from(max_dim) / f64::from(longest);
    let nw = ((f64::from(w) * scale).round() as u32).max(1);
    let nh = ((f64::from(h) * scale).round() as u32).max(1);
    image::imageops::resize(img, nw, nh, FilterType::Triangle)
}

fn median_3x3(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dimensions();
    GrayImage::from_fn(w, h, |x, y| {
        let mut window = [0u8; 9];
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx >= 0 && ny >= 0 && (nx as u32) < w && (ny as u32) < h {
                    window[n] = img.get_pixel(nx as u32, ny as u32)[0];
                    n += 1;
                }
            }
        }
        window[..n].sort_unstable();
        image::Luma([window[n / 2]])
    })
}

/// Otsu's method over the 256-bin histogram; the smaller resulting class is
/// treated as strokes. A flat image produces an all-zero mask.
fn otsu_binarize(img: &GrayImage) -> BinaryMask {
    let (w, h) = img.dimensions();
    let mut hist = [0u64; 256];
    for p in img.pixels() {
        hist[p[0] as usize] += 1;
    }
    let total = u64::from(w) * u64::from(h);
    let nonzero_bins = hist.iter().filter(|&&c| c > 0).count();
    if nonzero_bins <= 1 {
        return BinaryMask::new(w as usize, h as usize);
    }

    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let mut best_threshold = 0usize;
    let mut best_variance = -1.0f64;
    let mut weight_low = 0f64;
    let mut sum_low = 0f64;
    for (t, &count) in hist.iter().enumerate() {
        weight_low += count as f64;
        if weight_low == 0.0 {
            continue;
        }
        let weight_high = total as f64 - weight_low;
        if weight_high == 0.0 {
            break;
        }
        sum_low += t as f64 * count as f64;
        let mean_low = sum_low / weight_low;
        let mean_high = (sum_all - sum_low) / weight_high;
        let variance = weight_low * weight_high * (mean_low - mean_high).powi(2);
        if variance > best_variance {
            best_variance = variance;
            best_threshold = t;
        }
    }

    let dark_count: u64 = hist[..=best_threshold].iter().sum();
    let strokes_are_dark = dark_count * 2 <= total;
    BinaryMask::from_fn(w as usize, h as usize, |x, y| {
        let dark = img.get_pixel(x as u32, y as u32)[0] as usize <= best_threshold;
        dark == strokes_are_dark
    })
}

fn dilate_3x3(mask: &BinaryMask) -> BinaryMask {
    neighborhood_op(mask, |any, _all| any)
}

fn erode_3x3(mask: &BinaryMask) -> BinaryMask {
    neighborhood_op(mask, |_any, all| all)
}

fn close_3x3(mask: &BinaryMask) -> BinaryMask {
    erode_3x3(&dilate_3x3(mask))
}

fn neighborhood_op(mask: &BinaryMask, combine: impl Fn(bool, bool) -> bool) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        let mut any = false;
        let mut all = true;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                let v = if mask.in_bounds(nx, ny) {
                    mask.get(nx as usize, ny as usize)
                } else {
                    false
                };
                any |= v;
                all &= v;
            }
        }
        combine(any, all)
    })
}
