//! Shi-Tomasi corner detection over binary masks.
//!
//! Gradients come from 3x3 Sobel kernels; the structure tensor is box-summed
//! over a window; the response at each pixel is the smaller eigenvalue of
//! that 2x2 tensor, computed in closed form.

use crate::geo::PlanarPoint;

use super::BinaryMask;

/// Detector knobs. `quality` is relative to the strongest response in the
/// image, so a flat mask yields no corners regardless of its value.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerParams {
    /// Odd side length of the structure-tensor window.
    pub window: usize,
    /// Relative response threshold in (0, 1].
    pub quality: f64,
    /// Minimum pixel distance between accepted corners.
    pub min_distance: f64,
    /// Hard cap on the number of corners returned.
    pub max_corners: usize,
}

impl Default for CornerParams {
    fn default() -> Self {
        Self {
            window: 5,
            quality: 0.01,
            min_distance: 10.0,
            max_corners: 500,
        }
    }
}

/// Per-pixel structure tensor entries, window-summed: [Ixx, Ixy; Ixy, Iyy].
#[derive(Debug, Clone)]
pub struct TensorField {
    pub width: usize,
    pub height: usize,
    pub ixx: Vec<f64>,
    pub ixy: Vec<f64>,
    pub iyy: Vec<f64>,
}

fn sobel_gradients(mask: &BinaryMask) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (mask.width(), mask.height());
    let v = |x: usize, y: usize| -> f64 { f64::from(u8::from(mask.get(x, y))) };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    if w < 3 || h < 3 {
        return (gx, gy);
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let idx = y * w + x;
            gx[idx] = -v(x - 1, y - 1) + v(x + 1, y - 1) - 2.0 * v(x - 1, y) + 2.0 * v(x + 1, y)
                - v(x - 1, y + 1)
                + v(x + 1, y + 1);
            gy[idx] = -v(x - 1, y - 1) - 2.0 * v(x, y - 1) - v(x + 1, y - 1)
                + v(x - 1, y + 1)
                + 2.0 * v(x, y + 1)
                + v(x + 1, y + 1);
        }
    }
    (gx, gy)
}

/// Summed-area table; `sums[(y+1)*(w+1)+(x+1)]` is the sum over [0,x]x[0,y].
struct Integral {
    width: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn build(values: &[f64], w: usize, h: usize) -> Self {
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += values[y * w + x];
                sums[(y + 1) * (w + 1) + (x + 1)] = sums[y * (w + 1) + (x + 1)] + row;
            }
        }
        Self { width: w, sums }
    }

    /// Inclusive rectangle sum over [x0,x1] x [y0,y1].
    fn rect(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let w1 = self.width + 1;
        self.sums[(y1 + 1) * w1 + (x1 + 1)] - self.sums[y0 * w1 + (x1 + 1)] - self.sums[(y1 + 1) * w1 + x0]
            + self.sums[y0 * w1 + x0]
    }
}

/// Box-sums the gradient products over `window`, clamping the window at the
/// raster borders.
pub fn structure_tensor(mask: &BinaryMask, window: usize) -> TensorField {
    assert!(window % 2 == 1 && window >= 3, "window must be odd and at least 3");
    let (w, h) = (mask.width(), mask.height());
    let (gx, gy) = sobel_gradients(mask);
    let xx: Vec<f64> = gx.iter().map(|g| g * g).collect();
    let yy: Vec<f64> = gy.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = gx.iter().zip(gy.iter()).map(|(a, b)| a * b).collect();
    let ixx_int = Integral::build(&xx, w, h);
    let iyy_int = Integral::build(&yy, w, h);
    let ixy_int = Integral::build(&xy, w, h);

    let r = window / 2;
    let mut field = TensorField {
        width: w,
        height: h,
        ixx: vec![0.0; w * h],
        ixy: vec![0.0; w * h],
        iyy: vec![0.0; w * h],
    };
    for y in 0..h {
        let y0 = y.saturating_sub(r);
        let y1 = (y + r).min(h - 1);
        for x in 0..w {
            let x0 = x.saturating_sub(r);
            let x1 = (x + r).min(w - 1);
            let idx = y * w + x;
            field.ixx[idx] = ixx_int.rect(x0, y0, x1, y1);
            field.ixy[idx] = ixy_int.rect(x0, y0, x1, y1);
            field.iyy[idx] = iyy_int.rect(x0, y0, x1, y1);
        }
    }
    field
}

/// Per-pixel corner response: the smaller eigenvalue of the structure
/// tensor, `(t - sqrt(t^2 - 4d)) / 2` with `t` the trace and `d` the
/// determinant.
pub fn shi_tomasi_response(mask: &BinaryMask, window: usize) -> Vec<f64> {
    let field = structure_tensor(mask, window);
    field
        .ixx
        .iter()
        .zip(field.ixy.iter())
        .zip(field.iyy.iter())
        .map(|((&a, &b), &c)| {
            let trace = a + c;
            let det = a * c - b * b;
            let disc = (trace * trace - 4.0 * det).max(0.0);
            (trace - disc.sqrt()) / 2.0
        })
        .collect()
}

/// Detects corners: thresholds the response relative to the image maximum,
/// keeps local maxima, then greedily enforces `min_distance` in descending
/// response order. Output order is the acceptance order.
pub fn shi_tomasi_corners(mask: &BinaryMask, params: &CornerParams) -> Vec<PlanarPoint> {
    let (w, h) = (mask.width(), mask.height());
    let response = shi_tomasi_response(mask, params.window);
    let max_response = response.iter().copied().fold(0.0f64, f64::max);
    if max_response <= 0.0 {
        return Vec::new();
    }
    let threshold = params.quality * max_response;

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let r = response[y * w + x];
            if r < threshold {
                continue;
            }
            let mut is_max = true;
            'nb: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    if response[ny as usize * w + nx as usize] > r {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((r, x, y));
            }
        }
    }

    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

    let min_dist_sq = params.min_distance * params.min_distance;
    let mut accepted: Vec<PlanarPoint> = Vec::new();
    for (_, x, y) in candidates {
        let p = PlanarPoint::new(x as f64, y as f64);
        let too_close = accepted
            .iter()
            .any(|q| (p.x - q.x).powi(2) + (p.y - q.y).powi(2) < min_dist_sq);
        if !too_close {
            accepted.push(p);
            if accepted.len() >= params.max_corners {
                break;
            }
        }
    }
    accepted
}

/// L1 distance to the nearest background pixel, two-pass chamfer; pixels
/// outside the raster count as background.
pub fn distance_to_background(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = (mask.width(), mask.height());
    let cap = (w + h) as u32;
    let mut dist = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if !mask.get(x, y) {
                continue;
            }
            let mut d = cap;
            if x > 0 {
                d = d.min(dist[idx - 1] + 1);
            } else {
                d = d.min(1);
            }
            if y > 0 {
                d = d.min(dist[idx - w] + 1);
            } else {
                d = d.min(1);
            }
            dist[idx] = d;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let idx = y * w + x;
            if !mask.get(x, y) {
                continue;
            }
            let mut d = dist[idx];
            if x + 1 < w {
                d = d.min(dist[idx + 1] + 1);
            } else {
                d = d.min(1);
            }
            if y + 1 < h {
                d = d.min(dist[idx + w] + 1);
            } else {
                d = d.min(1);
            }
            dist[idx] = d;
        }
    }
    dist
}

/// Moves each point to the deepest road pixel within a Chebyshev `radius`:
/// the pixel maximizing the distance to background, ties broken by
/// closeness to the original point. Corner response maxima sit a few pixels
/// off the stroke centerline (toward the concave side of a bend), while the
/// distance ridge runs along centerlines and peaks where strokes cross, so
/// this lands stroke tips on their centerline and junction corners on the
/// crossing itself. Points with no road pixel in reach are returned
/// unchanged.
pub fn snap_to_road(mask: &BinaryMask, points: &[PlanarPoint], radius: i64) -> Vec<PlanarPoint> {
    let depth = distance_to_background(mask);
    points
        .iter()
        .map(|&p| {
            let cx = p.x.round() as i64;
            let cy = p.y.round() as i64;
            // Prefer deeper pixels, then nearer ones, then scan order.
            let mut best: Option<(u32, i64, i64, i64)> = None;
            for y in cy - radius..=cy + radius {
                for x in cx - radius..=cx + radius {
                    if !mask.in_bounds(x, y) {
                        continue;
                    }
                    let d = depth[y as usize * mask.width() + x as usize];
                    if d == 0 {
                        continue;
                    }
                    let dist2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    let candidate = (d, -dist2, -y, -x);
                    if best.is_none_or(|b| candidate > b) {
                        best = Some(candidate);
                    }
                }
            }
            match best {
                Some((_, _, neg_y, neg_x)) => PlanarPoint::new(-neg_x as f64, -neg_y as f64),
                None => p,
            }
        })
        .collect()
}

/// Greedy distance suppression preserving input order: keeps a point only
/// when it is at least `radius` away from every point kept before it.
/// Snapping can pull detector output closer together than its own
/// suppression distance (two maxima straddling one junction drift toward
/// the same center), so the extraction pipeline re-applies this after
/// snapping.
pub fn enforce_min_distance(points: &[PlanarPoint], radius: f64) -> Vec<PlanarPoint> {
    let mut kept: Vec<PlanarPoint> = Vec::new();
    for &p in points {
        if kept.iter().all(|q| q.distance(&p) >= radius) {
            kept.push(p);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stroke_h(mask: &mut BinaryMask, x0: usize, x1: usize, y: usize) {
        for x in x0..=x1 {
            for dy in 0..3 {
                mask.set(x, y + dy, true);
            }
        }
    }

    fn stroke_v(mask: &mut BinaryMask, y0: usize, y1: usize, x: usize) {
        for y in y0..=y1 {
            for dx in 0..3 {
                mask.set(x + dx, y, true);
            }
        }
    }

    #[test]
    fn uniform_masks_have_no_corners() {
        let zeros = BinaryMask::new(32, 32);
        assert!(shi_tomasi_corners(&zeros, &CornerParams::default()).is_empty());
        let ones = BinaryMask::from_fn(32, 32, |_, _| true);
        assert!(shi_tomasi_corners(&ones, &CornerParams::default()).is_empty());
    }

    #[test]
    fn l_bend_produces_a_corner_near_the_bend() {
        let mut mask = BinaryMask::new(64, 64);
        stroke_h(&mut mask, 10, 40, 30); // rows 30..33, cols 10..=40
        stroke_v(&mut mask, 10, 32, 40); // cols 40..43, rows 10..=32
        let corners = shi_tomasi_corners(&mask, &CornerParams::default());
        assert!(!corners.is_empty());
        // Bend sits around (41, 31).
        let near_bend = corners
            .iter()
            .any(|c| (c.x - 41.0).abs() <= 2.0 && (c.y - 31.0).abs() <= 2.0);
        assert!(near_bend, "no corner within 2 px of the bend: {corners:?}");
    }

    #[test]
    fn straight_stroke_interior_yields_no_corner() {
        let mut mask = BinaryMask::new(96, 32);
        stroke_h(&mut mask, 4, 91, 14);
        let corners = shi_tomasi_corners(&mask, &CornerParams::default());
        for c in &corners {
            assert!(
                c.x < 20.0 || c.x > 75.0,
                "interior corner at {c:?} on a straight stroke"
            );
        }
    }

    #[test]
    fn response_matches_direct_window_sums_on_small_input() {
        // The integral-image route must agree with naive box sums.
        let mask = BinaryMask::from_fn(9, 9, |x, y| (x + 2 * y) % 3 == 0);
        let window = 3;
        let field = structure_tensor(&mask, window);
        let (gx, gy) = super::sobel_gradients(&mask);
        let r = window / 2;
        for y in 0..9usize {
            for x in 0..9usize {
                let mut xx = 0.0;
                let mut xy = 0.0;
                let mut yy = 0.0;
                for ny in y.saturating_sub(r)..=(y + r).min(8) {
                    for nx in x.saturating_sub(r)..=(x + r).min(8) {
                        let g = (gx[ny * 9 + nx], gy[ny * 9 + nx]);
                        xx += g.0 * g.0;
                        xy += g.0 * g.1;
                        yy += g.1 * g.1;
                    }
                }
                let idx = y * 9 + x;
                assert!((field.ixx[idx] - xx).abs() < 1e-9);
                assert!((field.ixy[idx] - xy).abs() < 1e-9);
                assert!((field.iyy[idx] - yy).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn snapping_moves_offset_points_onto_centerlines() {
        let mut mask = BinaryMask::new(64, 64);
        stroke_h(&mut mask, 8, 56, 30); // rows 30..=32, centerline 31
        let snapped = snap_to_road(&mask, &[PlanarPoint::new(30.0, 34.0)], 4);
        assert_eq!(snapped[0].y, 31.0, "snapped to {:?}", snapped[0]);
        // A point far from any road stays put.
        let far = snap_to_road(&mask, &[PlanarPoint::new(30.0, 50.0)], 4);
        assert_eq!(far[0], PlanarPoint::new(30.0, 50.0));
    }

    #[test]
    fn snapping_prefers_junction_crossings() {
        let mut mask = BinaryMask::new(64, 64);
        stroke_h(&mut mask, 8, 56, 30); // rows 30..=32
        stroke_v(&mut mask, 8, 56, 30); // cols 30..=32
        // A corner detected diagonally off the crossing lands on it.
        let snapped = snap_to_road(&mask, &[PlanarPoint::new(34.0, 34.0)], 4);
        assert!(
            (snapped[0].x - 31.0).abs() <= 1.0 && (snapped[0].y - 31.0).abs() <= 1.0,
            "snapped to {:?}",
            snapped[0]
        );
    }

    #[test]
    fn min_distance_suppression_is_respected() {
        let mut mask = BinaryMask::new(128, 64);
        stroke_h(&mut mask, 10, 110, 20);
        stroke_v(&mut mask, 20, 50, 60);
        let params = CornerParams {
            min_distance: 15.0,
            ..CornerParams::default()
        };
        let corners = shi_tomasi_corners(&mask, &params);
        for (i, a) in corners.iter().enumerate() {
            for b in corners.iter().skip(i + 1) {
                assert!(a.distance(b) >= 15.0, "{a:?} and {b:?} too close");
            }
        }
    }
}
