//! Raster plots: field heatmaps and loss curves as PNG files, no display
//! server involved.

use std::path::Path;

use image::{ImageBuffer, Rgb};

use crate::error::{Error, Result};

/// Five-anchor sequential colormap (dark blue → teal → green → yellow).
fn colormap(t: f64) -> Rgb<u8> {
    const ANCHORS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut rgb = ANCHORS[0].1;
    for w in ANCHORS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t >= t0 && t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + f * (c1[0] - c0[0]),
                c0[1] + f * (c1[1] - c0[1]),
                c0[2] + f * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    Rgb([rgb[0] as u8, rgb[1] as u8, rgb[2] as u8])
}

/// Writes an `nx × ny` field (row-major, x fastest, y growing upward) as a
/// PNG heatmap, scaled so each node covers `scale × scale` pixels.
pub fn heatmap(path: &Path, nx: usize, ny: usize, values: &[f64]) -> Result<()> {
    if values.len() != nx * ny {
        return Err(Error::Domain(format!(
            "heatmap got {} values for {nx}x{ny}",
            values.len()
        )));
    }
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scale = (512 / nx.max(ny)).clamp(1, 8) as u32;
    let (w, h) = (nx as u32 * scale, ny as u32 * scale);
    let img = ImageBuffer::from_fn(w, h, |px, py| {
        let i = (px / scale) as usize;
        // Image rows grow downward; field rows grow upward.
        let j = ny - 1 - (py / scale) as usize;
        let v = values[j * nx + i];
        if v.is_finite() {
            colormap((v - lo) / span)
        } else {
            Rgb([255, 0, 255])
        }
    });
    img.save(path).map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// Loss-curve PNG: iteration on x, `log10(value)` on y, one polyline.
pub fn loss_curve(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let (w, h) = (640u32, 400u32);
    let mut img = ImageBuffer::from_pixel(w, h, Rgb([255u8, 255, 255]));
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|&(i, v)| (i, v.log10()))
        .collect();
    if usable.len() >= 2 {
        let (x0, x1) = (
            usable.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            usable.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
        );
        let (y0, y1) = (
            usable.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            usable.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        );
        let xs = |x: f64| ((x - x0) / (x1 - x0).max(1e-12) * (w - 20) as f64) as i64 + 10;
        let ys = |y: f64| (h as i64 - 10) - ((y - y0) / (y1 - y0).max(1e-12) * (h - 20) as f64) as i64;
        let mut prev: Option<(i64, i64)> = None;
        for &(x, y) in &usable {
            let p = (xs(x), ys(y));
            if let Some(q) = prev {
                draw_segment(&mut img, q, p);
            }
            prev = Some(p);
        }
    }
    img.save(path).map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

fn draw_segment(img: &mut ImageBuffer<Rgb<u8>, Vec<u8>>, a: (i64, i64), b: (i64, i64)) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1);
    for k in 0..=steps {
        let x = a.0 + (b.0 - a.0) * k / steps;
        let y = a.1 + (b.1 - a.1) * k / steps;
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, Rgb([178, 34, 34]));
        }
    }
}
