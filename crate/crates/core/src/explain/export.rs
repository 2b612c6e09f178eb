use std::path::{Path, PathBuf};

use image::{ImageFormat, Rgb, RgbImage};
use ndarray::Array2;

use crate::{Error, Result};

/// Heat ramp control points `(t, [r, g, b])`, linearly interpolated:
/// black → dark red → red → yellow → white.
pub const HEAT_STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [0, 0, 0]),
    (0.25, [128, 0, 0]),
    (0.5, [255, 0, 0]),
    (0.75, [255, 255, 0]),
    (1.0, [255, 255, 255]),
];

pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let i = HEAT_STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(HEAT_STOPS.len() - 2);
    let (t0, c0) = HEAT_STOPS[i];
    let (t1, c1) = HEAT_STOPS[i + 1];
    let f = (t - t0) / (t1 - t0);
    std::array::from_fn(|k| (c0[k] as f64 + (c1[k] as f64 - c0[k] as f64) * f).round() as u8)
}

/// `round(255·v)` for `v` clamped to `[0, 1]`.
pub fn to_gray_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn save(img: impl FnOnce(&Path) -> image::ImageResult<()>, path: &Path) -> Result<()> {
    img(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(format!("{}: {other}", path.display())),
    })
}

/// Binary PGM (P5, maxval 255).
pub fn write_pgm(path: &Path, map: &Array2<f64>) -> Result<()> {
    let (h, w) = map.dim();
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend(map.iter().map(|&v| to_gray_u8(v)));
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    save(|p| img.save_with_format(p, ImageFormat::Png), path)
}

/// Heat colour at 50% alpha over the grayscale base, per channel
/// `round((base + heat) / 2)` on the 0..255 scale.
pub fn overlay_rgb(base: &Array2<f64>, heat: &Array2<f64>) -> Result<RgbImage> {
    if base.dim() != heat.dim() {
        return Err(Error::Shape(format!("base {:?} vs heatmap {:?}", base.dim(), heat.dim())));
    }
    let (h, w) = base.dim();
    Ok(RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let (i, j) = (y as usize, x as usize);
        let g = to_gray_u8(base[(i, j)]) as u16;
        let c = colormap(heat[(i, j)]);
        Rgb(std::array::from_fn(|k| (g + c[k] as u16).div_ceil(2) as u8))
    }))
}

/// Write `<stem>.class<ℓ>.heatmap.pgm` and `<stem>.class<ℓ>.overlay.png`
/// into `dir`, where `class_label` is the 1-based class. Returns both paths.
pub fn export_overlay(base: &Array2<f64>, heat: &Array2<f64>, dir: &Path, stem: &str, class_label: usize) -> Result<(PathBuf, PathBuf)> {
    let pgm = dir.join(format!("{stem}.class{class_label}.heatmap.pgm"));
    let png = dir.join(format!("{stem}.class{class_label}.overlay.png"));
    let overlay = overlay_rgb(base, heat)?;
    write_pgm(&pgm, heat)?;
    write_png(&png, &overlay)?;
    Ok((pgm, png))
}

/// Grayscale image file (PGM, PNG) scaled to `[0, 1]`.
pub fn read_grayscale(path: &Path) -> Result<Array2<f64>> {
    let img = image::open(path)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Image(format!("{}: {other}", path.display())),
        })?
        .into_luma8();
    let (w, h) = img.dimensions();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(i, j)| img.get_pixel(j as u32, i as u32)[0] as f64 / 255.0))
}
