use std::fmt::Write as _;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use image::{GrayImage, ImageFormat, Luma, Rgb, RgbImage};
use pinwheel_core::synthesis::{GridSpec, RealGrid};
use sha2::{Digest, Sha256};

/// Collects written paths in creation order.
#[derive(Debug, Default)]
pub struct OutputDir {
    root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Comma-separated rows under a header; floats use the shortest
/// round-trip representation.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{f}");
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Affine map of `[lo, hi]` onto 0..=255; a constant map becomes mid-grey.
pub fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    if hi > lo {
        (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8
    } else {
        128
    }
}

/// Grey image of a grid map with row 0 at the largest `x2`.
pub fn gray_image(map: &RealGrid, lo: f64, hi: f64) -> GrayImage {
    let g = map.grid;
    GrayImage::from_fn(g.nx as u32, g.ny as u32, |x, y| {
        Luma([quantize(map.at(x as usize, g.ny - 1 - y as usize), lo, hi)])
    })
}

pub fn pgm_bytes(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn png_bytes_gray(img: &GrayImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

pub fn png_bytes_rgb(img: &RgbImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

/// Polar plot of `r(φ)` with the doubled angle `2φ` on the image, so the
/// π-periodic function closes on itself.
pub fn polar_plot(radii: &[f64], size: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(size, size, Rgb([255, 255, 255]));
    let c = size as f64 / 2.0;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let scale = if r_max > 0.0 { 0.9 * c / r_max } else { 0.0 };
    for t in 0..size {
        img.put_pixel(t, size / 2, Rgb([200, 200, 200]));
        img.put_pixel(size / 2, t, Rgb([200, 200, 200]));
    }
    let m = radii.len();
    let steps = 8 * m;
    for s in 0..steps {
        let pos = s as f64 * m as f64 / steps as f64;
        let (j, f) = (pos.floor() as usize, pos.fract());
        let r = radii[j] * (1.0 - f) + radii[(j + 1) % m] * f;
        let angle = 2.0 * std::f64::consts::PI * s as f64 / steps as f64;
        let x = c + scale * r * angle.cos();
        let y = c - scale * r * angle.sin();
        let (px, py) = (x.round() as i64, y.round() as i64);
        if (0..size as i64).contains(&px) && (0..size as i64).contains(&py) {
            img.put_pixel(px as u32, py as u32, Rgb([20, 60, 200]));
        }
    }
    img
}

/// Log-scaled power image, DC at the centre, `k2` up.
pub fn log_power_image(nx: usize, ny: usize, values: &[f64]) -> GrayImage {
    let logs: Vec<f64> = values.iter().map(|p| (p + f64::MIN_POSITIVE).log10()).collect();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Eight decades of dynamic range.
    let lo = hi - 8.0;
    GrayImage::from_fn(nx as u32, ny as u32, |x, y| {
        Luma([quantize(logs[(ny - 1 - y as usize) * nx + x as usize], lo, hi)])
    })
}

pub fn grid_point_rows(grid: &GridSpec) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..grid.ny).flat_map(move |j| (0..grid.nx).map(move |i| (i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_orientation() {
        let grid = GridSpec::new(8, 8, 1.0).unwrap();
        let map = RealGrid {
            grid,
            values: (0..64).map(|i| (i / 8) as f64).collect(),
        };
        let img = gray_image(&map, 0.0, 7.0);
        // Top row is the largest x2.
        assert_eq!(img.get_pixel(0, 0).0, [255]);
        assert_eq!(img.get_pixel(0, 7).0, [0]);
        let bytes = pgm_bytes(&img);
        assert!(bytes.starts_with(b"P5\n8 8\n255\n"));
        assert_eq!(bytes.len(), 11 + 64);
    }

    #[test]
    fn quantize_edges() {
        assert_eq!(quantize(0.0, 0.0, 1.0), 0);
        assert_eq!(quantize(1.0, 0.0, 1.0), 255);
        assert_eq!(quantize(0.5, 0.0, 1.0), 128);
        assert_eq!(quantize(3.0, 2.0, 2.0), 128);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[&1.5, &"x"]);
        assert_eq!(String::from_utf8(c.into_bytes()).unwrap(), "a,b\n1.5,x\n");
    }
}
