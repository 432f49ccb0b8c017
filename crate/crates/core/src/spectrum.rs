//! Radial power spectra of planar fields and the concentration of power on
//! the annulus `|k| ≈ Ω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::pinwheel::OrientationMap;
use crate::synthesis::{ComplexField, GridSpec};

pub const MIN_RADIAL_BINS: usize = 4;

/// Which per-pixel amplitude multiplies `e^{2i·preferred}` in the order field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderWeighting {
    /// Normalized selectivity in `[0, 1]`.
    #[default]
    Selectivity,
    /// Raw tuning strength; for the vector sum this is exactly `Σ_j w_j e^{2iθ_j}`.
    Magnitude,
}

pub fn complex_order_field(omap: &OrientationMap, weighting: OrderWeighting) -> ComplexField {
    let amplitude = match weighting {
        OrderWeighting::Selectivity => &omap.selectivity,
        OrderWeighting::Magnitude => &omap.magnitude,
    };
    let values = omap
        .preferred
        .iter()
        .zip(amplitude)
        .map(|(p, a)| Complex64::from_polar(*a, 2.0 * p))
        .collect();
    ComplexField {
        grid: omap.grid,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    None,
    /// Separable periodic Hann taper.
    Hann,
}

fn taper(n: usize, window: Window) -> Vec<f64> {
    match window {
        Window::None => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
            .collect(),
    }
}

/// In-place unnormalized 2D DFT of a row-major `nx × ny` buffer.
fn fft2(data: &mut [Complex64], nx: usize, ny: usize) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(nx);
    data.par_chunks_mut(nx).for_each(|row| row_fft.process(row));

    let col_fft = planner.plan_fft_forward(ny);
    let mut transposed = vec![Complex64::new(0.0, 0.0); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            transposed[i * ny + j] = data[j * nx + i];
        }
    }
    transposed.par_chunks_mut(ny).for_each(|col| col_fft.process(col));
    for i in 0..nx {
        for j in 0..ny {
            data[j * nx + i] = transposed[i * ny + j];
        }
    }
}

/// Signed DFT index in `[−n/2, n/2)`.
fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `|F(k)|² / N` for every mode, in DFT order. With no window the total
/// equals `Σ|u|²`.
fn mode_power(field: &ComplexField, window: Window) -> Vec<f64> {
    let g = field.grid;
    let (wx, wy) = (taper(g.nx, window), taper(g.ny, window));
    let mut data: Vec<Complex64> = field
        .values
        .iter()
        .enumerate()
        .map(|(idx, z)| z * (wx[idx % g.nx] * wy[idx / g.nx]))
        .collect();
    fft2(&mut data, g.nx, g.ny);
    let n = g.len() as f64;
    data.iter().map(|z| z.norm_sqr() / n).collect()
}

/// Angular wavenumber spacing `π/L` of the DFT modes on a `2L`-wide grid.
pub fn fundamental_wavenumber(grid: &GridSpec) -> f64 {
    PI / grid.half_width
}

fn max_wavenumber(grid: &GridSpec) -> f64 {
    let (hx, hy) = ((grid.nx / 2) as f64, (grid.ny / 2) as f64);
    fundamental_wavenumber(grid) * (hx * hx + hy * hy).sqrt()
}

/// Bins of width `π/L` covering every mode.
pub fn natural_bin_count(grid: &GridSpec) -> usize {
    (max_wavenumber(grid) / fundamental_wavenumber(grid)).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    /// `n_bins + 1` uniform edges starting at 0, in angular wavenumber units.
    pub bin_edges: Vec<f64>,
    /// Power per bin, DC excluded.
    pub power: Vec<f64>,
    pub dc: f64,
    /// Largest non-DC bin; ties go to the lower bin.
    pub peak_bin: usize,
}

impl RadialSpectrum {
    pub fn n_bins(&self) -> usize {
        self.power.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        0.5 * (self.bin_edges[b] + self.bin_edges[b + 1])
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|b| self.bin_center(b)).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.dc + self.power.iter().sum::<f64>()
    }
}

/// Radially binned `|F(k)|²/N`. `n_bins = None` uses [`natural_bin_count`]
/// with bins exactly `π/L` wide.
pub fn radial_power_spectrum(field: &ComplexField, n_bins: Option<usize>, window: Window) -> Result<RadialSpectrum> {
    let g = field.grid;
    let k0 = fundamental_wavenumber(&g);
    let (n_bins, width) = match n_bins {
        None => (natural_bin_count(&g), k0),
        Some(n) => {
            ensure(n >= MIN_RADIAL_BINS, "n_bins", || {
                format!("{n} is below {MIN_RADIAL_BINS}")
            })?;
            (n, max_wavenumber(&g) / n as f64)
        }
    };
    // Radius in units of the bin width; exactly the integer mode radius for
    // natural binning, so modes on a bin edge land deterministically.
    let scale = k0 / width;
    let power = mode_power(field, window);
    let mut bins = vec![0.0; n_bins];
    let mut dc = 0.0;
    // Fixed accumulation order: row-major over DFT indices.
    for (idx, p) in power.iter().enumerate() {
        let m1 = signed_index(idx % g.nx, g.nx);
        let m2 = signed_index(idx / g.nx, g.ny);
        if m1 == 0 && m2 == 0 {
            dc += p;
            continue;
        }
        let r = ((m1 * m1 + m2 * m2) as f64).sqrt() * scale;
        let b = (r.floor() as usize).min(n_bins - 1);
        bins[b] += p;
    }
    let mut peak_bin = 0;
    for (b, p) in bins.iter().enumerate() {
        if *p > bins[peak_bin] {
            peak_bin = b;
        }
    }
    Ok(RadialSpectrum {
        bin_edges: (0..=n_bins).map(|b| b as f64 * width).collect(),
        power: bins,
        dc,
        peak_bin,
    })
}

/// `|F(k)|²/N` arranged with zero frequency at index `(nx/2, ny/2)`; row `j`
/// holds `k2 = (j − ny/2)·π/L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid {
    pub nx: usize,
    pub ny: usize,
    pub k_step: f64,
    pub values: Vec<f64>,
}

impl PowerGrid {
    pub fn at(&self, m1: i64, m2: i64) -> f64 {
        let i = (m1 + (self.nx / 2) as i64) as usize;
        let j = (m2 + (self.ny / 2) as i64) as usize;
        self.values[j * self.nx + i]
    }

    /// Signed mode indices of the largest entry, DC excluded.
    pub fn peak_mode(&self) -> (i64, i64) {
        let (cx, cy) = ((self.nx / 2) as i64, (self.ny / 2) as i64);
        let mut best = (0, 0);
        let mut best_power = f64::NEG_INFINITY;
        for (idx, p) in self.values.iter().enumerate() {
            let m = ((idx % self.nx) as i64 - cx, (idx / self.nx) as i64 - cy);
            if m != (0, 0) && *p > best_power {
                best_power = *p;
                best = m;
            }
        }
        best
    }
}

pub fn power_grid(field: &ComplexField, window: Window) -> PowerGrid {
    let g = field.grid;
    let power = mode_power(field, window);
    let mut values = vec![0.0; g.len()];
    for (idx, p) in power.into_iter().enumerate() {
        let i = (idx % g.nx + g.nx / 2) % g.nx;
        let j = (idx / g.nx + g.ny / 2) % g.ny;
        values[j * g.nx + i] = p;
    }
    PowerGrid {
        nx: g.nx,
        ny: g.ny,
        k_step: fundamental_wavenumber(&g),
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusMetrics {
    pub peak_radius: f64,
    /// Share of non-DC power in bins centred within `Ω[1−ε, 1+ε]`.
    pub fraction_in_annulus: f64,
}

pub fn annulus_metrics(spec: &RadialSpectrum, omega: f64, epsilon: f64) -> Result<AnnulusMetrics> {
    ensure(epsilon > 0.0 && epsilon < 1.0, "epsilon", || {
        format!("{epsilon} must lie in (0, 1)")
    })?;
    ensure(omega > 0.0 && omega.is_finite(), "omega", || {
        format!("{omega} must be positive")
    })?;
    let total: f64 = spec.power.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let (lo, hi) = (omega * (1.0 - epsilon), omega * (1.0 + epsilon));
    let inside: f64 = spec
        .power
        .iter()
        .enumerate()
        .filter(|(b, _)| (lo..=hi).contains(&spec.bin_center(*b)))
        .map(|(_, p)| p)
        .sum();
    Ok(AnnulusMetrics {
        peak_radius: spec.bin_center(spec.peak_bin),
        fraction_in_annulus: inside / total,
    })
}
