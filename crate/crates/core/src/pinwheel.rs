//! Orientation preference maps built from stacks of coherent-state activity
//! maps, and detection of their ±½ singularities.

use std::f64::consts::{PI, TAU};

use image::{Rgb, RgbImage};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{coherent_state, CoherentStateParams, PhaseSpec};
use crate::error::{ensure, Result};
use crate::se2::normalize_orientation;
use crate::synthesis::{activity_map, synthesize, ActivityMode, GridSpec, RealGrid};

pub const DEFAULT_N_ORIENT: usize = 8;

/// Plaquette circulations further than this from a multiple of `2π` mean the
/// edge differences were wrapped inconsistently.
const WINDING_TOL: f64 = 1e-6;

/// Stimulus orientations `θ_j = offset + jπ/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSampleSet {
    n_orient: usize,
    offset: f64,
}

impl OrientationSampleSet {
    pub fn new(n_orient: usize) -> Result<Self> {
        ensure(n_orient >= 2, "n_orient", || format!("{n_orient} must be at least 2"))?;
        Ok(Self { n_orient, offset: 0.0 })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn len(&self) -> usize {
        self.n_orient
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_orient)
            .map(|j| self.offset + j as f64 * PI / self.n_orient as f64)
            .collect()
    }
}

/// Shared parameters of the states in a stack; the orientation varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateFamily {
    pub omega: f64,
    pub lambda: f64,
    pub phase: PhaseSpec,
    pub m: usize,
}

impl StateFamily {
    pub fn at(&self, theta: f64) -> CoherentStateParams {
        CoherentStateParams::new(self.omega, self.lambda, theta)
            .with_phase(self.phase)
            .with_m(self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityStack {
    pub grid: GridSpec,
    pub angles: Vec<f64>,
    pub maps: Vec<RealGrid>,
}

impl ActivityStack {
    pub fn new(grid: GridSpec, angles: Vec<f64>, maps: Vec<RealGrid>) -> Result<Self> {
        ensure(angles.len() >= 2, "angles", || "need at least two orientations".into())?;
        ensure(angles.len() == maps.len(), "maps", || {
            format!("{} maps for {} angles", maps.len(), angles.len())
        })?;
        ensure(maps.iter().all(|m| m.grid == grid), "maps", || {
            "maps on mismatched grids".into()
        })?;
        Ok(Self { grid, angles, maps })
    }

    /// Synthetic stack `a_j(x) = cos²(θ_j − β(x))`.
    pub fn cos_squared(grid: GridSpec, set: &OrientationSampleSet, beta: impl Fn(f64, f64) -> f64) -> Self {
        let angles = set.angles();
        let maps = angles
            .iter()
            .map(|&t| RealGrid {
                grid,
                values: (0..grid.ny)
                    .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
                    .map(|(i, j)| (t - beta(grid.x1(i), grid.x2(j))).cos().powi(2))
                    .collect(),
            })
            .collect();
        Self { grid, angles, maps }
    }

    /// Relabels the stimulus orientations by `θ_j + delta`, keeping the maps.
    pub fn with_angle_offset(&self, delta: f64) -> Self {
        Self {
            angles: self.angles.iter().map(|a| a + delta).collect(),
            ..self.clone()
        }
    }

    fn responses(&self, idx: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.maps.iter().map(|m| m.values[idx]));
    }
}

/// One synthesized activity map per stimulus orientation, all sharing the
/// family's phase (and thus its seed).
pub fn activity_stack(
    family: &StateFamily,
    set: &OrientationSampleSet,
    grid: &GridSpec,
    mode: ActivityMode,
) -> Result<ActivityStack> {
    grid.check_resolves(family.omega)?;
    let angles = set.angles();
    let maps = angles
        .iter()
        .map(|&theta| {
            let state = coherent_state(&family.at(theta))?;
            Ok(activity_map(&synthesize(family.omega, &state, grid)?, mode))
        })
        .collect::<Result<Vec<_>>>()?;
    ActivityStack::new(*grid, angles, maps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    VectorSum,
    Argmax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationMap {
    pub grid: GridSpec,
    /// Preferred orientation in `[0, π)`.
    pub preferred: Vec<f64>,
    /// Tuning sharpness in `[0, 1]`.
    pub selectivity: Vec<f64>,
    /// Unnormalized tuning strength in activity units: `|Σ_j w_j e^{2iθ_j}|`
    /// for the vector sum, `max − min` for argmax.
    pub magnitude: Vec<f64>,
}

impl OrientationMap {
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let (preferred, selectivity): (Vec<f64>, Vec<f64>) = (0..grid.ny)
            .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                let (p, s) = f(grid.x1(i), grid.x2(j));
                (normalize_orientation(p), s.clamp(0.0, 1.0))
            })
            .unzip();
        Self {
            grid,
            magnitude: selectivity.clone(),
            preferred,
            selectivity,
        }
    }

    pub fn preferred_at(&self, i: usize, j: usize) -> f64 {
        self.preferred[self.grid.index(i, j)]
    }

    /// Orientation histogram with `n_bins` equal bins over `[0, π)`.
    pub fn histogram(&self, n_bins: usize) -> Vec<usize> {
        let mut counts = vec![0; n_bins];
        for &p in &self.preferred {
            let b = ((p / PI) * n_bins as f64) as usize;
            counts[b.min(n_bins - 1)] += 1;
        }
        counts
    }
}

fn per_pixel<T: Send>(stack: &ActivityStack, f: impl Fn(&[f64]) -> T + Sync) -> Vec<T> {
    (0..stack.grid.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, idx| {
            stack.responses(idx, buf);
            f(buf)
        })
        .collect()
}

/// Vector averaging: `z = Σ_j w_j e^{2iθ_j}` with `w_j = a_j − min_k a_k`,
/// preferred `= ½ arg z`, selectivity `= |z| / Σ_j w_j`.
pub fn vector_sum_orientation(stack: &ActivityStack) -> OrientationMap {
    let phasors: Vec<Complex64> = stack
        .angles
        .iter()
        .map(|t| Complex64::from_polar(1.0, 2.0 * t))
        .collect();
    let pixels = per_pixel(stack, |a| {
        let floor = a.iter().copied().fold(f64::INFINITY, f64::min);
        let mut z = Complex64::new(0.0, 0.0);
        let mut total = 0.0;
        for (v, e) in a.iter().zip(&phasors) {
            let w = v - floor;
            z += e * w;
            total += w;
        }
        let mag = z.norm();
        let preferred = if mag > 0.0 {
            normalize_orientation(0.5 * z.arg())
        } else {
            0.0
        };
        let selectivity = if total > 0.0 {
            (mag / total).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (preferred, selectivity, mag)
    });
    collect_map(stack.grid, pixels)
}

/// Winner-take-all estimator; ties resolve toward the smaller index.
pub fn argmax_orientation(stack: &ActivityStack) -> OrientationMap {
    let pixels = per_pixel(stack, |a| {
        let mut best = 0;
        for (j, v) in a.iter().enumerate() {
            if *v > a[best] {
                best = j;
            }
        }
        let mut sorted = a.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let range = hi - lo;
        let selectivity = if range > 0.0 {
            ((hi - median) / range).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (normalize_orientation(stack.angles[best]), selectivity, range)
    });
    collect_map(stack.grid, pixels)
}

pub fn estimate_orientation(stack: &ActivityStack, estimator: Estimator) -> OrientationMap {
    match estimator {
        Estimator::VectorSum => vector_sum_orientation(stack),
        Estimator::Argmax => argmax_orientation(stack),
    }
}

fn collect_map(grid: GridSpec, pixels: Vec<(f64, f64, f64)>) -> OrientationMap {
    let mut preferred = Vec::with_capacity(pixels.len());
    let mut selectivity = Vec::with_capacity(pixels.len());
    let mut magnitude = Vec::with_capacity(pixels.len());
    for (p, s, m) in pixels {
        preferred.push(p);
        selectivity.push(s);
        magnitude.push(m);
    }
    OrientationMap {
        grid,
        preferred,
        selectivity,
        magnitude,
    }
}

/// Wraps an angle difference to `(−π, π]`.
pub fn wrap_angle(d: f64) -> f64 {
    d - TAU * ((d - PI) / TAU).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pinwheel {
    /// Plaquette centre.
    pub x: f64,
    pub y: f64,
    /// ±½.
    pub charge: f64,
    #[serde(skip)]
    pub i: usize,
    #[serde(skip)]
    pub j: usize,
}

/// Wrapped steps of the doubled angle along every grid edge.
///
/// Each edge is wrapped once, in the `+x1` or `+x2` direction, and traversed
/// backwards by negation; that keeps plaquette sums telescoping exactly.
struct EdgeSteps {
    nx: usize,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
}

impl EdgeSteps {
    fn new(omap: &OrientationMap) -> Self {
        let g = omap.grid;
        let d = |i, j| 2.0 * omap.preferred_at(i, j);
        let mut horizontal = vec![0.0; g.len()];
        let mut vertical = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                if i + 1 < g.nx {
                    horizontal[g.index(i, j)] = wrap_angle(d(i + 1, j) - d(i, j));
                }
                if j + 1 < g.ny {
                    vertical[g.index(i, j)] = wrap_angle(d(i, j + 1) - d(i, j));
                }
            }
        }
        Self {
            nx: g.nx,
            horizontal,
            vertical,
        }
    }

    fn h(&self, i: usize, j: usize) -> f64 {
        self.horizontal[j * self.nx + i]
    }

    fn v(&self, i: usize, j: usize) -> f64 {
        self.vertical[j * self.nx + i]
    }

    /// Counter-clockwise circulation of the plaquette with lower-left node `(i, j)`.
    fn circulation(&self, i: usize, j: usize) -> f64 {
        self.h(i, j) + self.v(i + 1, j) - self.h(i, j + 1) - self.v(i, j)
    }
}

fn quantize(circulation: f64) -> i64 {
    let w = (circulation / TAU).round();
    assert!(
        (circulation - TAU * w).abs() < WINDING_TOL,
        "plaquette circulation {circulation} is not a multiple of 2π"
    );
    w as i64
}

/// Winding of the doubled orientation around every 2×2 plaquette; nonzero
/// plaquettes are pinwheels with charge `±½`, listed row-major.
pub fn detect_pinwheels(omap: &OrientationMap) -> Vec<Pinwheel> {
    let g = omap.grid;
    let edges = EdgeSteps::new(omap);
    let (hx, hy) = (0.5 * g.pitch_x(), 0.5 * g.pitch_y());
    (0..g.ny.saturating_sub(1))
        .into_par_iter()
        .flat_map_iter(|j| {
            let edges = &edges;
            (0..g.nx - 1)
                .filter_map(move |i| {
                    let w = quantize(edges.circulation(i, j));
                    assert!(w.abs() <= 1, "plaquette ({i}, {j}) has winding {w}");
                    (w != 0).then(|| Pinwheel {
                        x: g.x1(i) + hx,
                        y: g.x2(j) + hy,
                        charge: 0.5 * w as f64,
                        i,
                        j,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Winding number of the doubled orientation around the outer boundary,
/// counter-clockwise, in units of `2π`.
pub fn boundary_winding(omap: &OrientationMap) -> i64 {
    let g = omap.grid;
    let edges = EdgeSteps::new(omap);
    let mut total = 0.0;
    for i in 0..g.nx - 1 {
        total += edges.h(i, 0);
    }
    for j in 0..g.ny - 1 {
        total += edges.v(g.nx - 1, j);
    }
    for i in (0..g.nx - 1).rev() {
        total -= edges.h(i, g.ny - 1);
    }
    for j in (0..g.ny - 1).rev() {
        total -= edges.v(0, j);
    }
    quantize(total)
}

/// Sum of charges, returned as twice its value so it compares exactly with
/// [`boundary_winding`].
pub fn net_winding(pinwheels: &[Pinwheel]) -> i64 {
    pinwheels.iter().map(|p| (2.0 * p.charge).round() as i64).sum()
}

fn quantize_channel(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn hsv_to_rgb(hue: f64, sat: f64, val: f64) -> [f64; 3] {
    let h = (hue.rem_euclid(TAU) / TAU) * 6.0;
    let sector = h.floor();
    let f = h - sector;
    let p = val * (1.0 - sat);
    let q = val * (1.0 - sat * f);
    let t = val * (1.0 - sat * (1.0 - f));
    match sector as i64 % 6 {
        0 => [val, t, p],
        1 => [q, val, p],
        2 => [p, val, t],
        3 => [p, q, val],
        4 => [t, p, val],
        _ => [val, p, q],
    }
}

/// Colour-coded map: hue `= 2·preferred`, saturation = selectivity, value 1.
/// Image row 0 is the top of the plane (largest `x2`).
pub fn render_pinwheel_image(omap: &OrientationMap) -> RgbImage {
    let g = omap.grid;
    RgbImage::from_fn(g.nx as u32, g.ny as u32, |x, y| {
        let idx = g.index(x as usize, g.ny - 1 - y as usize);
        let rgb = hsv_to_rgb(2.0 * omap.preferred[idx], omap.selectivity[idx], 1.0);
        Rgb([
            quantize_channel(rgb[0]),
            quantize_channel(rgb[1]),
            quantize_channel(rgb[2]),
        ])
    })
}
