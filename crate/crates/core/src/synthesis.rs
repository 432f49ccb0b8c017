//! Anti-transform of circle-supported Fourier data into planar fields.
//!
//! A function `f` on the circle of radius `Ω` becomes
//! `u(x) = ∫_0^π f(φ) e^{iΩ n(φ)·x} dφ` with `n(φ) = (−sin 2φ, cos 2φ)`,
//! evaluated by the same periodic trapezoid rule as the angular module.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::CircleFunction;
use crate::error::{ensure, Error, Result};
use crate::se2::PlanarPoint;

pub const MIN_GRID_NODES: usize = 8;
pub const DEFAULT_GRID_NODES: usize = 256;
/// Minimum pixels per wavelength `2π/Ω`.
pub const MIN_PIXELS_PER_WAVELENGTH: f64 = 4.0;

/// Square-extent grid over `[−L, L)²` with `nx × ny` nodes.
///
/// Node `i` sits at `−L + i·2L/n`, so an even node count puts a node on the
/// origin and the grid is closed under the FFT's periodic wrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, half_width: f64) -> Result<Self> {
        let g = Self { nx, ny, half_width };
        g.validate()?;
        Ok(g)
    }

    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, n, half_width)
    }

    /// 256² nodes over eight correlation lengths per half-width (`L = 8π/Ω`).
    pub fn default_for(omega: f64) -> Self {
        Self {
            nx: DEFAULT_GRID_NODES,
            ny: DEFAULT_GRID_NODES,
            half_width: 8.0 * PI / omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.nx >= MIN_GRID_NODES && self.ny >= MIN_GRID_NODES, "grid", || {
            format!("{}x{} nodes, need at least {MIN_GRID_NODES} per axis", self.nx, self.ny)
        })?;
        ensure(
            self.half_width > 0.0 && self.half_width.is_finite(),
            "half_width",
            || format!("{} must be positive", self.half_width),
        )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pitch_x(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn pitch_y(&self) -> f64 {
        2.0 * self.half_width / self.ny as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.pitch_x()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.pitch_y()
    }

    pub fn point(&self, i: usize, j: usize) -> PlanarPoint {
        PlanarPoint::new(self.x1(i), self.x2(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Checks that both pitches give at least four pixels per wavelength `2π/Ω`.
    pub fn check_resolves(&self, omega: f64) -> Result<()> {
        self.validate()?;
        let required = 2.0 * PI / omega / MIN_PIXELS_PER_WAVELENGTH;
        let pitch = self.pitch_x().max(self.pitch_y());
        if pitch > required * (1.0 + 1e-12) {
            return Err(Error::UnderResolvedGrid { pitch, required });
        }
        Ok(())
    }
}

/// Complex samples on a [`GridSpec`], row-major with rows along `x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        ensure(values.len() == grid.len(), "values", || {
            format!("{} samples for a {}x{} grid", values.len(), grid.nx, grid.ny)
        })?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(PlanarPoint) -> Complex64 + Sync) -> Self {
        let values = (0..grid.ny)
            .into_par_iter()
            .flat_map_iter(|j| (0..grid.nx).map(move |i| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| f(grid.point(i, j)))
            .collect();
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn linear_combination(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<Self> {
        ensure(self.grid == other.grid, "grid", || {
            "fields live on different grids".into()
        })?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Real samples on a [`GridSpec`], same layout as [`ComplexField`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Evaluates the anti-transform at one point.
pub fn evaluate_at(omega: f64, f: &CircleFunction, x: PlanarPoint) -> Complex64 {
    let sum: Complex64 = f
        .samples()
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let (s, co) = (2.0 * f.phi(j)).sin_cos();
            c * Complex64::from_polar(1.0, omega * (-x.x1 * s + x.x2 * co))
        })
        .sum();
    sum * f.spacing()
}

/// `u(x1, x2) = (π/M) Σ_j f_j exp[iΩ(−x1 sin 2φ_j + x2 cos 2φ_j)]` on every node.
pub fn synthesize(omega: f64, f: &CircleFunction, grid: &GridSpec) -> Result<ComplexField> {
    ensure(omega > 0.0 && omega.is_finite(), "omega", || {
        format!("{omega} must be positive")
    })?;
    grid.check_resolves(omega)?;
    Ok(synthesize_unchecked(omega, f, grid))
}

fn synthesize_unchecked(omega: f64, f: &CircleFunction, grid: &GridSpec) -> ComplexField {
    let m = f.len();
    let (sin2, cos2): (Vec<f64>, Vec<f64>) = (0..m).map(|j| (2.0 * f.phi(j)).sin_cos()).unzip();
    // The exponential factorizes into an x1 part and an x2 part; the sum over
    // circle nodes always runs in ascending order.
    let column_phase: Vec<Complex64> = (0..grid.nx)
        .flat_map(|i| {
            let x1 = grid.x1(i);
            sin2.iter().map(move |s| Complex64::from_polar(1.0, -omega * x1 * s))
        })
        .collect();
    let weight = f.spacing();
    let rows: Vec<Vec<Complex64>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let x2 = grid.x2(j);
            let row_coeffs: Vec<Complex64> = f
                .samples()
                .iter()
                .zip(&cos2)
                .map(|(c, co)| c * Complex64::from_polar(1.0, omega * x2 * co))
                .collect();
            (0..grid.nx)
                .map(|i| {
                    let col = &column_phase[i * m..(i + 1) * m];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, b) in col.iter().zip(&row_coeffs) {
                        acc += a * b;
                    }
                    acc * weight
                })
                .collect()
        })
        .collect();
    ComplexField {
        grid: *grid,
        values: rows.into_iter().flatten().collect(),
    }
}

/// `e^{iΩ(−x1 sin 2θ + x2 cos 2θ)}`, the `λ → ∞` limit.
pub fn plane_wave_limit(omega: f64, theta: f64, grid: &GridSpec) -> ComplexField {
    let (s, c) = (2.0 * theta).sin_cos();
    ComplexField::from_fn(*grid, |p| Complex64::from_polar(1.0, omega * (-p.x1 * s + p.x2 * c)))
}

/// `∫_0^π e^{iΩ r cos 2(φ−θ)} dφ = π J0(Ωr)`, the `λ → 0` limit, by the
/// synthesis quadrature with `f ≡ 1` on `m` nodes.
pub fn bessel_limit(omega: f64, grid: &GridSpec, m: usize) -> Result<ComplexField> {
    let ones = CircleFunction::constant(m, Complex64::new(1.0, 0.0))?;
    Ok(synthesize_unchecked(omega, &ones, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityMode {
    #[default]
    RealPart,
    Modulus,
    Phase,
}

pub fn activity_map(field: &ComplexField, mode: ActivityMode) -> RealGrid {
    let values = field
        .values
        .iter()
        .map(|z| match mode {
            ActivityMode::RealPart => z.re,
            ActivityMode::Modulus => z.norm(),
            ActivityMode::Phase => z.arg(),
        })
        .collect();
    RealGrid {
        grid: field.grid,
        values,
    }
}

/// Pearson correlation coefficient of two equally long samples.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
