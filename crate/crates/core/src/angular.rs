//! Functions on the reduced Fourier circle and the operators acting on them.
//!
//! A [`CircleFunction`] samples a π-periodic complex function at the nodes
//! `φ_j = jπ/M`. Angular position `X̂1 = −Ω sin 2φ` and its commutator
//! `X̂3 = Ω cos 2φ` act pointwise; angular momentum `X̂2 = i ∂_φ` acts
//! spectrally on the modes `e^{2ikφ}`. Integrals use the periodic trapezoid
//! rule, which is spectrally accurate for these integrands.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure, Error, Result};

pub const MIN_CIRCLE_NODES: usize = 8;
pub const DEFAULT_CIRCLE_NODES: usize = 256;

/// Variance round-off below which a negative value is clamped to zero.
const VARIANCE_ROUNDOFF: f64 = 1e-12;
/// Largest relative imaginary part tolerated in a self-adjoint expectation.
const HERMITIAN_TOL: f64 = 1e-9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_pair(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(m), p.plan_fft_inverse(m))
    })
}

/// Signed mode number of FFT bin `idx` for an `m`-point transform.
pub(crate) fn signed_mode(idx: usize, m: usize) -> i64 {
    if idx < m / 2 {
        idx as i64
    } else {
        idx as i64 - m as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    samples: Vec<Complex64>,
}

impl CircleFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        ensure(samples.len() >= MIN_CIRCLE_NODES, "m", || {
            format!("{} nodes, need at least {MIN_CIRCLE_NODES}", samples.len())
        })?;
        Ok(Self { samples })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new((0..m).map(|j| f(node(j, m))).collect())
    }

    pub fn constant(m: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    /// Random trigonometric polynomial `Σ_{|k|≤band} c_k e^{2ikφ}` with
    /// real and imaginary parts of `c_k` uniform on `[−1, 1]`.
    pub fn random_band_limited<R: Rng + ?Sized>(m: usize, band: usize, rng: &mut R) -> Result<Self> {
        ensure(m >= MIN_CIRCLE_NODES && m.is_multiple_of(2), "m", || {
            format!("{m} must be even and >= 8")
        })?;
        ensure(band + 2 <= m / 2, "band", || format!("{band} exceeds m/2 - 2"))?;
        let mut spec = vec![Complex64::new(0.0, 0.0); m];
        for k in -(band as i64)..=(band as i64) {
            let idx = k.rem_euclid(m as i64) as usize;
            spec[idx] = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        }
        let (_, inv) = fft_pair(m);
        inv.process(&mut spec);
        Self::new(spec)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn phi(&self, j: usize) -> f64 {
        node(j, self.len())
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.phi(j))
    }

    /// Grid spacing `π/M`; also the trapezoid weight.
    pub fn spacing(&self) -> f64 {
        PI / self.len() as f64
    }

    pub fn norm_sq(&self) -> f64 {
        self.spacing() * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, z| z * c)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let m = self.len();
        Self {
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(j, &z)| f(node(j, m), z))
                .collect(),
        }
    }

    pub fn add(&self, other: &CircleFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CircleFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CircleFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_lengths(self, other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    /// Discrete Fourier coefficients `c_k` such that `f_j = Σ_k c_k e^{2ikφ_j}`,
    /// in FFT order.
    pub fn modes(&self) -> Vec<Complex64> {
        let m = self.len();
        let (fwd, _) = fft_pair(m);
        let mut buf = self.samples.clone();
        fwd.process(&mut buf);
        let inv_m = 1.0 / m as f64;
        buf.iter_mut().for_each(|z| *z *= inv_m);
        buf
    }

    /// Fraction of the spectral energy in the unpaired Nyquist mode.
    pub fn top_mode_fraction(&self) -> f64 {
        let modes = self.modes();
        let total: f64 = modes.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        modes[self.len() / 2].norm_sqr() / total
    }

    /// Largest absolute difference between samples.
    pub fn max_abs_diff(&self, other: &CircleFunction) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `φ_j = jπ/M`.
pub fn node(j: usize, m: usize) -> f64 {
    j as f64 * PI / m as f64
}

fn check_lengths(f: &CircleFunction, g: &CircleFunction) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    Ok(())
}

/// Radius `Ω` of the Fourier circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorContext {
    omega: f64,
}

impl OperatorContext {
    pub fn new(omega: f64) -> Result<Self> {
        ensure(omega > 0.0 && omega.is_finite(), "omega", || {
            format!("{omega} must be positive")
        })?;
        Ok(Self { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Angular position `−Ω sin 2φ`.
    X1,
    /// Angular momentum `i ∂_φ`.
    X2,
    /// Commutator `Ω cos 2φ`.
    X3,
}

pub fn apply_x1(ctx: &OperatorContext, f: &CircleFunction) -> CircleFunction {
    let omega = ctx.omega;
    f.map(|phi, z| z * (-omega * (2.0 * phi).sin()))
}

/// Spectral `i ∂_φ`: mode `e^{2ikφ}` is multiplied by `−2k`.
pub fn apply_x2(f: &CircleFunction) -> Result<CircleFunction> {
    let m = f.len();
    if !m.is_multiple_of(2) {
        return Err(Error::OddGridSize(m));
    }
    debug_assert!(
        f.top_mode_fraction() < 1e-8,
        "circle function is under-resolved: Nyquist energy fraction {:e}",
        f.top_mode_fraction()
    );
    let (fwd, inv) = fft_pair(m);
    let mut buf = f.samples.clone();
    fwd.process(&mut buf);
    let inv_m = 1.0 / m as f64;
    for (idx, z) in buf.iter_mut().enumerate() {
        *z *= -2.0 * signed_mode(idx, m) as f64 * inv_m;
    }
    inv.process(&mut buf);
    Ok(CircleFunction { samples: buf })
}

pub fn apply_x3(ctx: &OperatorContext, f: &CircleFunction) -> CircleFunction {
    let omega = ctx.omega;
    f.map(|phi, z| z * (omega * (2.0 * phi).cos()))
}

pub fn apply(op: Observable, ctx: &OperatorContext, f: &CircleFunction) -> Result<CircleFunction> {
    match op {
        Observable::X1 => Ok(apply_x1(ctx, f)),
        Observable::X2 => apply_x2(f),
        Observable::X3 => Ok(apply_x3(ctx, f)),
    }
}

/// `(i/2)(X̂2 X̂1 − X̂1 X̂2) f`, which equals `X̂3 f` on resolved states.
pub fn commutator(ctx: &OperatorContext, f: &CircleFunction) -> Result<CircleFunction> {
    let a = apply_x2(&apply_x1(ctx, f))?;
    let b = apply_x1(ctx, &apply_x2(f)?);
    Ok(a.sub(&b)?.scale(Complex64::new(0.0, 0.5)))
}

/// `(π/M) Σ conj(f_j) g_j`.
pub fn inner(f: &CircleFunction, g: &CircleFunction) -> Result<Complex64> {
    check_lengths(f, g)?;
    let sum: Complex64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a.conj() * b).sum();
    Ok(sum * f.spacing())
}

struct Moments {
    mean: f64,
    second: f64,
}

fn moments(op: Observable, ctx: &OperatorContext, f: &CircleFunction) -> Result<Moments> {
    let norm_sq = f.norm_sq();
    if norm_sq == 0.0 || !norm_sq.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let g = apply(op, ctx, f)?;
    let pairing = inner(f, &g)?;
    let g_norm_sq = g.norm_sq();
    // |Im⟨f, Op f⟩| is compared against the Cauchy-Schwarz scale ‖f‖‖Op f‖.
    let scale = (norm_sq * g_norm_sq).sqrt();
    if scale > 0.0 && pairing.im.abs() > HERMITIAN_TOL * scale {
        return Err(Error::NotSelfAdjoint(pairing.im / scale));
    }
    Ok(Moments {
        mean: pairing.re / norm_sq,
        // ⟨Op²⟩ = ‖Op f‖² / ‖f‖² for self-adjoint Op.
        second: g_norm_sq / norm_sq,
    })
}

pub fn expectation(op: Observable, ctx: &OperatorContext, f: &CircleFunction) -> Result<f64> {
    moments(op, ctx, f).map(|m| m.mean)
}

pub fn variance(op: Observable, ctx: &OperatorContext, f: &CircleFunction) -> Result<f64> {
    let m = moments(op, ctx, f)?;
    let var = m.second - m.mean * m.mean;
    if var >= 0.0 {
        Ok(var)
    } else if var > -VARIANCE_ROUNDOFF * m.second.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(var))
    }
}

pub fn std_dev(op: Observable, ctx: &OperatorContext, f: &CircleFunction) -> Result<f64> {
    variance(op, ctx, f).map(f64::sqrt)
}

/// Both sides of the angular uncertainty relation for one state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UncertaintyReport {
    pub delta_x1: f64,
    pub delta_x2: f64,
    pub mean_x3: f64,
    /// `½|⟨X̂3⟩|`, the bound with the normalization printed next to `X̂3`.
    pub half_abs_mean_x3: f64,
    /// `½|⟨[X̂1, X̂2]⟩| = |⟨X̂3⟩|`, the sharp lower bound.
    pub bound: f64,
    /// `ΔX̂1 · ΔX̂2 − bound`; zero for minimal-uncertainty states.
    pub gap: f64,
}

pub fn uncertainty_report(ctx: &OperatorContext, f: &CircleFunction) -> Result<UncertaintyReport> {
    let delta_x1 = std_dev(Observable::X1, ctx, f)?;
    let delta_x2 = std_dev(Observable::X2, ctx, f)?;
    let mean_x3 = expectation(Observable::X3, ctx, f)?;
    let bound = mean_x3.abs();
    Ok(UncertaintyReport {
        delta_x1,
        delta_x2,
        mean_x3,
        half_abs_mean_x3: 0.5 * bound,
        bound,
        gap: delta_x1 * delta_x2 - bound,
    })
}

/// `ΔX̂1 ΔX̂2 − ½|⟨[X̂1, X̂2]⟩|`, never below round-off for any state.
pub fn uncertainty_gap(ctx: &OperatorContext, f: &CircleFunction) -> Result<f64> {
    uncertainty_report(ctx, f).map(|r| r.gap)
}
