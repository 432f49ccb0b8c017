//! Minimal-uncertainty states on the Fourier circle.
//!
//! The ground state solves `X̂2 u = 2iλ X̂1 u`, giving `u(φ) = e^{λΩ cos 2φ}`.
//! Displacing it by `θ` and multiplying by a local phase `e^{iα(φ)}` gives the
//! covariant coherent states that seed the activity maps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{
    apply_x1, apply_x2, expectation, std_dev, CircleFunction, Observable, OperatorContext, DEFAULT_CIRCLE_NODES,
};
use crate::error::{ensure, Error, Result};
use crate::se2::normalize_orientation;

/// Largest admissible `λΩ`; beyond it `e^{2λΩ}` leaves the comfortable f64 range.
pub const MAX_EXPONENT: f64 = 300.0;

pub const DEFAULT_PHASE_CUTOFF: u32 = 4;
pub const DEFAULT_PHASE_AMPLITUDE: f64 = PI;

/// Nodes used to measure `max|α|` for the random phase, independent of `M`.
const PHASE_SCALE_NODES: usize = 4096;
const MIN_NORMALIZED_X3: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PhaseSpec {
    #[default]
    Zero,
    /// `α(φ) = c φ`; `c` must be an even integer for `α` to be π-periodic.
    Linear { c: f64 },
    /// Real trigonometric polynomial in `e^{2ikφ}`, `|k| ≤ cutoff`, rescaled
    /// so that `max|α| = amplitude` over a 4096-node scan of `[0, π)`.
    RandomSmooth { seed: u64, cutoff: u32, amplitude: f64 },
}

impl PhaseSpec {
    pub fn random_smooth(seed: u64) -> Self {
        PhaseSpec::RandomSmooth {
            seed,
            cutoff: DEFAULT_PHASE_CUTOFF,
            amplitude: DEFAULT_PHASE_AMPLITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseSpec::Zero => Ok(()),
            PhaseSpec::Linear { c } => ensure(c.is_finite() && (c / 2.0).fract() == 0.0, "phase_c", || {
                format!("{c} is not an even integer, so the phase is not π-periodic")
            }),
            PhaseSpec::RandomSmooth { cutoff, amplitude, .. } => {
                ensure(cutoff >= 1, "cutoff", || "must be at least 1".into())?;
                ensure(amplitude.is_finite() && amplitude >= 0.0, "amplitude", || {
                    format!("{amplitude} must be a finite non-negative number")
                })
            }
        }
    }

    /// Builds the phase function `α`.
    pub fn phase_fn(&self) -> Result<PhaseFn> {
        self.validate()?;
        Ok(match *self {
            PhaseSpec::Zero => PhaseFn::Zero,
            PhaseSpec::Linear { c } => PhaseFn::Linear(c),
            PhaseSpec::RandomSmooth {
                seed,
                cutoff,
                amplitude,
            } => PhaseFn::Trig(TrigPhase::random(seed, cutoff, amplitude)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseFn {
    Zero,
    Linear(f64),
    Trig(TrigPhase),
}

impl PhaseFn {
    pub fn eval(&self, phi: f64) -> f64 {
        match self {
            PhaseFn::Zero => 0.0,
            PhaseFn::Linear(c) => c * phi,
            PhaseFn::Trig(t) => t.eval(phi),
        }
    }
}

/// `α(φ) = scale · Σ_{k=0}^{K} (a_k cos 2kφ + b_k sin 2kφ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPhase {
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
    scale: f64,
}

impl TrigPhase {
    fn random(seed: u64, cutoff: u32, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = cutoff as usize + 1;
        let mut cos_coeffs = Vec::with_capacity(n);
        let mut sin_coeffs = Vec::with_capacity(n);
        for k in 0..n {
            cos_coeffs.push(rng.gen_range(-1.0..=1.0));
            sin_coeffs.push(if k == 0 { 0.0 } else { rng.gen_range(-1.0..=1.0) });
        }
        let mut phase = TrigPhase {
            cos_coeffs,
            sin_coeffs,
            scale: 1.0,
        };
        let peak = (0..PHASE_SCALE_NODES)
            .map(|j| phase.eval(j as f64 * PI / PHASE_SCALE_NODES as f64).abs())
            .fold(0.0, f64::max);
        phase.scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
        phase
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let mut acc = 0.0;
        for (k, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let (s, c) = (2.0 * k as f64 * phi).sin_cos();
            acc += a * c + b * s;
        }
        self.scale * acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateParams {
    pub omega: f64,
    pub lambda: f64,
    pub theta: f64,
    pub phase: PhaseSpec,
    pub m: usize,
}

impl CoherentStateParams {
    /// Zero-phase state at `θ`, with `θ` reduced to `[0, π)`.
    pub fn new(omega: f64, lambda: f64, theta: f64) -> Self {
        Self {
            omega,
            lambda,
            theta: normalize_orientation(theta),
            phase: PhaseSpec::Zero,
            m: DEFAULT_CIRCLE_NODES,
        }
    }

    /// Equal-uncertainty default `λ = 1/(2Ω)`.
    pub fn balanced(omega: f64) -> Self {
        Self::new(omega, 0.5 / omega, 0.0)
    }

    pub fn with_phase(mut self, phase: PhaseSpec) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = normalize_orientation(theta);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn context(&self) -> Result<OperatorContext> {
        OperatorContext::new(self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        validate_exponent(self.omega, self.lambda, self.m)?;
        ensure(self.theta.is_finite(), "theta", || {
            format!("{} is not finite", self.theta)
        })?;
        self.phase.validate()
    }
}

fn validate_exponent(omega: f64, lambda: f64, m: usize) -> Result<()> {
    ensure(omega > 0.0 && omega.is_finite(), "omega", || {
        format!("{omega} must be positive")
    })?;
    ensure(lambda > 0.0 && lambda.is_finite(), "lambda", || {
        format!("{lambda} must be positive")
    })?;
    ensure(m >= 8 && m.is_multiple_of(2), "m", || {
        format!("{m} must be even and at least 8")
    })?;
    let exponent = lambda * omega;
    if exponent > MAX_EXPONENT {
        return Err(Error::ExponentOverflow(exponent));
    }
    Ok(())
}

/// Unit-norm samples of `e^{λΩ cos 2φ}`.
pub fn ground_state(omega: f64, lambda: f64, m: usize) -> Result<CircleFunction> {
    coherent_state(&CoherentStateParams::new(omega, lambda, 0.0).with_m(m))
}

/// Unit-norm samples of `e^{λΩ cos 2(φ−θ)} e^{iα(φ)}`.
pub fn coherent_state(p: &CoherentStateParams) -> Result<CircleFunction> {
    p.validate()?;
    let alpha = p.phase.phase_fn()?;
    let lo = p.lambda * p.omega;
    let theta = normalize_orientation(p.theta);
    // The constant factor e^{−λΩ} keeps the peak at 1; it drops out on normalization.
    CircleFunction::from_fn(p.m, |phi| {
        Complex64::from_polar((lo * ((2.0 * (phi - theta)).cos() - 1.0)).exp(), alpha.eval(phi))
    })?
    .normalized()
}

/// `‖X̂2 u − 2iλ X̂1 u‖ / ‖u‖`.
pub fn eigen_residual(ctx: &OperatorContext, lambda: f64, u: &CircleFunction) -> Result<f64> {
    let lhs = apply_x2(u)?;
    let rhs = apply_x1(ctx, u).scale(Complex64::new(0.0, 2.0 * lambda));
    Ok(lhs.sub(&rhs)?.norm() / u.norm())
}

/// Circular standard deviation on `[0, π)` of the bell `|f|`.
///
/// With `R = |∫|f| e^{2iφ}| / ∫|f|`, returns `½ √(−2 ln R)`. A uniform
/// modulus gives `R = 0` and `+∞`.
pub fn circular_std(f: &CircleFunction) -> Result<f64> {
    let weights = f.modulus();
    let total: f64 = weights.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let resultant: Complex64 = weights
        .iter()
        .enumerate()
        .map(|(j, &w)| Complex64::from_polar(w, 2.0 * f.phi(j)))
        .sum();
    let r = (resultant.norm() / total).min(1.0);
    // Round-off level resultants count as uniform.
    if r <= 1e-14 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (-2.0 * r.ln()).sqrt())
}

/// `Δ_n X̂_i = Δ X̂_i / |⟨X̂3⟩|^{1/2}` for `i = 1, 2`.
pub fn normalized_uncertainty_pair(ctx: &OperatorContext, f: &CircleFunction) -> Result<(f64, f64)> {
    let x3 = expectation(Observable::X3, ctx, f)?;
    if x3.abs() <= MIN_NORMALIZED_X3 {
        return Err(Error::VanishingCommutator(x3));
    }
    let s = x3.abs().sqrt();
    Ok((
        std_dev(Observable::X1, ctx, f)? / s,
        std_dev(Observable::X2, ctx, f)? / s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{uncertainty_gap, uncertainty_report, OperatorContext};
    use std::f64::consts::FRAC_PI_2;

    fn ctx(omega: f64) -> OperatorContext {
        OperatorContext::new(omega).unwrap()
    }

    #[test]
    fn ground_state_shape() {
        let g = ground_state(1.0, 0.7, 256).unwrap();
        assert!((g.norm_sq() - 1.0).abs() < 1e-14);
        // φ = 0 is node 0 and φ = π/2 is node 128.
        let ratio = g.samples()[0].re / g.samples()[128].re;
        assert!((ratio / (2.0 * 0.7f64).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ground_state_eigen_relation() {
        let g = ground_state(1.0, 1.0, 256).unwrap();
        assert!(eigen_residual(&ctx(1.0), 1.0, &g).unwrap() < 1e-9);
        let g = ground_state(2.5, 3.0, 256).unwrap();
        assert!(eigen_residual(&ctx(2.5), 3.0, &g).unwrap() < 1e-9);
    }

    #[test]
    fn small_lambda_tends_to_constant() {
        let g = ground_state(1.0, 1e-12, 64).unwrap();
        let c = 1.0 / PI.sqrt();
        assert!(g.samples().iter().all(|z| (z.re - c).abs() < 1e-10 && z.im == 0.0));
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(ground_state(1.0, 301.0, 256), Err(Error::ExponentOverflow(_))));
        assert!(matches!(ground_state(10.0, 30.5, 256), Err(Error::ExponentOverflow(_))));
        assert!(ground_state(1.0, 300.0, 256).is_ok());
        assert!(ground_state(1.0, 0.0, 256).is_err());
        assert!(ground_state(-1.0, 1.0, 256).is_err());
        assert!(ground_state(1.0, 1.0, 255).is_err());
    }

    #[test]
    fn zero_phase_undisplaced_equals_ground() {
        let p = CoherentStateParams::new(1.3, 0.4, 0.0);
        assert_eq!(coherent_state(&p).unwrap(), ground_state(1.3, 0.4, 256).unwrap());
    }

    #[test]
    fn displacement_moves_the_peak() {
        let u = coherent_state(&CoherentStateParams::new(1.0, 2.0, FRAC_PI_2)).unwrap();
        let m = u.modulus();
        let argmax = (0..m.len()).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap();
        assert_eq!(argmax, 128);
    }

    #[test]
    fn phase_does_not_change_modulus() {
        let base = CoherentStateParams::new(1.0, 0.5, 0.9);
        let zero = coherent_state(&base).unwrap().modulus();
        for phase in [
            PhaseSpec::Linear { c: 4.0 },
            PhaseSpec::random_smooth(3),
            PhaseSpec::RandomSmooth {
                seed: 11,
                cutoff: 2,
                amplitude: 1.0,
            },
        ] {
            let u = coherent_state(&base.with_phase(phase)).unwrap();
            for (a, b) in u.modulus().iter().zip(&zero) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_phase_is_bounded_and_seeded() {
        for seed in 0..20 {
            let spec = PhaseSpec::RandomSmooth {
                seed,
                cutoff: 4,
                amplitude: 2.0,
            };
            let a = spec.phase_fn().unwrap();
            let max = (0..10_000)
                .map(|j| a.eval(j as f64 * PI / 10_000.0).abs())
                .fold(0.0, f64::max);
            // Scaled on a 4096-node scan; the true peak can sit between scan
            // nodes, off by O(h²).
            assert!(max <= 2.0 * (1.0 + 1e-5), "{max}");
            assert!(max > 1.99);
            // π-periodic
            assert!((a.eval(0.3) - a.eval(0.3 + PI)).abs() < 1e-12);
            assert_eq!(a, spec.phase_fn().unwrap());
        }
        let a = PhaseSpec::random_smooth(1).phase_fn().unwrap();
        let b = PhaseSpec::random_smooth(2).phase_fn().unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn phase_spec_validation() {
        assert!(PhaseSpec::Linear { c: 3.0 }.validate().is_err());
        assert!(PhaseSpec::Linear { c: -6.0 }.validate().is_ok());
        assert!(PhaseSpec::RandomSmooth {
            seed: 0,
            cutoff: 0,
            amplitude: 1.0
        }
        .validate()
        .is_err());
        assert!(PhaseSpec::RandomSmooth {
            seed: 0,
            cutoff: 2,
            amplitude: f64::NAN
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_phase_states_saturate() {
        for lambda in [0.1, 0.5, 10.0] {
            let u = coherent_state(&CoherentStateParams::new(1.0, lambda, 0.0)).unwrap();
            assert!(uncertainty_gap(&ctx(1.0), &u).unwrap().abs() < 1e-8, "{lambda}");
        }
        let grid = (0..=30).map(|i| 0.05 * 1000f64.powf(i as f64 / 30.0));
        for lo in grid {
            let omega = 2.0;
            let u = coherent_state(&CoherentStateParams::new(omega, lo / omega, 0.0)).unwrap();
            assert!(uncertainty_gap(&ctx(omega), &u).unwrap().abs() < 1e-8, "{lo}");
        }
    }

    #[test]
    fn displaced_states_saturate_in_adapted_frame() {
        // With θ on the grid, rotating the frame by θ is a cyclic shift of the
        // samples and maps the displaced state onto the ground state.
        let shift = 20;
        let theta = shift as f64 * PI / 256.0;
        let u = coherent_state(&CoherentStateParams::new(1.0, 2.0, theta)).unwrap();
        let mut rolled = u.samples().to_vec();
        rolled.rotate_left(shift);
        let back = CircleFunction::new(rolled).unwrap();
        assert!(back.max_abs_diff(&ground_state(1.0, 2.0, 256).unwrap()) < 1e-14);
        let r0 = uncertainty_report(&ctx(1.0), &back).unwrap();
        assert!(r0.gap.abs() < 1e-8);
        // In the fixed frame the displaced state is strictly above the bound.
        let r = uncertainty_report(&ctx(1.0), &u).unwrap();
        assert!(r.gap > 1e-3);
        // Δ X̂2 is frame independent.
        assert!((r.delta_x2 - r0.delta_x2).abs() < 1e-10);
    }

    /// Brute-force trapezoid `∫_0^π w(φ) dφ` on `n` nodes.
    fn quad(n: usize, w: impl Fn(f64) -> f64) -> f64 {
        (0..n).map(|j| w(j as f64 * PI / n as f64)).sum::<f64>() * PI / n as f64
    }

    #[test]
    fn displacement_covariance_of_expectations() {
        let k = ctx(1.0);
        let (lo, theta) = (3.0, 0.6);
        let u = coherent_state(&CoherentStateParams::new(1.0, lo, theta)).unwrap();
        let w = |p: f64| (2.0 * lo * ((2.0 * (p - theta)).cos() - 1.0)).exp();
        let z = quad(2048, w);
        let x1 = quad(2048, |p| -(2.0 * p).sin() * w(p)) / z;
        let x3 = quad(2048, |p| (2.0 * p).cos() * w(p)) / z;
        assert!((expectation(Observable::X1, &k, &u).unwrap() - x1).abs() < 1e-12);
        assert!((expectation(Observable::X3, &k, &u).unwrap() - x3).abs() < 1e-12);
        // Equivalently: ground-state moments rotated by 2θ.
        let g = ground_state(1.0, lo, 256).unwrap();
        let c0 = expectation(Observable::X3, &k, &g).unwrap();
        assert!((x1 + c0 * (2.0 * theta).sin()).abs() < 1e-12);
        assert!((x3 - c0 * (2.0 * theta).cos()).abs() < 1e-12);
    }

    #[test]
    fn circular_std_examples() {
        let one = CircleFunction::constant(64, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(circular_std(&one).unwrap(), f64::INFINITY);

        let u = ground_state(1.0, 25.0, 256).unwrap();
        let d = circular_std(&u).unwrap();
        assert!((d / 0.1 - 1.0).abs() < 0.05, "{d}");

        for theta in [0.3, 1.2, 2.9] {
            let v = coherent_state(&CoherentStateParams::new(1.0, 25.0, theta)).unwrap();
            assert!((circular_std(&v).unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn circular_std_asymptotics() {
        for lo in [10.0, 25.0, 50.0] {
            let u = ground_state(1.0, lo, 256).unwrap();
            let ratio = circular_std(&u).unwrap() * 2.0 * f64::sqrt(lo);
            assert!((0.95..=1.05).contains(&ratio), "{lo}: {ratio}");
        }
    }

    #[test]
    fn moduli_statistics_ignore_phase() {
        let k = ctx(1.0);
        let base = CoherentStateParams::new(1.0, 0.8, 0.4);
        let reference = coherent_state(&base).unwrap();
        for phase in [PhaseSpec::Linear { c: 2.0 }, PhaseSpec::random_smooth(9)] {
            let u = coherent_state(&base.with_phase(phase)).unwrap();
            assert!((circular_std(&u).unwrap() - circular_std(&reference).unwrap()).abs() < 1e-12);
            for op in [Observable::X1, Observable::X3] {
                let a = expectation(op, &k, &u).unwrap();
                let b = expectation(op, &k, &reference).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_pair() {
        let k = ctx(1.0);
        let eq = ground_state(1.0, 0.5, 256).unwrap();
        let (a, b) = normalized_uncertainty_pair(&k, &eq).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(a * b >= 0.5 - 1e-9);

        let sharp = ground_state(1.0, 25.0, 256).unwrap();
        let (a, b) = normalized_uncertainty_pair(&k, &sharp).unwrap();
        assert!(a < b);
        let broad = ground_state(1.0, 0.01, 256).unwrap();
        let (a, b) = normalized_uncertainty_pair(&k, &broad).unwrap();
        assert!(a > b);

        let flat = CircleFunction::constant(64, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            normalized_uncertainty_pair(&k, &flat),
            Err(Error::VanishingCommutator(_))
        ));
    }
}
