//! Self-check suite over the whole library with a machine-readable report.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{
    apply_x1, apply_x2, apply_x3, commutator, uncertainty_gap, CircleFunction, OperatorContext, DEFAULT_CIRCLE_NODES,
};
use crate::coherent::{circular_std, coherent_state, ground_state, normalized_uncertainty_pair, CoherentStateParams};
use crate::error::Result;
use crate::pipeline::{run_pipeline, PipelineParams};
use crate::se2::{integral_curve_analytic, integral_curve_numeric, IntegralCurveParams, PlanarPoint, PlaneSamples};
use crate::special::{bessel_j0, J0_FIRST_ZERO};
use crate::spectrum::{annulus_metrics, radial_power_spectrum, Window};
use crate::synthesis::{
    activity_map, bessel_limit, evaluate_at, pearson_correlation, plane_wave_limit, synthesize, ActivityMode, GridSpec,
};

/// Deliberate defects used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Evaluate the eigen-relation with `+Ω sin 2φ` in place of `X̂1`.
    FlipX1Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub relation: Relation,
    pub tolerance: f64,
    pub measured: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            relation: Relation::AtMost,
            tolerance,
            measured,
            passed: measured <= tolerance,
        }
    }

    pub fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            relation: Relation::AtLeast,
            tolerance,
            measured,
            passed: measured >= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Saturation grid of `λ` at `Ω = 1`; the balanced point `1/(2Ω)` repeats 0.5.
pub const SATURATION_LAMBDAS: [f64; 8] = [0.05, 0.1, 0.5, 0.5, 1.0, 5.0, 25.0, 50.0];
pub const RANDOM_STATE_COUNT: usize = 1000;

pub fn min_random_state_gap(seed: u64, count: usize) -> Result<f64> {
    let ctx = OperatorContext::new(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for i in 0..count {
        let band = 1 + i % 40;
        let f = CircleFunction::random_band_limited(DEFAULT_CIRCLE_NODES, band, &mut rng)?;
        worst = worst.min(uncertainty_gap(&ctx, &f)?);
    }
    Ok(worst)
}

/// `(max |gap|, max eigen residual)` over [`SATURATION_LAMBDAS`].
pub fn saturation_errors(mutation: Option<Mutation>) -> Result<(f64, f64)> {
    let ctx = OperatorContext::new(1.0)?;
    let mut gap: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for lambda in SATURATION_LAMBDAS {
        let u = ground_state(1.0, lambda, DEFAULT_CIRCLE_NODES)?;
        gap = gap.max(uncertainty_gap(&ctx, &u)?.abs());
        let x1u = match mutation {
            None => apply_x1(&ctx, &u),
            Some(Mutation::FlipX1Sign) => apply_x1(&ctx, &u).scale(Complex64::new(-1.0, 0.0)),
        };
        let diff = apply_x2(&u)?.sub(&x1u.scale(Complex64::new(0.0, 2.0 * lambda)))?;
        residual = residual.max(diff.norm() / u.norm());
    }
    Ok((gap, residual))
}

pub fn equal_uncertainty_mismatch() -> Result<f64> {
    let omega = 1.0;
    let u = coherent_state(&CoherentStateParams::balanced(omega))?;
    let (a, b) = normalized_uncertainty_pair(&OperatorContext::new(omega)?, &u)?;
    Ok((a - b).abs())
}

/// Largest `|Δφ · 2√(λΩ) − 1|` over `λΩ ∈ {10, 25, 50}`.
pub fn angular_spread_deviation() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lo in [10.0, 25.0, 50.0] {
        let u = ground_state(1.0, lo, DEFAULT_CIRCLE_NODES)?;
        worst = worst.max((circular_std(&u)? * 2.0 * f64::sqrt(lo) - 1.0).abs());
    }
    Ok(worst)
}

/// Largest `‖(i/2)[X̂2, X̂1]f − X̂3 f‖_∞` over unit-norm band-limited states.
pub fn commutator_error(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (i, omega) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let ctx = OperatorContext::new(omega)?;
        for _ in 0..20 {
            let f = CircleFunction::random_band_limited(DEFAULT_CIRCLE_NODES, 20 + 10 * i, &mut rng)?.normalized()?;
            worst = worst.max(commutator(&ctx, &f)?.max_abs_diff(&apply_x3(&ctx, &f)));
        }
    }
    Ok(worst)
}

/// Observed order of the finite-difference planar bracket `X2X1 − X1X2 = −∂_{x2}`
/// from pitches 0.1 and 0.05, together with the error at 0.05.
pub fn planar_bracket_order() -> (f64, f64) {
    let f = |x: f64, y: f64| (0.7 * x).sin() * (0.4 * y).cos() + 0.1 * x * y * y;
    let d2 = |x: f64, y: f64| -0.4 * (0.7 * x).sin() * (0.4 * y).sin() + 0.2 * x * y;
    let err = |h: f64| {
        let n = (4.0 / h).round() as usize + 1;
        let br = PlaneSamples::from_fn(n, n, h, PlanarPoint::new(-2.0, -2.0), f).bracket();
        let mut worst: f64 = 0.0;
        for j in 0..br.ny {
            for i in 0..br.nx {
                let p = br.coords(i, j);
                worst = worst.max((br.at(i, j) + d2(p.x1, p.x2)).abs());
            }
        }
        worst
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    ((coarse / fine).log2(), fine)
}

/// Largest RK4 endpoint error over `|k·s_max| ≤ π` with 200 steps.
pub fn integral_curve_error() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [-PI, -2.0, -1.0, -0.25, 0.0, 0.25, 1.0, 2.0, PI] {
        for s_max in [0.5, 1.0] {
            let params = IntegralCurveParams::new(k, s_max, 200)?;
            let end = *integral_curve_numeric(&params)?.last().expect("non-empty curve");
            worst = worst.max(end.distance(&integral_curve_analytic(k, s_max)));
        }
    }
    Ok(worst)
}

/// Largest `|u(x) − π J0(Ω|x|)|` for `f ≡ 1` over grid nodes with `Ω|x| ≤ 20`.
pub fn bessel_limit_error(omega: f64, grid: &GridSpec) -> Result<f64> {
    let u = bessel_limit(omega, grid, DEFAULT_CIRCLE_NODES)?;
    let mut worst: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = grid.point(i, j);
            let r = omega * p.distance(&PlanarPoint::ORIGIN);
            if r <= 20.0 {
                worst = worst.max((u.at(i, j) - Complex64::new(PI * bessel_j0(r), 0.0)).norm());
            }
        }
    }
    Ok(worst)
}

/// First zero of `|u|` along the `x1` axis for `f ≡ 1`, by bisection on the
/// real part between `Ωr = 2` and `Ωr = 3`.
pub fn bessel_first_zero(omega: f64) -> Result<f64> {
    let ones = CircleFunction::constant(DEFAULT_CIRCLE_NODES, Complex64::new(1.0, 0.0))?;
    let u = |r: f64| evaluate_at(omega, &ones, PlanarPoint::new(r / omega, 0.0)).re;
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if u(lo) * u(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pearson correlation between the real parts of the `λΩ = 50` field and its
/// plane-wave limit on `[−2π/Ω, 2π/Ω)²`.
pub fn plane_wave_correlation(omega: f64, theta: f64, n: usize) -> Result<f64> {
    let grid = GridSpec::square(n, 2.0 * PI / omega)?;
    let u = synthesize(
        omega,
        &coherent_state(&CoherentStateParams::new(omega, 50.0 / omega, theta))?,
        &grid,
    )?;
    let a = activity_map(&u, ActivityMode::RealPart);
    let b = activity_map(&plane_wave_limit(omega, theta, &grid), ActivityMode::RealPart);
    Ok(pearson_correlation(&a.values, &b.values))
}

/// Relative mismatch between spectral power and `Σ|u|²` for a synthesized field.
pub fn parseval_error() -> Result<f64> {
    let grid = GridSpec::default_for(1.0);
    let u = synthesize(1.0, &coherent_state(&CoherentStateParams::new(1.0, 0.5, 0.4))?, &grid)?;
    let energy: f64 = u.values.iter().map(|z| z.norm_sqr()).sum();
    let s = radial_power_spectrum(&u, None, Window::None)?;
    Ok((s.total_power() - energy).abs() / energy)
}

/// Smallest Hann-windowed annulus fraction at a two-bin `ε` over a few states.
pub fn single_state_annulus_fraction() -> Result<f64> {
    let grid = GridSpec::default_for(1.0);
    let mut worst: f64 = 1.0;
    for (lambda, theta) in [(0.05, 0.0), (0.5, 0.3), (5.0, 1.1), (50.0, 2.0)] {
        let u = synthesize(
            1.0,
            &coherent_state(&CoherentStateParams::new(1.0, lambda, theta))?,
            &grid,
        )?;
        let s = radial_power_spectrum(&u, None, Window::Hann)?;
        worst = worst.min(annulus_metrics(&s, 1.0, 2.0 * s.bin_width())?.fraction_in_annulus);
    }
    Ok(worst)
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    checks.push(CheckResult::at_least(
        "uncertainty_inequality_min_gap",
        min_random_state_gap(opts.seed, RANDOM_STATE_COUNT)?,
        -1e-9,
    ));
    let (gap, residual) = saturation_errors(opts.mutation)?;
    checks.push(CheckResult::at_most("saturation_max_abs_gap", gap, 1e-8));
    checks.push(CheckResult::at_most("saturation_eigen_residual", residual, 1e-9));
    checks.push(CheckResult::at_most(
        "equal_uncertainty_mismatch",
        equal_uncertainty_mismatch()?,
        1e-6,
    ));
    checks.push(CheckResult::at_most(
        "angular_spread_asymptotic_deviation",
        angular_spread_deviation()?,
        0.05,
    ));
    checks.push(CheckResult::at_most(
        "commutator_max_error",
        commutator_error(opts.seed)?,
        1e-10,
    ));
    let (order, _) = planar_bracket_order();
    checks.push(CheckResult::at_most(
        "planar_bracket_order_deviation",
        (order - 2.0).abs(),
        0.25,
    ));
    checks.push(CheckResult::at_most(
        "integral_curve_endpoint_error",
        integral_curve_error()?,
        1e-6,
    ));

    let bessel_grid = GridSpec::default_for(1.0);
    checks.push(CheckResult::at_most(
        "bessel_limit_error",
        bessel_limit_error(1.0, &bessel_grid)?,
        1e-8,
    ));
    checks.push(CheckResult::at_most(
        "bessel_first_zero_error",
        (bessel_first_zero(1.0)? - J0_FIRST_ZERO).abs(),
        1e-3,
    ));
    checks.push(CheckResult::at_least(
        "plane_wave_correlation",
        plane_wave_correlation(1.0, 0.0, 256)?,
        0.99,
    ));
    checks.push(CheckResult::at_most("parseval_relative_error", parseval_error()?, 1e-9));
    checks.push(CheckResult::at_least(
        "single_state_annulus_fraction",
        single_state_annulus_fraction()?,
        0.99,
    ));

    let params = PipelineParams::default_with_seed(opts.seed);
    let run = run_pipeline(&params)?;
    checks.push(CheckResult::at_least(
        "pinwheel_count",
        run.pinwheels.len() as f64,
        10.0,
    ));
    checks.push(CheckResult::at_most(
        "net_charge_boundary_mismatch",
        (run.net_winding - run.boundary_winding).abs() as f64,
        0.0,
    ));
    checks.push(CheckResult::at_most(
        "annulus_peak_offset_bins",
        (run.annulus.peak_radius - params.family.omega).abs() / run.spectrum.bin_width(),
        1.0,
    ));
    checks.push(CheckResult::at_least(
        "annulus_fraction",
        run.annulus.fraction_in_annulus,
        0.9,
    ));

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { checks, all_passed })
}
