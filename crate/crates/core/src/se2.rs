//! Rotation-translation group acting on the cortical plane.
//!
//! An element `(q1, q2, θ)` acts on a point by rotating it through the doubled
//! angle `2θ` and translating by `(q1, q2)`. Orientation is polarity-free, so
//! `θ` lives on `[0, π)` while the rotation still covers the full circle.
//!
//! The module also carries the two left-invariant fields used to model
//! horizontal connectivity: `X1 = ∂_{x1}` and `X2 = x1 ∂_{x2} − x2 ∂_{x1}`,
//! their integral curves `γ' = (X1 + k X2)(γ)`, and finite-difference versions
//! of both fields acting on sampled planar functions.

use std::f64::consts::PI;

use crate::error::{ensure, Result};

/// Reduces an angle to `[0, π)`.
pub fn normalize_orientation(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs.
    if t >= PI {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x1: f64,
    pub x2: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    fn rotate(&self, angle: f64) -> PlanarPoint {
        let (s, c) = angle.sin_cos();
        PlanarPoint {
            x1: c * self.x1 - s * self.x2,
            x2: s * self.x1 + c * self.x2,
        }
    }
}

/// Element of SE(2) in the `(q1, q2, θ)` chart with `θ ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    q1: f64,
    q2: f64,
    theta: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        q1: 0.0,
        q2: 0.0,
        theta: 0.0,
    };

    pub fn new(q1: f64, q2: f64, theta: f64) -> Self {
        Self {
            q1,
            q2,
            theta: normalize_orientation(theta),
        }
    }

    pub fn translation(q1: f64, q2: f64) -> Self {
        Self::new(q1, q2, 0.0)
    }

    pub fn rotation(theta: f64) -> Self {
        Self::new(0.0, 0.0, theta)
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn base_point(&self) -> PlanarPoint {
        PlanarPoint::new(self.q1, self.q2)
    }

    /// Unit vector along which the fan attached to this element is oriented.
    pub fn axis(&self) -> PlanarPoint {
        PlanarPoint::new(1.0, 0.0).rotate(2.0 * self.theta)
    }

    /// `r_{2θ} x + q`.
    pub fn act(&self, x: PlanarPoint) -> PlanarPoint {
        let r = x.rotate(2.0 * self.theta);
        PlanarPoint::new(r.x1 + self.q1, r.x2 + self.q2)
    }

    /// Group product: `self.compose(other).act(x) == self.act(other.act(x))`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let shifted = other.base_point().rotate(2.0 * self.theta);
        GroupElement::new(shifted.x1 + self.q1, shifted.x2 + self.q2, self.theta + other.theta)
    }

    pub fn inverse(&self) -> GroupElement {
        let back = PlanarPoint::new(-self.q1, -self.q2).rotate(-2.0 * self.theta);
        GroupElement::new(back.x1, back.x2, -self.theta)
    }
}

pub fn act(g: &GroupElement, x: PlanarPoint) -> PlanarPoint {
    g.act(x)
}

pub fn compose(g1: &GroupElement, g2: &GroupElement) -> GroupElement {
    g1.compose(g2)
}

/// Closed-form integral curve of `X1 + k X2` through the origin.
///
/// For `k ≠ 0` the curve is the circle of radius `1/|k|` centred at `(0, −1/k)`.
pub fn integral_curve_analytic(k: f64, s: f64) -> PlanarPoint {
    if k == 0.0 {
        return PlanarPoint::new(s, 0.0);
    }
    let half = 0.5 * k * s;
    // cos(ks) − 1 = −2 sin²(ks/2), which keeps precision for small k·s.
    PlanarPoint::new((k * s).sin() / k, -2.0 * half.sin() * half.sin() / k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralCurveParams {
    pub k: f64,
    pub s_max: f64,
    pub n_steps: usize,
}

impl IntegralCurveParams {
    pub fn new(k: f64, s_max: f64, n_steps: usize) -> Result<Self> {
        let p = Self { k, s_max, n_steps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.k.is_finite(), "k", || format!("{} is not finite", self.k))?;
        ensure(self.s_max > 0.0 && self.s_max.is_finite(), "s_max", || {
            format!("{} must be positive", self.s_max)
        })?;
        ensure(self.n_steps >= 2, "n_steps", || {
            format!("{} must be at least 2", self.n_steps)
        })
    }

    pub fn step(&self) -> f64 {
        self.s_max / self.n_steps as f64
    }
}

fn curve_velocity(k: f64, p: [f64; 2]) -> [f64; 2] {
    [1.0 + k * p[1], -k * p[0]]
}

/// Fixed-step classical RK4 integration of `γ' = (1 + k x2, −k x1)`, `γ(0) = 0`.
///
/// Returns `n_steps + 1` points, the first being the origin.
pub fn integral_curve_numeric(params: &IntegralCurveParams) -> Result<Vec<PlanarPoint>> {
    params.validate()?;
    let h = params.step();
    let k = params.k;
    let mut y = [0.0f64, 0.0];
    let mut out = Vec::with_capacity(params.n_steps + 1);
    out.push(PlanarPoint::ORIGIN);
    for _ in 0..params.n_steps {
        let k1 = curve_velocity(k, y);
        let k2 = curve_velocity(k, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = curve_velocity(k, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = curve_velocity(k, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for d in 0..2 {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        out.push(PlanarPoint::new(y[0], y[1]));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanCurve {
    pub k: f64,
    /// `(s, point)` pairs in global coordinates.
    pub samples: Vec<(f64, PlanarPoint)>,
}

/// Default fan curvatures: nine values from −1 to 1 in steps of 0.25.
pub fn default_fan_curvatures() -> Vec<f64> {
    (0..9).map(|i| -1.0 + 0.25 * i as f64).collect()
}

/// Integrates one curve per `k` in local coordinates and maps it through `g`.
pub fn association_fan(k_values: &[f64], g: &GroupElement, s_max: f64, n_steps: usize) -> Result<Vec<FanCurve>> {
    ensure(!k_values.is_empty(), "k_values", || "empty list".into())?;
    k_values
        .iter()
        .map(|&k| {
            let params = IntegralCurveParams::new(k, s_max, n_steps)?;
            let h = params.step();
            let samples = integral_curve_numeric(&params)?
                .into_iter()
                .enumerate()
                .map(|(i, p)| (i as f64 * h, g.act(p)))
                .collect();
            Ok(FanCurve { k, samples })
        })
        .collect()
}

/// A real function sampled on a uniform planar grid, row-major in `x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSamples {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin: PlanarPoint,
    pub values: Vec<f64>,
}

impl PlaneSamples {
    pub fn from_fn(nx: usize, ny: usize, spacing: f64, origin: PlanarPoint, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(origin.x1 + i as f64 * spacing, origin.x2 + j as f64 * spacing));
            }
        }
        Self {
            nx,
            ny,
            spacing,
            origin,
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn coords(&self, i: usize, j: usize) -> PlanarPoint {
        PlanarPoint::new(
            self.origin.x1 + i as f64 * self.spacing,
            self.origin.x2 + j as f64 * self.spacing,
        )
    }

    /// Maps the interior with a stencil closure; the result loses one node on
    /// every side.
    fn interior_map(&self, f: impl Fn(&Self, usize, usize) -> f64) -> PlaneSamples {
        assert!(self.nx >= 3 && self.ny >= 3, "grid too small for a 3-point stencil");
        let (nx, ny) = (self.nx - 2, self.ny - 2);
        let mut values = Vec::with_capacity(nx * ny);
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                values.push(f(self, i, j));
            }
        }
        PlaneSamples {
            nx,
            ny,
            spacing: self.spacing,
            origin: PlanarPoint::new(self.origin.x1 + self.spacing, self.origin.x2 + self.spacing),
            values,
        }
    }

    fn d1(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.spacing)
    }

    fn d2(&self, i: usize, j: usize) -> f64 {
        (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.spacing)
    }

    /// Central-difference `∂_{x1}`.
    pub fn apply_x1(&self) -> PlaneSamples {
        self.interior_map(|s, i, j| s.d1(i, j))
    }

    /// Central-difference `(x1 ∂_{x2} − x2 ∂_{x1})`.
    pub fn apply_x2(&self) -> PlaneSamples {
        self.interior_map(|s, i, j| {
            let p = s.coords(i, j);
            p.x1 * s.d2(i, j) - p.x2 * s.d1(i, j)
        })
    }

    /// Central-difference `∂_{x2}`.
    pub fn partial_x2(&self) -> PlaneSamples {
        self.interior_map(|s, i, j| s.d2(i, j))
    }

    /// Planar bracket `X2 X1 f − X1 X2 f` (no normalization factor).
    pub fn bracket(&self) -> PlaneSamples {
        let a = self.apply_x1().apply_x2();
        let b = self.apply_x2().apply_x1();
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        PlaneSamples { values, ..a }
    }
}
