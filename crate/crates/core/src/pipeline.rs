//! End-to-end orientation map construction: stack → estimator → singularities
//! → order-field spectrum.

use serde::{Deserialize, Serialize};

use crate::angular::DEFAULT_CIRCLE_NODES;
use crate::coherent::PhaseSpec;
use crate::error::{ensure, Result};
use crate::pinwheel::{
    activity_stack, boundary_winding, detect_pinwheels, estimate_orientation, net_winding, ActivityStack, Estimator,
    OrientationMap, OrientationSampleSet, Pinwheel, StateFamily, DEFAULT_N_ORIENT,
};
use crate::spectrum::{
    annulus_metrics, complex_order_field, radial_power_spectrum, AnnulusMetrics, OrderWeighting, RadialSpectrum, Window,
};
use crate::synthesis::{ActivityMode, GridSpec};

pub const DEFAULT_ANNULUS_EPSILON: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub family: StateFamily,
    pub n_orient: usize,
    pub grid: GridSpec,
    pub mode: ActivityMode,
    pub estimator: Estimator,
    /// Amplitude of the order field whose spectrum is tested.
    pub weighting: OrderWeighting,
    pub epsilon: f64,
}

impl PipelineParams {
    /// `Ω = 1`, `λ = 1/2`, eight orientations, random smooth phase with the
    /// given seed, 256² nodes over `[−8π, 8π)²`.
    pub fn default_with_seed(seed: u64) -> Self {
        let omega = 1.0;
        Self {
            family: StateFamily {
                omega,
                lambda: 0.5 / omega,
                phase: PhaseSpec::random_smooth(seed),
                m: DEFAULT_CIRCLE_NODES,
            },
            n_orient: DEFAULT_N_ORIENT,
            grid: GridSpec::default_for(omega),
            mode: ActivityMode::RealPart,
            estimator: Estimator::VectorSum,
            weighting: OrderWeighting::Magnitude,
            epsilon: DEFAULT_ANNULUS_EPSILON,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub stack: ActivityStack,
    pub omap: OrientationMap,
    pub pinwheels: Vec<Pinwheel>,
    /// Twice the net charge, i.e. the summed plaquette windings.
    pub net_winding: i64,
    pub boundary_winding: i64,
    pub spectrum: RadialSpectrum,
    pub annulus: AnnulusMetrics,
}

impl PipelineResult {
    pub fn net_charge(&self) -> f64 {
        0.5 * self.net_winding as f64
    }
}

pub fn run_pipeline(params: &PipelineParams) -> Result<PipelineResult> {
    ensure(params.epsilon > 0.0 && params.epsilon < 1.0, "epsilon", || {
        format!("{} must lie in (0, 1)", params.epsilon)
    })?;
    let set = OrientationSampleSet::new(params.n_orient)?;
    let stack = activity_stack(&params.family, &set, &params.grid, params.mode)?;
    let omap = estimate_orientation(&stack, params.estimator);
    let pinwheels = detect_pinwheels(&omap);
    let z = complex_order_field(&omap, params.weighting);
    let spectrum = radial_power_spectrum(&z, None, Window::None)?;
    let annulus = annulus_metrics(&spectrum, params.family.omega, params.epsilon)?;
    Ok(PipelineResult {
        net_winding: net_winding(&pinwheels),
        boundary_winding: boundary_winding(&omap),
        stack,
        omap,
        pinwheels,
        spectrum,
        annulus,
    })
}
