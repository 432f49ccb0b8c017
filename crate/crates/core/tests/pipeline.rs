use std::f64::consts::PI;

use pinwheel_core::coherent::PhaseSpec;
use pinwheel_core::pinwheel::{
    activity_stack, argmax_orientation, detect_pinwheels, render_pinwheel_image, vector_sum_orientation, wrap_angle,
    ActivityStack, OrientationSampleSet, StateFamily,
};
use pinwheel_core::pipeline::{run_pipeline, PipelineParams, PipelineResult};
use pinwheel_core::synthesis::{activity_map, pearson_correlation, plane_wave_limit, ActivityMode, GridSpec};

fn default_run() -> PipelineResult {
    run_pipeline(&PipelineParams::default_with_seed(0)).unwrap()
}

#[test]
fn default_run_has_quantized_consistent_pinwheels() {
    let run = default_run();
    assert!(run.pinwheels.len() >= 10, "{}", run.pinwheels.len());
    assert!(run.pinwheels.iter().all(|p| p.charge == 0.5 || p.charge == -0.5));
    assert_eq!(run.net_winding, run.boundary_winding);
}

#[test]
fn default_orientation_histogram_is_roughly_uniform() {
    let h = default_run().omap.histogram(18);
    let (lo, hi) = (*h.iter().min().unwrap(), *h.iter().max().unwrap());
    assert!(lo > 0);
    assert!((hi as f64) / (lo as f64) < 3.0, "{h:?}");
}

#[test]
fn default_spectrum_peaks_at_omega() {
    let run = default_run();
    assert!((run.annulus.peak_radius - 1.0).abs() <= run.spectrum.bin_width());
    assert!(
        run.annulus.fraction_in_annulus >= 0.9,
        "{}",
        run.annulus.fraction_in_annulus
    );
}

#[test]
fn estimators_agree_where_tuning_is_sharp() {
    let run = default_run();
    let am = argmax_orientation(&run.stack);
    let vs = &run.omap;
    let mut checked = 0;
    for idx in 0..vs.preferred.len() {
        if vs.selectivity[idx] > 0.5 {
            let d = wrap_angle(2.0 * (vs.preferred[idx] - am.preferred[idx])).abs() / 2.0;
            assert!(d < PI / 8.0, "pixel {idx}: {d}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn relabeling_the_stack_rotates_the_real_pipeline_map() {
    let run = default_run();
    let delta = 0.61;
    let shifted = vector_sum_orientation(&run.stack.with_angle_offset(delta));
    for (p, q) in run.omap.preferred.iter().zip(&shifted.preferred) {
        assert!(wrap_angle(2.0 * (q - p - delta)).abs() < 2e-9);
    }
}

#[test]
fn stripe_stacks_follow_the_doubled_angle() {
    let family = StateFamily {
        omega: 1.0,
        lambda: 50.0,
        phase: PhaseSpec::Zero,
        m: 256,
    };
    let grid = GridSpec::square(64, 2.0 * PI).unwrap();
    let set = OrientationSampleSet::new(4).unwrap();
    let stack = activity_stack(&family, &set, &grid, ActivityMode::RealPart).unwrap();
    for (map, theta) in stack.maps.iter().zip(&stack.angles) {
        let wave = activity_map(&plane_wave_limit(1.0, *theta, &grid), ActivityMode::RealPart);
        assert!(pearson_correlation(&map.values, &wave.values) > 0.99);
    }
    let corr = |a: usize, b: usize| pearson_correlation(&stack.maps[a].values, &stack.maps[b].values);
    // θ = 0 and θ = π/2 have opposite wave vectors: the same real stripes.
    assert!(corr(0, 2) > 0.99);
    // θ = π/4 turns the wave vector a quarter turn.
    assert!(corr(0, 1).abs() < 0.1, "{}", corr(0, 1));
}

#[test]
fn random_phase_stack_is_seeded() {
    let grid = GridSpec::square(32, 4.0 * PI).unwrap();
    let set = OrientationSampleSet::new(4).unwrap();
    let make = |seed| {
        let family = StateFamily {
            omega: 1.0,
            lambda: 0.5,
            phase: PhaseSpec::random_smooth(seed),
            m: 256,
        };
        activity_stack(&family, &set, &grid, ActivityMode::RealPart).unwrap()
    };
    assert_eq!(make(5), make(5));
    assert_ne!(make(5), make(6));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let params = PipelineParams::default_with_seed(3);
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_pipeline(&params).unwrap())
    };
    let (a, b) = (run_with(1), run_with(4));
    let bits = |r: &PipelineResult| r.omap.preferred.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.pinwheels, b.pinwheels);
    assert_eq!(a.spectrum, b.spectrum);
    assert_eq!(render_pinwheel_image(&a.omap), render_pinwheel_image(&b.omap));
}

#[test]
fn synthetic_cos_squared_map_is_recovered_and_detected() {
    let grid = GridSpec::square(65, 6.0).unwrap();
    let set = OrientationSampleSet::new(8).unwrap();
    // One +½ vortex at the origin plaquette of an odd grid.
    let beta = |x: f64, y: f64| (0.5 * y.atan2(x)).rem_euclid(PI);
    let stack = ActivityStack::cos_squared(grid, &set, beta);
    let omap = vector_sum_orientation(&stack);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let want = beta(grid.x1(i), grid.x2(j));
            assert!(wrap_angle(2.0 * (omap.preferred_at(i, j) - want)).abs() < 1e-12);
        }
    }
    let pw = detect_pinwheels(&omap);
    assert_eq!(pw.len(), 1);
    assert_eq!(pw[0].charge, 0.5);
}
