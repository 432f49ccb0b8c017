use std::fmt::Write as _;

use anyhow::Result;
use clap::ValueEnum;
use pinwheel_core::angular::{uncertainty_report, UncertaintyReport};
use pinwheel_core::coherent::{
    circular_std, coherent_state, eigen_residual, normalized_uncertainty_pair, CoherentStateParams,
};
use pinwheel_core::pinwheel::render_pinwheel_image;
use pinwheel_core::pipeline::run_pipeline;
use pinwheel_core::se2::{association_fan, integral_curve_analytic, GroupElement};
use pinwheel_core::spectrum::{
    annulus_metrics, complex_order_field, power_grid, radial_power_spectrum, AnnulusMetrics, OrderWeighting,
    RadialSpectrum,
};
use pinwheel_core::synthesis::{activity_map, bessel_limit, plane_wave_limit, synthesize, ComplexField, RealGrid};
use pinwheel_core::validation::{run_suite, Mutation, SuiteOptions, SuiteReport};
use serde::Serialize;

use crate::config::{Format, PhaseVariant, RunConfig};
use crate::export::{
    gray_image, grid_point_rows, log_power_image, pgm_bytes, png_bytes_gray, png_bytes_rgb, polar_plot, sha256_hex,
    Csv, OutputDir,
};

/// What a command wrote and what it reports on stdout.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<std::path::PathBuf>,
    pub report: String,
    /// False when the command ran but its checks failed.
    pub success: bool,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn state_params(cfg: &RunConfig) -> CoherentStateParams {
    CoherentStateParams::new(cfg.omega, cfg.lambda, cfg.theta)
        .with_phase(cfg.phase_spec(PhaseVariant::Zero))
        .with_m(cfg.m)
}

#[derive(Serialize)]
struct NormalizedPair {
    delta_x1: f64,
    delta_x2: f64,
}

#[derive(Serialize)]
struct StateReport {
    config: RunConfig,
    theta: f64,
    delta_x1: f64,
    delta_x2: f64,
    half_abs_mean_x3: f64,
    gap: f64,
    uncertainty: UncertaintyReport,
    /// Absent where `⟨X̂3⟩` vanishes.
    normalized: Option<NormalizedPair>,
    /// Absent for a flat modulus.
    circular_std: Option<f64>,
    eigen_residual: f64,
}

pub fn cmd_state(cfg: &RunConfig) -> Result<Outcome> {
    let params = state_params(cfg);
    let u = coherent_state(&params)?;
    let ctx = params.context()?;
    let unc = uncertainty_report(&ctx, &u)?;
    let normalized = normalized_uncertainty_pair(&ctx, &u).ok().map(|(a, b)| NormalizedPair {
        delta_x1: a,
        delta_x2: b,
    });
    let spread = circular_std(&u)?;
    let report = StateReport {
        config: cfg.resolved(PhaseVariant::Zero),
        theta: params.theta,
        delta_x1: unc.delta_x1,
        delta_x2: unc.delta_x2,
        half_abs_mean_x3: unc.half_abs_mean_x3,
        gap: unc.gap,
        uncertainty: unc,
        normalized,
        circular_std: spread.is_finite().then_some(spread),
        eigen_residual: eigen_residual(&ctx, cfg.lambda, &u)?,
    };

    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["j", "phi", "re", "im", "modulus"]);
        for (j, z) in u.samples().iter().enumerate() {
            csv.row(&[&j, &u.phi(j), &z.re, &z.im, &z.norm()]);
        }
        out.write("state.csv", &csv.into_bytes())?;
    }
    if cfg.wants(Format::Png) {
        out.write("state_polar.png", &png_bytes_rgb(&polar_plot(&u.modulus(), 256))?)?;
    }
    let text = json(&report)?;
    out.write("state.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: true,
    })
}

#[derive(Serialize)]
struct FanReport {
    config: RunConfig,
    n_curves: usize,
    max_endpoint_error: f64,
}

pub fn cmd_fan(cfg: &RunConfig) -> Result<Outcome> {
    let g = GroupElement::new(cfg.q1, cfg.q2, cfg.theta);
    let curves = association_fan(&cfg.fan_k, &g, cfg.fan_s_max, cfg.fan_steps)?;
    let mut max_err: f64 = 0.0;
    let mut csv = Csv::new(&["k", "s", "x1", "x2", "analytic_x1", "analytic_x2"]);
    for c in &curves {
        for (s, p) in &c.samples {
            let a = g.act(integral_curve_analytic(c.k, *s));
            max_err = max_err.max(p.distance(&a));
            csv.row(&[&c.k, s, &p.x1, &p.x2, &a.x1, &a.x2]);
        }
    }
    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        out.write("fan.csv", &csv.into_bytes())?;
    }
    if cfg.wants(Format::Svg) {
        out.write("fan.svg", fan_svg(&curves).as_bytes())?;
    }
    let report = FanReport {
        config: cfg.resolved(PhaseVariant::Zero),
        n_curves: curves.len(),
        max_endpoint_error: max_err,
    };
    let text = json(&report)?;
    out.write("fan.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: true,
    })
}

fn fan_svg(curves: &[pinwheel_core::se2::FanCurve]) -> String {
    let pts = curves.iter().flat_map(|c| c.samples.iter().map(|(_, p)| p));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x1);
        x1 = x1.max(p.x1);
        y0 = y0.min(p.x2);
        y1 = y1.max(p.x2);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.6} {h:.6}" width="600" height="{:.0}">"#,
        600.0 * h / w
    );
    for c in curves {
        let path: Vec<String> = c
            .samples
            .iter()
            .map(|(_, p)| format!("{:.6},{:.6}", p.x1 - x0 + pad, y1 + pad - p.x2))
            .collect();
        let _ = writeln!(
            s,
            r#"  <polyline data-k="{}" fill="none" stroke="black" stroke-width="{:.6}" points="{}"/>"#,
            c.k,
            0.004 * w,
            path.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    /// Synthesize the configured coherent state.
    None,
    /// Flat state `f ≡ 1`, the small-λ limit.
    Bessel,
    /// Pure harmonic, the large-λ limit.
    PlaneWave,
}

#[derive(Serialize)]
struct ValuePair {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MapReport {
    config: RunConfig,
    limit: Limit,
    activity_min: f64,
    activity_max: f64,
    origin_value: Option<ValuePair>,
    spectrum_peak_radius: f64,
    spectrum_bin_width: f64,
    fraction_in_annulus: Option<f64>,
    sha256: String,
}

fn field_hash(field: &ComplexField) -> String {
    let mut bytes = Vec::with_capacity(16 * field.values.len());
    for z in &field.values {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    sha256_hex(&bytes)
}

fn write_gray(out: &mut OutputDir, cfg: &RunConfig, stem: &str, map: &RealGrid, lo: f64, hi: f64) -> Result<()> {
    let img = gray_image(map, lo, hi);
    if cfg.wants(Format::Pgm) {
        out.write(&format!("{stem}.pgm"), &pgm_bytes(&img))?;
    }
    if cfg.wants(Format::Png) {
        out.write(&format!("{stem}.png"), &png_bytes_gray(&img)?)?;
    }
    Ok(())
}

fn spectrum_csv(spec: &RadialSpectrum) -> Vec<u8> {
    let mut csv = Csv::new(&["bin_center_k", "power"]);
    for (c, p) in spec.bin_centers().iter().zip(&spec.power) {
        csv.row(&[c, p]);
    }
    csv.into_bytes()
}

pub fn cmd_map(cfg: &RunConfig, limit: Limit) -> Result<Outcome> {
    let grid = cfg.grid();
    grid.validate()?;
    let field = match limit {
        Limit::None => synthesize(cfg.omega, &coherent_state(&state_params(cfg))?, &grid)?,
        Limit::Bessel => {
            grid.check_resolves(cfg.omega)?;
            bessel_limit(cfg.omega, &grid, cfg.m)?
        }
        Limit::PlaneWave => {
            grid.check_resolves(cfg.omega)?;
            plane_wave_limit(cfg.omega, cfg.theta, &grid)
        }
    };
    let activity = activity_map(&field, cfg.mode.into());
    let (lo, hi) = activity.min_max();
    let spec = radial_power_spectrum(&field, None, cfg.window.into())?;
    let origin_value = (grid.nx.is_multiple_of(2) && grid.ny.is_multiple_of(2)).then(|| {
        let z = field.at(grid.nx / 2, grid.ny / 2);
        ValuePair { re: z.re, im: z.im }
    });

    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["i", "j", "x1", "x2", "re", "im"]);
        for (i, j) in grid_point_rows(&grid) {
            let z = field.at(i, j);
            csv.row(&[&i, &j, &grid.x1(i), &grid.x2(j), &z.re, &z.im]);
        }
        out.write("map.csv", &csv.into_bytes())?;
        out.write("map_spectrum.csv", &spectrum_csv(&spec))?;
    }
    write_gray(&mut out, cfg, "map", &activity, lo, hi)?;
    let report = MapReport {
        config: cfg.resolved(PhaseVariant::Zero),
        limit,
        activity_min: lo,
        activity_max: hi,
        origin_value,
        spectrum_peak_radius: spec.bin_center(spec.peak_bin),
        spectrum_bin_width: spec.bin_width(),
        fraction_in_annulus: annulus_metrics(&spec, cfg.omega, cfg.epsilon)
            .ok()
            .map(|m| m.fraction_in_annulus),
        sha256: field_hash(&field),
    };
    let text = json(&report)?;
    out.write("map.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: true,
    })
}

#[derive(Serialize)]
struct PinwheelEntry {
    x: f64,
    y: f64,
    charge: f64,
}

#[derive(Serialize)]
struct PinwheelSummary {
    config: RunConfig,
    pinwheel_count: usize,
    positive: usize,
    negative: usize,
    net_charge: f64,
    boundary_charge: f64,
    charges_quantized: bool,
    peak_radius: f64,
    bin_width: f64,
    fraction_in_annulus: f64,
    /// Same spectrum with the normalized selectivity as amplitude.
    fraction_in_annulus_selectivity: f64,
    orientation_histogram: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 18;

pub fn cmd_pinwheel(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.pipeline();
    let run = run_pipeline(&params)?;
    let grid = params.grid;
    let mut out = OutputDir::create(&cfg.out)?;

    let (lo, hi) = run
        .stack
        .maps
        .iter()
        .map(RealGrid::min_max)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
            (a.min(c), b.max(d))
        });
    for (j, map) in run.stack.maps.iter().enumerate() {
        write_gray(&mut out, cfg, &format!("activity_{j:02}"), map, lo, hi)?;
    }
    if cfg.wants(Format::Png) {
        out.write("pinwheel.png", &png_bytes_rgb(&render_pinwheel_image(&run.omap))?)?;
    }
    if cfg.wants(Format::Csv) {
        let mut csv = Csv::new(&["x1", "x2", "preferred", "selectivity"]);
        for (i, j) in grid_point_rows(&grid) {
            let idx = grid.index(i, j);
            csv.row(&[
                &grid.x1(i),
                &grid.x2(j),
                &run.omap.preferred[idx],
                &run.omap.selectivity[idx],
            ]);
        }
        out.write("orientation.csv", &csv.into_bytes())?;
        out.write("spectrum.csv", &spectrum_csv(&run.spectrum))?;
    }
    let entries: Vec<PinwheelEntry> = run
        .pinwheels
        .iter()
        .map(|p| PinwheelEntry {
            x: p.x,
            y: p.y,
            charge: p.charge,
        })
        .collect();
    out.write("pinwheels.json", json(&entries)?.as_bytes())?;

    let z = complex_order_field(&run.omap, params.weighting);
    if cfg.wants(Format::Png) {
        let pg = power_grid(&z, cfg.window.into());
        out.write(
            "spectrum.png",
            &png_bytes_gray(&log_power_image(pg.nx, pg.ny, &pg.values))?,
        )?;
    }
    let sel = radial_power_spectrum(
        &complex_order_field(&run.omap, OrderWeighting::Selectivity),
        None,
        pinwheel_core::spectrum::Window::None,
    )?;
    let sel_metrics: AnnulusMetrics = annulus_metrics(&sel, cfg.omega, cfg.epsilon)?;

    let positive = run.pinwheels.iter().filter(|p| p.charge > 0.0).count();
    let summary = PinwheelSummary {
        config: cfg.resolved(PhaseVariant::RandomSmooth),
        pinwheel_count: run.pinwheels.len(),
        positive,
        negative: run.pinwheels.len() - positive,
        net_charge: run.net_charge(),
        boundary_charge: 0.5 * run.boundary_winding as f64,
        charges_quantized: run.pinwheels.iter().all(|p| p.charge.abs() == 0.5),
        peak_radius: run.annulus.peak_radius,
        bin_width: run.spectrum.bin_width(),
        fraction_in_annulus: run.annulus.fraction_in_annulus,
        fraction_in_annulus_selectivity: sel_metrics.fraction_in_annulus,
        orientation_histogram: run.omap.histogram(HISTOGRAM_BINS),
    };
    let text = json(&summary)?;
    out.write("summary.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: true,
    })
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    seed: u64,
    mutation: Option<Mutation>,
    #[serde(flatten)]
    suite: &'a SuiteReport,
}

pub fn cmd_validate(cfg: &RunConfig, mutation: Option<Mutation>) -> Result<Outcome> {
    let suite = run_suite(&SuiteOptions {
        seed: cfg.seed,
        mutation,
    })?;
    let text = json(&ValidateReport {
        seed: cfg.seed,
        mutation,
        suite: &suite,
    })?;
    let mut out = OutputDir::create(&cfg.out)?;
    out.write("validation.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: suite.all_passed,
    })
}

#[derive(Serialize)]
struct SpectrumReport {
    config: RunConfig,
    peak_bin: usize,
    bin_width: f64,
    dc: f64,
    total_power: f64,
    annulus: AnnulusMetrics,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.grid();
    let field = synthesize(cfg.omega, &coherent_state(&state_params(cfg))?, &grid)?;
    let spec = radial_power_spectrum(&field, None, cfg.window.into())?;
    let annulus = annulus_metrics(&spec, cfg.omega, cfg.epsilon)?;
    let mut out = OutputDir::create(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        out.write("spectrum.csv", &spectrum_csv(&spec))?;
    }
    if cfg.wants(Format::Png) {
        let pg = power_grid(&field, cfg.window.into());
        out.write(
            "spectrum.png",
            &png_bytes_gray(&log_power_image(pg.nx, pg.ny, &pg.values))?,
        )?;
    }
    let report = SpectrumReport {
        config: cfg.resolved(PhaseVariant::Zero),
        peak_bin: spec.peak_bin,
        bin_width: spec.bin_width(),
        dc: spec.dc,
        total_power: spec.total_power(),
        annulus,
    };
    let text = json(&report)?;
    out.write("spectrum.json", text.as_bytes())?;
    Ok(Outcome {
        files: out.written,
        report: text,
        success: true,
    })
}
