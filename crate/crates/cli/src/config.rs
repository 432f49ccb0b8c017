use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use pinwheel_core::coherent::{PhaseSpec, DEFAULT_PHASE_AMPLITUDE, DEFAULT_PHASE_CUTOFF};
use pinwheel_core::pinwheel::{Estimator, StateFamily};
use pinwheel_core::pipeline::PipelineParams;
use pinwheel_core::spectrum::{OrderWeighting, Window};
use pinwheel_core::synthesis::{ActivityMode, GridSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PhaseVariant {
    Zero,
    Linear,
    RandomSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    RealPart,
    Modulus,
    Phase,
}

impl From<ModeArg> for ActivityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::RealPart => ActivityMode::RealPart,
            ModeArg::Modulus => ActivityMode::Modulus,
            ModeArg::Phase => ActivityMode::Phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    VectorSum,
    Argmax,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::VectorSum => Estimator::VectorSum,
            EstimatorArg::Argmax => Estimator::Argmax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightingArg {
    Selectivity,
    Magnitude,
}

impl From<WeightingArg> for OrderWeighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Selectivity => OrderWeighting::Selectivity,
            WeightingArg::Magnitude => OrderWeighting::Magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WindowArg {
    None,
    Hann,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::None => Window::None,
            WindowArg::Hann => Window::Hann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Pgm,
    Png,
    Svg,
}

/// Fully resolved run configuration. The TOML file uses these key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega: f64,
    pub lambda: f64,
    /// Stored reduced to `[0, π)`.
    pub theta: f64,
    /// Unset means per-command default: zero for single states, random
    /// smooth for pinwheel maps.
    pub phase: Option<PhaseVariant>,
    pub seed: u64,
    pub cutoff: u32,
    pub amplitude: f64,
    /// Slope of the linear phase; must be an even integer.
    pub phase_slope: f64,
    pub n_orient: usize,
    pub nx: usize,
    pub ny: usize,
    /// Unset means `8π/Ω`.
    pub half_width: Option<f64>,
    pub m: usize,
    pub mode: ModeArg,
    pub estimator: EstimatorArg,
    pub weighting: WeightingArg,
    pub window: WindowArg,
    pub epsilon: f64,
    pub fan_k: Vec<f64>,
    pub fan_s_max: f64,
    pub fan_steps: usize,
    pub q1: f64,
    pub q2: f64,
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            lambda: 0.5,
            theta: 0.0,
            phase: None,
            seed: 0,
            cutoff: DEFAULT_PHASE_CUTOFF,
            amplitude: DEFAULT_PHASE_AMPLITUDE,
            phase_slope: 2.0,
            n_orient: 8,
            nx: 256,
            ny: 256,
            half_width: None,
            m: 256,
            mode: ModeArg::RealPart,
            estimator: EstimatorArg::VectorSum,
            weighting: WeightingArg::Magnitude,
            window: WindowArg::None,
            epsilon: 0.15,
            fan_k: pinwheel_core::se2::default_fan_curvatures(),
            fan_s_max: 2.0,
            fan_steps: 200,
            q1: 0.0,
            q2: 0.0,
            out: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Pgm, Format::Png, Format::Svg],
        }
    }
}

/// Flags that override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Radius of the frequency circle.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Concentration of the coherent-state bell.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Stimulus orientation; reduced mod π.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub phase: Option<PhaseVariant>,
    /// Seed of the random smooth phase.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Highest harmonic of the random smooth phase.
    #[arg(long, global = true)]
    pub cutoff: Option<u32>,
    /// Peak of the random smooth phase.
    #[arg(long, global = true)]
    pub amplitude: Option<f64>,
    /// Slope of the linear phase (even integer).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phase_slope: Option<f64>,
    #[arg(long, global = true)]
    pub n_orient: Option<usize>,
    /// Nodes per grid axis.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Grid covers [-half_width, half_width)^2.
    #[arg(long, global = true)]
    pub half_width: Option<f64>,
    /// Circle resolution.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Amplitude of the order field used for the spectrum.
    #[arg(long, global = true, value_enum)]
    pub weighting: Option<WeightingArg>,
    #[arg(long, global = true, value_enum)]
    pub window: Option<WindowArg>,
    /// Relative half-width of the annulus around the circle radius.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Curvatures of the fan, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub fan_k: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub fan_s_max: Option<f64>,
    #[arg(long, global = true)]
    pub fan_steps: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q2: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Export formats, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Flat TOML file with the same keys as the resolved config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident, $($field:ident),*) => {
        $(if let Some(v) = $ov.$field.clone() { $cfg.$field = v; })*
    };
}

impl RunConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(e),
        })
    }

    /// Defaults, then the config file, then flags; validated.
    pub fn load(ov: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match &ov.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                Self::from_toml_str(&text, path)?
            }
            None => Self::default(),
        };
        apply!(
            cfg,
            ov,
            omega,
            lambda,
            theta,
            seed,
            cutoff,
            amplitude,
            phase_slope,
            n_orient,
            m,
            mode,
            estimator,
            weighting,
            window,
            epsilon,
            fan_k,
            fan_s_max,
            fan_steps,
            q1,
            q2,
            out,
            formats
        );
        if let Some(p) = ov.phase {
            cfg.phase = Some(p);
        }
        if let Some(n) = ov.grid_n {
            cfg.nx = n;
            cfg.ny = n;
        }
        if let Some(h) = ov.half_width {
            cfg.half_width = Some(h);
        }
        cfg.validate()?;
        cfg.theta = pinwheel_core::se2::normalize_orientation(cfg.theta);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("{v} must be a positive finite number")))
            }
        };
        positive("omega", self.omega)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("{} must be non-negative", self.lambda)));
        }
        if !self.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", format!("{} must be non-negative", self.amplitude)));
        }
        if self.cutoff == 0 {
            return Err(invalid("cutoff", "must be at least 1"));
        }
        if !(self.phase_slope.is_finite() && (self.phase_slope / 2.0).fract() == 0.0) {
            return Err(invalid(
                "phase_slope",
                format!("{} must be an even integer", self.phase_slope),
            ));
        }
        if self.n_orient < 2 {
            return Err(invalid("n_orient", format!("{} must be at least 2", self.n_orient)));
        }
        for (key, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 8 {
                return Err(invalid(key, format!("{n} must be at least 8")));
            }
        }
        if let Some(h) = self.half_width {
            positive("half_width", h)?;
        }
        if self.m < 8 || !self.m.is_multiple_of(2) {
            return Err(invalid("m", format!("{} must be even and at least 8", self.m)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{} must lie in (0, 1)", self.epsilon)));
        }
        if self.fan_k.is_empty() || self.fan_k.iter().any(|k| !k.is_finite()) {
            return Err(invalid("fan_k", "must be a non-empty list of finite curvatures"));
        }
        positive("fan_s_max", self.fan_s_max)?;
        if self.fan_steps < 2 {
            return Err(invalid("fan_steps", "must be at least 2"));
        }
        if !(self.q1.is_finite() && self.q2.is_finite()) {
            return Err(invalid("q1", "base point must be finite"));
        }
        if self.formats.is_empty() {
            return Err(invalid("formats", "at least one format is required"));
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            half_width: self.half_width.unwrap_or(8.0 * PI / self.omega),
        }
    }

    pub fn phase_spec(&self, default: PhaseVariant) -> PhaseSpec {
        match self.phase.unwrap_or(default) {
            PhaseVariant::Zero => PhaseSpec::Zero,
            PhaseVariant::Linear => PhaseSpec::Linear { c: self.phase_slope },
            PhaseVariant::RandomSmooth => PhaseSpec::RandomSmooth {
                seed: self.seed,
                cutoff: self.cutoff,
                amplitude: self.amplitude,
            },
        }
    }

    /// Copy with the per-command phase default filled in, for echoing.
    pub fn resolved(&self, default: PhaseVariant) -> Self {
        Self {
            phase: Some(self.phase.unwrap_or(default)),
            half_width: Some(self.grid().half_width),
            ..self.clone()
        }
    }

    pub fn pipeline(&self) -> PipelineParams {
        PipelineParams {
            family: StateFamily {
                omega: self.omega,
                lambda: self.lambda,
                phase: self.phase_spec(PhaseVariant::RandomSmooth),
                m: self.m,
            },
            n_orient: self.n_orient,
            grid: self.grid(),
            mode: self.mode.into(),
            estimator: self.estimator.into(),
            weighting: self.weighting.into(),
            epsilon: self.epsilon,
        }
    }

    /// One canonical TOML rendering of the config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
