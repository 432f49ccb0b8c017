use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("circle grid size {0} is odd; spectral differentiation needs an even number of nodes")]
    OddGridSize(usize),

    #[error("circle functions have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("expectation of a self-adjoint operator has relative imaginary part {0:e}")]
    NotSelfAdjoint(f64),

    #[error("variance {0:e} is negative beyond round-off")]
    NegativeVariance(f64),

    #[error("exponent lambda*omega = {0} exceeds the overflow guard of 300")]
    ExponentOverflow(f64),

    #[error("grid pitch {pitch:.6} does not resolve the wavelength; need pitch <= {required:.6}")]
    UnderResolvedGrid { pitch: f64, required: f64 },

    #[error("<X3> = {0:e} vanishes; normalized uncertainties are undefined")]
    VanishingCommutator(f64),

    #[error("spectrum has no power outside the DC bin")]
    EmptySpectrum,
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than by
    /// the numerics themselves.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::OddGridSize(_)
                | Error::ExponentOverflow(_)
                | Error::UnderResolvedGrid { .. }
        )
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: reason() })
    }
}
