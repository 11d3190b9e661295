use thiserror::Error;

/// Errors raised by the kernel, oracle, classifier and domain routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain parameters: {0}")]
    InvalidSpec(String),

    #[error("point is not in the domain: {0}")]
    NotInDomain(String),

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("base point must lie in the open unit ball (norm {0})")]
    InvalidBasePoint(f64),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("series cutoff {cutoff} too small: tail estimate {tail:e} exceeds 10% of |value| = {value:e}")]
    CutoffTooSmall { cutoff: usize, tail: f64, value: f64 },

    #[error("polynomial has no nonzero coefficients")]
    DegenerateZeroPolynomial,

    #[error("root finder failed: {0}")]
    RootFinderFailed(String),

    #[error("no sign change of the margin on [{lo}, {hi}] (margins {margin_lo:e}, {margin_hi:e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        margin_lo: f64,
        margin_hi: f64,
    },

    #[error("witness |s| = {0} is not inside the unit disk")]
    InadmissibleWitness(f64),

    #[error("kernel vanishes along the evaluation path: {0}")]
    KernelZeroOnPath(String),

    #[error("metric matrix is singular or ill-conditioned (condition number {0:e})")]
    SingularMetric(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported Cartan domain kind: {0}")]
    UnsupportedKind(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NotInDomain(_) => "NotInDomain",
            Error::NumericalOverflow(_) => "NumericalOverflow",
            Error::InvalidBasePoint(_) => "InvalidBasePoint",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::CutoffTooSmall { .. } => "CutoffTooSmall",
            Error::DegenerateZeroPolynomial => "DegenerateZeroPolynomial",
            Error::RootFinderFailed(_) => "RootFinderFailed",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::InadmissibleWitness(_) => "InadmissibleWitness",
            Error::KernelZeroOnPath(_) => "KernelZeroOnPath",
            Error::SingularMetric(_) => "SingularMetric",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::UnsupportedKind(_) => "UnsupportedKind",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::NumericalOverflow(_)
                | Error::InsufficientSamples(_)
                | Error::CutoffTooSmall { .. }
                | Error::DegenerateZeroPolynomial
                | Error::RootFinderFailed(_)
                | Error::SingularMetric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
