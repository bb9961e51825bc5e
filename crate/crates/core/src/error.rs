use num_complex::Complex64;

/// Failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed input: bad shapes, unparsable specs, invalid options.
    Input,
    /// A mathematical precondition does not hold for the given data.
    Precondition,
    /// The numerics did not converge or could not certify a result.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite entry in matrix")]
    NonFinite,
    #[error("resolvent is singular at {0}: the point lies in or near the spectrum")]
    SingularResolvent(Complex64),
    #[error("matrix is numerically singular (pivot {pivot})")]
    SingularMatrix { pivot: usize },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("cannot separate: {0}")]
    CannotSeparate(String),
    #[error("quadrature stalled at {nodes} nodes per component (error estimate {error_estimate:.3e})")]
    QuadratureStall { nodes: usize, error_estimate: f64 },
    #[error("unknown builtin function `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("nu = {0} lies on the spectrum of the transformator")]
    NuInSpectrum(Complex64),
    #[error("method not applicable: {0}")]
    MethodNotApplicable(String),
    #[error("spectra not separable: sigma(A) and sigma(B) overlap (distance {distance:.3e})")]
    SpectraOverlap { distance: f64 },
    #[error("product of spectra hits 1 (min |1 - lambda mu| = {distance:.3e})")]
    ProductSpectrumHitsOne { distance: f64 },
    #[error("Z is not a solution of the Riccati equation (relative residual {residual:.3e})")]
    NotASolution { residual: f64 },
    #[error("pencil is singular at {0}")]
    SingularPencil(Complex64),
    #[error("Newton iteration stalled after {iterations} iterations (relative residual {residual:.3e})")]
    NewtonStall { iterations: usize, residual: f64 },
    #[error("series diverges: terms grew for {0} consecutive steps")]
    DivergenceDetected(usize),
    #[error("differential is degenerate: 0 lies in its spectrum (min |f[1]| = {distance:.3e})")]
    DegenerateDifferential { distance: f64 },
    #[error("result failed residual certification (relative residual {residual:.3e} > {tolerance:.1e})")]
    ResidualCheckFailed { residual: f64, tolerance: f64 },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            ShapeMismatch(_) | InvalidInput(_) | NonFinite | UnknownBuiltin(_) | UnknownKernel(_)
            | InvalidParams(_) | Parse(_) => ErrorCategory::Input,
            SingularResolvent(_)
            | SingularMatrix { .. }
            | NotApplicable(_)
            | CannotSeparate(_)
            | NuInSpectrum(_)
            | MethodNotApplicable(_)
            | SpectraOverlap { .. }
            | ProductSpectrumHitsOne { .. }
            | NotASolution { .. }
            | SingularPencil(_)
            | DegenerateDifferential { .. } => ErrorCategory::Precondition,
            NoConvergence { .. }
            | QuadratureStall { .. }
            | NewtonStall { .. }
            | DivergenceDetected(_)
            | ResidualCheckFailed { .. } => ErrorCategory::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
