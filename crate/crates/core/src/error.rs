use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// `(D - d) / L_k` left `[0, 1]`: the link cannot span the pipe, or the
    /// pipe is narrower than a module.
    #[error("geometry infeasible: (D - d)/L{link} = {ratio:.6} is outside [0, 1]")]
    GeometryInfeasible { link: usize, ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no static equilibrium: the robot cannot hold itself at D = {pipe_diameter} m, mu = {friction_coefficient}")]
    NoStaticEquilibrium {
        pipe_diameter: f64,
        friction_coefficient: f64,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("inconsistent linear system: residual {residual:e} exceeds {tolerance:e}")]
    InconsistentSystem { residual: f64, tolerance: f64 },

    #[error("no feasible point on the search grid ({evaluated} points evaluated)")]
    NoFeasiblePoint { evaluated: usize },

    #[error("zero deflection at joint J{joint}: |{deflection_deg:e}| deg is below tolerance")]
    ZeroDeflection { joint: usize, deflection_deg: f64 },

    #[error("linear program is unbounded")]
    Unbounded,
}

impl Error {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::GeometryInfeasible { .. } => "GeometryInfeasible",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoStaticEquilibrium { .. } => "NoStaticEquilibrium",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::NumericalBreakdown(_) => "NumericalBreakdown",
            Error::InconsistentSystem { .. } => "InconsistentSystem",
            Error::NoFeasiblePoint { .. } => "NoFeasiblePoint",
            Error::ZeroDeflection { .. } => "ZeroDeflection",
            Error::Unbounded => "Unbounded",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
