use thiserror::Error;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("polynomials are expanded in incompatible frames")]
    IncompatibleFrames,

    #[error("invalid space parameters: {0}")]
    InvalidParams(String),

    #[error("mesh format error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh: cell {cell}: {message}")]
    InvalidCell { cell: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown mesh family `{0}`")]
    UnknownFamily(String),

    #[error("unknown manufactured solution `{0}`")]
    UnknownSolution(String),

    #[error("cell {cell}: degenerate triangle in quadrature fan")]
    DegenerateFan { cell: usize },

    #[error("edge derivative order {j} out of range 0..{max}")]
    OrderOutOfRange { j: usize, max: usize },

    #[error("enhanced projector requested but the space is not enhanced")]
    NotEnhanced,

    #[error("singular local system in cell {cell}: {what}")]
    SingularLocal { cell: usize, what: &'static str },

    #[error("inconsistent boundary constraints (residual {residual:.3e})")]
    InconsistentConstraints { residual: f64 },

    #[error("reduced system is not symmetric positive definite")]
    NotSpd,

    #[error("linear solve residual {0:.3e} exceeds tolerance")]
    Residual(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl VemError {
    /// Bad input rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            VemError::InvalidParams(_)
                | VemError::Parse { .. }
                | VemError::InvalidCell { .. }
                | VemError::InvalidMesh(_)
                | VemError::UnknownFamily(_)
                | VemError::UnknownSolution(_)
                | VemError::Io(_)
                | VemError::Csv(_)
        )
    }
}

pub type Result<T, E = VemError> = std::result::Result<T, E>;
