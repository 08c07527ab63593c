use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("invalid qubit selection: {0}")]
    Qubits(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("eigenvalue {0:.3e} is below the admissible floor of -1e-10")]
    NegativeEigenvalue(f64),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("Pauli index {0} is outside 0..=3")]
    PauliIndex(u8),

    #[error("canonical decomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid ensemble: {0}")]
    Ensemble(String),

    #[error("invalid protocol: {0}")]
    Protocol(String),

    #[error("protocol is not error-free; worst fidelity {worst:.6} at x={x:#b}, y={y:#b}")]
    ImperfectProtocol {
        worst: f64,
        x: usize,
        y: usize,
        table: Vec<(usize, usize, f64)>,
    },

    #[error("invalid gate spec: {0}")]
    GateSpec(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
