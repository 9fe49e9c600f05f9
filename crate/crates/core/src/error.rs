use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("degenerate reconstruction stencil for cell {cell}")]
    DegenerateStencil { cell: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("linear solver diverged: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure at step {step}, cell {cell}: {msg}")]
    StepFailure { step: usize, cell: usize, msg: String },

    #[error("refusing to write non-finite field value in cell {cell}")]
    NonFinite { cell: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
