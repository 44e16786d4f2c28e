use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("mesh tangled: nonpositive Jacobian in cell {cell}")]
    MeshTangled { cell: usize },
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("singular linear system: {0}")]
    SolverSingular(String),
}

pub type CoreResult<T> = Result<T, CoreError>;
