use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("density {rho} outside [0, {jam}]")]
    Domain { rho: f64, jam: f64 },

    #[error("invalid traffic state (D={demand}, S={supply}) for capacity {capacity}")]
    InvalidState {
        demand: f64,
        supply: f64,
        capacity: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("CFL condition violated: max wave speed * dt / dx = {courant} > 1")]
    Cfl { courant: f64 },

    #[error("numerical instability at step {step}: link {link} cell {cell} density {rho}")]
    NumericalStability {
        step: usize,
        link: usize,
        cell: usize,
        rho: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
