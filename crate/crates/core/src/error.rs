use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} components, got {got}")]
    Components { expected: usize, got: usize },

    #[error("zero mode carries {ratio:.3e} of the field norm; inverse Laplacian is undefined there")]
    ZeroMode { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice spacing {spacing:.4} does not resolve the wedge (need <= {limit:.4})")]
    Unresolved { spacing: f64, limit: f64 },

    #[error("step dt = {dt:.3e} violates CFL; suggested dt = {suggested:.3e}")]
    Cfl { dt: f64, suggested: f64 },

    #[error("non-finite values in the state at t = {t}")]
    NonFinite { t: f64 },

    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
