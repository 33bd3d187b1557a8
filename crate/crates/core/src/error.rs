use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("couplings are not symmetric: J[{0}][{1}] != J[{1}][{0}]")]
    AsymmetricCouplings(usize, usize),
    #[error("coupling diagonal must be zero (spin {0})")]
    NonzeroSelfCoupling(usize),
    #[error("offsets must be strictly increasing (spin {0})")]
    OffsetsNotIncreasing(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid control pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid wires: {0}")]
    InvalidWires(String),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transition not resolvable: {0}")]
    Unresolvable(String),
    #[error("program needs {0} slices (limit 1e8); coarsen the step or shorten the program")]
    TooManySlices(u64),
    #[error("peak at {center_hz:.3} Hz is more than 2 bins from every transition")]
    UnassignablePeak { center_hz: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
