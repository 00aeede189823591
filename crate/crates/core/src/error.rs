use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("state not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix not Hermitian: max |ρ − ρ†| / 2 = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace} differs from 1")]
    BadTrace { trace: f64 },

    #[error("matrix not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("cutoffs ({found1}, {found2}) too small; need at least ({need1}, {need2})")]
    CutoffTooSmall {
        need1: usize,
        need2: usize,
        found1: usize,
        found2: usize,
    },

    #[error(
        "kernel mass {mass} in [0, {omega_range}] below 1 - {tolerance:e}; use omega range >= {required_omega_range}"
    )]
    KernelLeakage {
        mass: f64,
        omega_range: usize,
        tolerance: f64,
        required_omega_range: usize,
    },

    #[error("integration error estimate {estimate:e} exceeds {limit:e}; use dt <= {suggested_dt:e}")]
    StepTooLarge {
        estimate: f64,
        limit: f64,
        suggested_dt: f64,
    },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
