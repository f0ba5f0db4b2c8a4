use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid of {m} samples cannot resolve radius {k} (need at least {need})")]
    GridTooSmall { m: usize, k: usize, need: usize },
    #[error("energy index {0} is outside 0..=3")]
    InvalidEnergyIndex(usize),
    #[error("operation requires a real-valued (Hermitian) field")]
    NotReal,
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown multiplier {0}")]
    UnknownMultiplier(String),
    #[error("direct symmetrization over {0}! permutations is not supported")]
    SymmetrizeTooLarge(usize),
    #[error("tuple budget exceeded: estimated {estimated} tuples, limit {limit}")]
    BudgetExceeded { estimated: u128, limit: u128 },
    #[error("time step diverged at t = {t}")]
    StepDiverged { t: f64 },
    #[error("Picard iteration failed at t = {t} after {iters} iterations (residual {residual:e})")]
    PicardDiverged { t: f64, iters: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no admissible tuples for {0}")]
    HypothesisEmpty(String),
}

pub type Result<T> = std::result::Result<T, Error>;
