use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The step size violates `0 < s < 2 (1 - beta) / L_g`.
    #[error("step size s = {step} violates 0 < s < 2(1-beta)/L_g = {bound} (beta = {beta}, L_g = {lipschitz})")]
    Inadmissible {
        step: f64,
        beta: f64,
        lipschitz: f64,
        bound: f64,
    },

    #[error("non-finite value at iteration {n}: {iterate:?}")]
    Divergence { n: usize, iterate: Vec<f64> },

    #[error("no critical index found up to n_max = {n_max}; last violating n = {last_violation}")]
    CriticalIndexNotFound { n_max: usize, last_violation: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: dropped {dropped} of {total} non-positive values")]
    DegenerateFit { dropped: usize, total: usize },

    #[error("{what} = {value} outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("negative delta_{n} = {delta} inside the checked range; start at the critical index")]
    Range { n: usize, delta: f64 },

    #[error("unknown objective id `{0}`")]
    UnknownObjective(String),
}
