use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a BDF3 mesh needs at least 4 steps, got {0}")]
    TooFewSteps(usize),

    #[error("periodic-ratio mesh needs an even number of steps, got {0}")]
    OddStepCount(usize),

    #[error("invalid value for {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("step index {index} outside the admissible range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("expected at least {need} values, got {got}")]
    NotEnoughValues { need: usize, got: usize },

    #[error("grid size {0} is not a power of two (>= 2)")]
    NotPowerOfTwo(usize),

    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("no sign change of the defining equation on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("nonpositive implicit multiplier {value:e} for Fourier mode ({k1}, {k2}) at step {step}")]
    NonpositiveMultiplier {
        step: usize,
        k1: i64,
        k2: i64,
        value: f64,
    },

    #[error("malformed report: {0}")]
    Parse(String),
}
