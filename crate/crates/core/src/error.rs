use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSpec(String),

    #[error("no characteristic polynomial: the AR part is empty")]
    NoCharacteristicPolynomial,

    #[error("root finder did not converge after {iterations} iterations (residuals {residuals:?})")]
    RootsNotConverged { iterations: usize, residuals: Vec<f64> },

    #[error("system unstable: pole modulus {modulus} (set the edge-of-stability override to allow |r| = 1)")]
    Unstable { modulus: f64 },

    #[error("no strictly dominant mode: |r1| = {r1}, |r2| = {r2}")]
    NoStrictlyDominantMode { r1: f64, r2: f64 },

    #[error("{case} precondition violated: {reason}")]
    PreconditionViolated { case: &'static str, reason: String },

    #[error("correlation decay coefficient a = {a} is not admissible (requires a < delta*C = {threshold})")]
    Inadmissible { a: f64, threshold: f64 },

    #[error("degenerate output: sigma_t^2 = {sigma2}")]
    DegenerateOutput { sigma2: f64 },

    #[error("lower bound on sigma_t^2 is not positive ({value}); the bound is vacuous")]
    VacuousLowerBound { value: f64 },

    #[error("invalid innovation distribution: {0}")]
    InvalidDistribution(String),

    #[error("s4 unavailable: {0}")]
    MomentUnavailable(String),

    #[error("t = {t} exceeds the impulse-response horizon {horizon}")]
    HorizonTooShort { t: usize, horizon: usize },

    #[error("sample size mismatch: {left} vs {right}")]
    SampleSizeMismatch { left: usize, right: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("distance below noise floor: {usable} usable rows, at least {required} required")]
    NoiseFloor { usable: usize, required: usize },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("{}", match line { Some(l) => format!("config error at line {l}: {message}"), None => format!("config error: {message}") })]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
