use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, {cols} cols")]
    NotSquare { rows: usize, cols: usize },
    #[error("chain needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("row {row} sums to {sum} (off by more than the tolerance)")]
    RowSum { row: usize, sum: f64 },
    #[error("negative entry K({row},{col}) = {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("asymmetric support: K({x},{y}) > 0 but K({y},{x}) = 0")]
    AsymmetricSupport { x: usize, y: usize },
    #[error("support graph is not connected: components {components:?}")]
    NotIrreducible { components: Vec<Vec<usize>> },
    #[error("function value at state {state} is not finite")]
    NonFiniteValue { state: usize },
    #[error("uniformization truncation would need more than {cap} terms at t = {t}")]
    ToleranceUnreachable { t: f64, cap: usize },
    #[error("stationary solve failed: residual {residual}")]
    SolveFailed { residual: f64 },
    #[error("eigensolver stalled: residual {residual}")]
    EigenFailed { residual: f64 },
    #[error("exact isoperimetric enumeration capped at n = {cap}, got n = {n}")]
    TooLargeForExact { n: usize, cap: usize },
    #[error("heat kernel mass at state {state} is zero at t = {t}; log-ratio undefined")]
    ZeroMassState { state: usize, t: f64 },
    #[error("bisection bracket failed: d_TV({t_hi}) = {dtv} > {epsilon} after doubling cap")]
    BracketFailed { t_hi: f64, dtv: f64, epsilon: f64 },
    #[error("degenerate tail threshold: p^theta = {threshold} is too close to 1")]
    DegenerateThreshold { threshold: f64 },
    #[error("family generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class: 1 input error, 3 internal numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ToleranceUnreachable { .. }
            | Error::SolveFailed { .. }
            | Error::EigenFailed { .. }
            | Error::BracketFailed { .. }
            | Error::ZeroMassState { .. } => 3,
            _ => 1,
        }
    }
}
