use thiserror::Error;

/// Coarse classification of an [`Error`], shared by the CLI exit codes and
/// the C status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data: malformed systems, potentials or measures.
    Validation,
    /// A solver target that cannot be realized or certified.
    Solver,
    /// An iterative method ran out of budget.
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("transition matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("transition matrix has {rows} rows but alphabet size is {alphabet}")]
    DimensionMismatch { rows: usize, alphabet: usize },
    #[error("transition entry ({row},{col}) = {value} is not 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: u8 },
    #[error("symbol {symbol} has an empty {line}")]
    StrandedSymbol { symbol: usize, line: &'static str },
    #[error("transition matrix is not primitive (no positive power up to {bound})")]
    NotPrimitive { bound: usize },
    #[error("block length must be at least 1")]
    BlockLengthZero,
    #[error("symbol {symbol} is outside the alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("word {word} is not admissible")]
    InadmissibleWord { word: String },
    #[error("potential and system (or two potentials) live on different systems")]
    MismatchedSystem,
    #[error("symbol {symbol} has no self-loop")]
    NoSelfLoop { symbol: usize },
    #[error("word of length {found} is too short, need at least {needed}")]
    WordTooShort { needed: usize, found: usize },
    #[error("potential table is invalid: {0}")]
    InvalidPotential(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),
    #[error("power iteration did not converge after {iterations} iterations (defect {defect:e})")]
    NoConvergence { iterations: usize, defect: f64 },
    #[error("target {target} is outside the admissible range [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("target {target} is only reached in the zero-temperature limit (closest value {closest} at t = {t_max})")]
    AsymptoteUnreachable { target: f64, closest: f64, t_max: f64 },
    #[error("target {target} lies below the scanned range (lowest {lowest}) and the ground state is not unique")]
    NonUniqueGroundState { target: f64, lowest: f64 },
    #[error("target {target} falls inside a jump from {above} to {below} at t = {t} that no representable t resolves")]
    Discontinuity { target: f64, t: f64, below: f64, above: f64 },
    #[error("entropy increased from {previous} to {current} at sample {index}")]
    MonotonicityViolated { index: usize, previous: f64, current: f64 },
}

impl Error {
    /// Variant name, used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyAlphabet => "EmptyAlphabet",
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonBinaryEntry { .. } => "NonBinaryEntry",
            Error::StrandedSymbol { .. } => "StrandedSymbol",
            Error::NotPrimitive { .. } => "NotPrimitive",
            Error::BlockLengthZero => "BlockLengthZero",
            Error::SymbolOutOfRange { .. } => "SymbolOutOfRange",
            Error::InadmissibleWord { .. } => "InadmissibleWord",
            Error::MismatchedSystem => "MismatchedSystem",
            Error::NoSelfLoop { .. } => "NoSelfLoop",
            Error::WordTooShort { .. } => "WordTooShort",
            Error::InvalidPotential(_) => "InvalidPotential",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::TargetOutOfRange { .. } => "TargetOutOfRange",
            Error::AsymptoteUnreachable { .. } => "AsymptoteUnreachable",
            Error::NonUniqueGroundState { .. } => "NonUniqueGroundState",
            Error::Discontinuity { .. } => "Discontinuity",
            Error::MonotonicityViolated { .. } => "MonotonicityViolated",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence { .. } => ErrorKind::Convergence,
            Error::TargetOutOfRange { .. }
            | Error::AsymptoteUnreachable { .. }
            | Error::NonUniqueGroundState { .. }
            | Error::Discontinuity { .. } => ErrorKind::Solver,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
