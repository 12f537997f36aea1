use thiserror::Error;

/// Errors raised by the fitting library and the command-line driver.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum WqisaError {
    #[error("invalid domain: lower bound {a} must be strictly less than upper bound {b}")]
    InvalidDomain { a: f64, b: f64 },

    #[error("too few basis functions: n = {n} but degree {degree} needs at least {}", degree + 1)]
    TooFewFunctions { n: usize, degree: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("basis index {index} out of range for a space of dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("point {point:?} lies outside the spline domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("knot {z} is not strictly inside the domain ({a}, {b})")]
    KnotOutsideDomain { z: f64, a: f64, b: f64 },

    #[error("inserting knot {z} would raise its multiplicity to {multiplicity} (maximum {max})")]
    MultiplicityOverflow {
        z: f64,
        multiplicity: usize,
        max: usize,
    },

    #[error("invalid weight parameters: {0}")]
    InvalidWeight(String),

    #[error("empty input")]
    EmptyInput,

    #[error("k = {k} is out of range for a cloud of {n} points")]
    KOutOfRange { k: usize, n: usize },

    #[error("{}", empty_support_message(.sites))]
    EmptySupport { sites: Vec<Vec<f64>> },

    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("fold count {folds} is invalid for {n} points (need n >= folds >= 2)")]
    FoldTooSmall { folds: usize, n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty point set")]
    EmptySet,

    #[error("reference cloud has zero diameter")]
    ZeroDiameter,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown synthetic kind '{0}'")]
    UnknownKind(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn empty_support_message(sites: &[Vec<f64>]) -> String {
    let shown: Vec<String> = sites.iter().take(8).map(|s| format!("{s:?}")).collect();
    let more = if sites.len() > 8 {
        format!(" and {} more", sites.len() - 8)
    } else {
        String::new()
    };
    format!(
        "empty weight support at {} knot average(s): {}{}",
        sites.len(),
        shown.join(", "),
        more
    )
}

impl WqisaError {
    /// Stable machine-readable tag used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            WqisaError::InvalidDomain { .. } => "invalid-domain",
            WqisaError::TooFewFunctions { .. } => "too-few-functions",
            WqisaError::InvalidKnots(_) => "invalid-knots",
            WqisaError::InvalidDegree(_) => "invalid-degree",
            WqisaError::IndexOutOfRange { .. } => "index-out-of-range",
            WqisaError::OutOfDomain { .. } => "out-of-domain",
            WqisaError::DimensionMismatch { .. } => "dimension-mismatch",
            WqisaError::KnotOutsideDomain { .. } => "knot-outside-domain",
            WqisaError::MultiplicityOverflow { .. } => "multiplicity-overflow",
            WqisaError::InvalidWeight(_) => "invalid-weight",
            WqisaError::EmptyInput => "empty-input",
            WqisaError::KOutOfRange { .. } => "k-out-of-range",
            WqisaError::EmptySupport { .. } => "empty-support",
            WqisaError::TooFewPoints { .. } => "too-few-points",
            WqisaError::FoldTooSmall { .. } => "fold-too-small",
            WqisaError::LengthMismatch { .. } => "length-mismatch",
            WqisaError::EmptySet => "empty-set",
            WqisaError::ZeroDiameter => "zero-diameter",
            WqisaError::InvalidParameter(_) => "invalid-parameter",
            WqisaError::Parse { .. } => "parse-error",
            WqisaError::UnknownKind(_) => "unknown-kind",
            WqisaError::Io(_) => "io-error",
        }
    }
}

impl From<std::io::Error> for WqisaError {
    fn from(e: std::io::Error) -> Self {
        WqisaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, WqisaError>;
