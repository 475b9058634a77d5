//! Error types shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("chain `{chain}` truncated at order {order}; higher derivative requested")]
    TruncationExceeded { chain: String, order: u32 },
    #[error("unknown symbol `{name}`")]
    UnknownSymbol { name: String },
    #[error("expressions come from different variable contexts")]
    ContextMismatch,
    #[error("substitution is missing a component for `{name}`")]
    MissingComponent { name: String },
    #[error("division by an expression that normalizes to zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum JetError {
    #[error("jets have different orders ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("jet is not regular: first-derivative entry vanishes")]
    NotRegular,
    #[error("jet inversion requires base point 0")]
    NonzeroBasePoint,
    #[error("scalar for the GL(1) action must be nonzero")]
    ZeroScalar,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WnError {
    #[error("Chern cocycle index p={p} out of range for n={n}")]
    IndexOutOfRange { p: usize, n: usize },
    #[error("basis size {size} exceeds the configured budget {budget}")]
    ResourceBudgetExceeded { size: usize, budget: usize },
    #[error("exact rank {exact} disagrees with rank {modular} mod {prime} in degree {degree}")]
    RankOracleMismatch { degree: usize, exact: usize, modular: usize, prime: u64 },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GkError {
    #[error("form is not basic: {check} fails, witness {witness}")]
    NotBasic { check: BasicCheck, witness: String },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicCheck {
    Horizontality,
    Invariance,
}

impl std::fmt::Display for BasicCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasicCheck::Horizontality => write!(f, "horizontality"),
            BasicCheck::Invariance => write!(f, "invariance"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("insufficient working precision: {context}")]
    PrecisionInsufficient { context: String },
    #[error("numeric domain error: {context}")]
    Domain { context: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SiteError {
    #[error("malformed site: {reason}")]
    MalformedSite { reason: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CechError {
    #[error("cochain is not defined on required string {string}")]
    MissingString { string: String },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProbeError {
    #[error("candidate 1-form is not closed; d(lambda) has term {witness}")]
    CandidateNotClosed { witness: String },
    #[error("candidate 1-form is not invariant under the period-1 shift")]
    CandidateNotPeriodic,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Error)]
pub enum ParseError {
    #[error("parse error at byte {at}: {message}")]
    Syntax { at: usize, message: String },
}
