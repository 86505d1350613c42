use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("malformed jet suffix `{text}` at byte {offset}")]
    MalformedJet { text: String, offset: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("logarithm of zero")]
    LogOfZero,

    #[error("jet order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("jet coordinate `{0}` can only be bound through the jet-aware substitution")]
    JetBinding(String),

    #[error("inconsistent assumptions: {0}")]
    Inconsistent(String),

    #[error("cannot solve zero constraint `{0}` for a parameter with a nonvanishing coefficient")]
    UnsolvableConstraint(String),

    #[error("assumption `{0}` is not a polynomial in parameters and constants")]
    NotParametric(String),

    #[error("family constraint violated: {0}")]
    FamilyConstraint(String),

    #[error("{0}")]
    Contract(String),

    #[error("expression is not polynomial in the jet coordinates: {0}")]
    NonPolynomialInJets(String),

    #[error("no certificate found at r = {r}, deg = {deg}")]
    Inconclusive { r: usize, deg: usize },

    #[error("elimination needs `{0}` to be nonzero, which the assumptions do not license")]
    UnlicensedPivot(String),

    #[error("substitution has a nonzero self-adjointness defect")]
    NonzeroDefect,

    #[error("products of more than two transcendental atoms are not supported: {0}")]
    AtomDegree(String),

    #[error("cannot evaluate `{0}` at the given point")]
    Unevaluable(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
