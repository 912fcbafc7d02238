//! Error types for the calculus, grouped by subsystem.

use thiserror::Error;

/// Failures raised by Chow ring construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("generator phi{index} does not exist on a level {level} tower")]
    GeneratorOutsideTower { index: u32, level: u32 },
    #[error("class is not homogeneous, codimensions present: {found:?}")]
    NotHomogeneous { found: Vec<u32> },
    #[error("integrand has codimension {found}, below the top codimension {top}")]
    CodimensionBelowTop { found: u32, top: u32 },
    #[error("tower level is {found}, operation requires level {expected}")]
    WrongLevel { expected: u32, found: u32 },
    #[error("duality system at level {level} is singular")]
    SingularPairing { level: u32 },
    #[error("pairing of {row} against {column} is not an integer: {value}")]
    NonIntegralPairing {
        row: String,
        column: String,
        value: String,
    },
    #[error("linear system for z2 is {0}")]
    BadZ2System(&'static str),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// Failures raised while forming or evaluating contact modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContactError {
    #[error("curve list has {curves} entries but order list has {orders}")]
    LengthMismatch { curves: usize, orders: usize },
    #[error("contact order must be at least 1, got {0}")]
    OrderTooSmall(u32),
    #[error("monomial {key} has non-base weight {weight}, family has {expected} parameters")]
    WeightMismatch {
        key: String,
        weight: u32,
        expected: u32,
    },
    #[error("family table has no value for monomial {key}")]
    MissingValue { key: String },
    #[error("orders contribute {sum} parameters, family has {expected}")]
    ParameterCountMismatch { sum: u32, expected: u32 },
    #[error("curve {index} is used at order {order} but carries no class number")]
    MissingClassNumber { index: usize, order: u32 },
    #[error("geometric basis has level {basis_level}, lift requested at level {requested}")]
    BasisLevelMismatch { basis_level: u32, requested: u32 },
    #[error("at least one curve is required")]
    EmptyProduct,
    #[error("malformed monomial key {key}: {message}")]
    BadKey { key: String, message: String },
}

/// Failures raised by branch parametrization analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BranchError {
    #[error("both coordinate series vanish below the truncation order")]
    ZeroBranch,
    #[error("{coordinate} series has a nonzero constant term, branch must pass through the chart origin")]
    NotCentered { coordinate: &'static str },
    #[error("parametrization is not primitive, exponent support has gcd {gcd}")]
    NonPrimitive { gcd: u32 },
    #[error(
        "series term at exponent {exponent} is at or beyond the truncation order {truncation}"
    )]
    BeyondTruncation { exponent: u32, truncation: u32 },
    #[error("series precision exhausted at level {level}, rerun with truncation order at least {required}")]
    PrecisionExhausted { level: u32, required: u32 },
    #[error("lift leaves the chart atlas at level {level}, kappa there has no chart value")]
    UnresolvedKappa { level: u32 },
    #[error("lift still has infinity hits or fails to immerse at level cap {cap}")]
    CapExceeded { cap: u32 },
    #[error("curve has singular branches but no class number was supplied")]
    ClassNumberRequired,
}

/// Failures raised by jet operators and universal equation matrices.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("operator Q is defined on secondary charts only")]
    QOnPrimaryChart,
    #[error("variable index {index} is outside a chart with {arity} variables")]
    VariableOutsideChart { index: usize, arity: usize },
    #[error("point has {found} coordinates, chart has {expected}")]
    PointArityMismatch { expected: usize, found: usize },
    #[error("polynomial is not homogeneous for the {grading} grading, offending monomials: {monomials:?}")]
    Inhomogeneous {
        grading: &'static str,
        monomials: Vec<String>,
    },
    #[error(
        "simple weight is defined on x-jet polynomials only, offending monomials: {monomials:?}"
    )]
    MixedVariables { monomials: Vec<String> },
    #[error("degree {degree} is too small, the rank bound needs degree at least {required}")]
    DegreeTooSmall { degree: u32, required: u32 },
    #[error("matrix holds symbolic entries, evaluate at a point first")]
    SymbolicEntries,
    #[error("lemma parameters out of range: {0}")]
    ParamsOutOfRange(String),
    #[error("fiber system needs at least one point")]
    EmptyFiberSystem,
    #[error("column {label} is not part of this matrix")]
    NoSuchColumn { label: String },
}

/// Failures raised while decoding structured input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field} must be an exact integer, got {text}")]
    NotAnInteger { field: String, text: String },
    #[error("{coordinate} series has a zero denominator at exponent {exponent}")]
    ZeroDenominator {
        coordinate: &'static str,
        exponent: u32,
    },
    #[error("{coordinate} series lists exponent {exponent} twice")]
    DuplicateExponent {
        coordinate: &'static str,
        exponent: u32,
    },
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Branch(#[from] BranchError),
}
