//! Error types, grouped by the module that raises them.

use thiserror::Error;

/// Errors raised while building or querying a truncated rooted tree.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("cycle detected through vertex {vertex}")]
    CycleDetected { vertex: String },
    #[error("vertex {vertex} is listed as a child of both {first} and {second}")]
    MultipleParents {
        vertex: String,
        first: String,
        second: String,
    },
    #[error("vertex {vertex} at depth {depth} has no children but truncation depth is {truncation}; every non-leaf level must be full")]
    LeafBeforeTruncation {
        vertex: String,
        depth: usize,
        truncation: usize,
    },
    #[error("tree spec has no vertices")]
    EmptySpec,
    #[error("requested index {requested} exceeds truncation depth {truncation} and no tail rule is attached")]
    DepthOutOfRange { requested: usize, truncation: usize },
    #[error("quantity is undecidable from the truncated prefix alone: {what}")]
    UndecidableWithoutTail { what: String },
    #[error("tail rule is inconsistent with the truncated prefix: {reason}")]
    InvalidTailSpec { reason: String },
    #[error("vertex id {vertex} does not exist")]
    UnknownVertex { vertex: String },
    #[error("vertex {vertex} has children but is not reachable from the root")]
    UnreachableVertex { vertex: String },
}

/// Errors raised while building or applying a weighted shift.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("family weights need q >= 1, got q = {q}")]
    QTooSmall { q: f64 },
    #[error("weight for vertex {vertex} must be positive and finite, got {value}")]
    NonPositiveWeight { vertex: usize, value: f64 },
    #[error("no weight supplied for non-root vertex {vertex}")]
    MissingWeight { vertex: usize },
    #[error("weight supplied for vertex {vertex}, which is not in the tree (or is the root)")]
    ExtraneousWeight { vertex: String },
    #[error("moment order {order} from depth {depth} exceeds truncation depth {truncation}")]
    IndexOutOfRange {
        order: usize,
        depth: usize,
        truncation: usize,
    },
    #[error("operation requires a balanced shift: {witness}")]
    NotBalanced { witness: String },
}

/// Errors raised by wandering-subspace computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WanderingError {
    #[error("branching vertex {vertex} has an empty child list")]
    EmptyChildList { vertex: usize },
    #[error("window {window} leaves no wandering block inside truncation depth {truncation}")]
    TruncationOverflow { window: usize, truncation: usize },
}

/// Errors raised while classifying moment sequences.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("closed-form sequence needs q >= 1, got q = {q}")]
    QTooSmall { q: f64 },
    #[error("sequence spec contains no terms")]
    EmptySpec,
    #[error("term {index} is not available from a prefix of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequence term at index {index} must be positive and finite, got {value}")]
    NonPositiveTerm { index: usize, value: f64 },
}

/// Errors raised by equivalence deciders and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivalenceError {
    #[error("{side} moment sequence is not non-periodic ({kind}); the two-invariant criterion does not apply")]
    NotNonPeriodic { side: String, kind: String },
    #[error("{side} shift is not balanced: {witness}")]
    NotBalanced { side: String, witness: String },
    #[error("{side} shift is not isometric: vertex {vertex} has local norm {norm}")]
    NotIsometric {
        side: String,
        vertex: usize,
        norm: f64,
    },
    #[error("kernel block dimensions differ at block {index}: {left} vs {right}")]
    DimensionMismatch {
        index: usize,
        left: usize,
        right: usize,
    },
    #[error("generation norms differ at index {index}: {left} vs {right} (relative gap {gap:.3e})")]
    MomentMismatch {
        index: usize,
        left: f64,
        right: f64,
        gap: f64,
    },
    #[error("window {window} leaves no comparable block inside both truncations")]
    TruncationOverflow { window: usize },
    #[error("specs cannot be compared: {reason}")]
    IncompatibleSpecs { reason: String },
}

/// Errors raised by the analytic model (kernel evaluation, duals, radii).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("evaluation point with modulus {modulus:.6} reaches the model disc radius {radius:.6}")]
    RadiusExceeded { modulus: f64, radius: f64 },
    #[error("shift is not left-invertible: generation norm c_{index} = {value:.3e} is below the safe floor")]
    NotLeftInvertible { index: usize, value: f64 },
    #[error("series order {order} needs moment index {index}, which the sequence spec cannot supply")]
    IndexOutOfRange { order: usize, index: usize },
    #[error("window {window} leaves nothing to check inside truncation depth {truncation}")]
    TruncationOverflow { window: usize, truncation: usize },
    #[error("operation requires a balanced shift: {witness}")]
    NotBalanced { witness: String },
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Errors raised while reading spec files or running the command line.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("spec parse error in {path}: {reason}")]
    SpecParseError { path: String, reason: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Top-level error type of the command-line driver; every variant maps to
/// exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Wandering(#[from] WanderingError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
