use thiserror::Error;

/// Errors raised while reading instance files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown field `{field}`")]
    UnknownField { line: usize, field: String },
    #[error("line {line}: interval inverted (bt {bt} > et {et})")]
    IntervalInverted { line: usize, bt: f64, et: f64 },
    #[error("line {line}: vertex {vertex} outside [0, {n_vertices})")]
    UnknownVertex { line: usize, vertex: usize, n_vertices: usize },
    #[error("missing header `{0}`")]
    MissingHeader(&'static str),
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
}

/// Violations of the instance invariants.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("arc {arc}: tail equals head ({vertex})")]
    SelfLoop { arc: usize, vertex: usize },
    #[error("arc {arc}: vertex {vertex} outside [0, {n_vertices})")]
    VertexOutOfRange { arc: usize, vertex: usize, n_vertices: usize },
    #[error("arc {arc}: required arc must have positive demand")]
    NonPositiveDemand { arc: usize },
    #[error("arc {arc}: service window [{bt}, {et}] not inside [0, {horizon}]")]
    BadWindow { arc: usize, bt: f64, et: f64, horizon: f64 },
    #[error("arc {arc}: two-segment cost function must start its window at 0")]
    TwoSegmentWindow { arc: usize },
    #[error("capacity must be positive")]
    NonPositiveCapacity,
    #[error("planning horizon must be positive")]
    NonPositiveHorizon,
    #[error("slope must be non-negative")]
    NegativeSlope,
    #[error("vertex {to} unreachable from vertex {from}")]
    Unreachable { from: usize, to: usize },
    #[error("instance has no vertices")]
    Empty,
    #[error("generator: {0}")]
    Generator(String),
}

/// Errors from route and solution evaluation or move application.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("task {0} does not exist")]
    UnknownTask(usize),
    #[error("task {0} has no inverse arc and cannot be served reversed")]
    NotReversible(usize),
    #[error("task {0} served more than once")]
    DuplicateTask(usize),
    #[error("task {0} is not served")]
    MissingTask(usize),
    #[error("move position out of range: {0}")]
    OutOfRange(String),
}

/// Errors from the constructive heuristics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitError {
    #[error("task {0} cannot be served by any route, even alone")]
    InfeasibleTask(usize),
    #[error("no feasible plan was found")]
    NoFeasiblePlan,
}

/// Errors from the exact enumeration oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance has {tasks} tasks, oracle budget allows at most {max}")]
    BudgetExceeded { tasks: usize, max: usize },
    #[error("no feasible plan exists")]
    NoFeasiblePlan,
}

/// Errors reported by the statistics and metric helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("reference cost must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("rank-sum test needs at least two samples per group")]
    TooFewSamples,
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
}

/// Errors from departure-time optimization.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepartureError {
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("search interval [{lo}, {hi}] is empty")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("population needs at least two processes and a budget covering them")]
    BadNcsParams,
}
