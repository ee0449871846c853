use thiserror::Error;

/// Which unknown of the pair an error or value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    U,
    V,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::U => f.write_str("u"),
            Component::V => f.write_str("v"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(String),

    #[error("edge {0}-{1} has nonpositive weight {2}")]
    NonPositiveWeight(String, String, f64),

    #[error("vertex {0} has nonpositive measure {1}")]
    NonPositiveMeasure(String, f64),

    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(String, String),

    #[error("self-loop at vertex {0}")]
    SelfLoop(String),

    #[error("duplicate vertex label {0}")]
    DuplicateLabel(String),

    #[error("potential {name} is negative ({value}) at vertex {vertex}")]
    NegativePotential {
        name: &'static str,
        vertex: String,
        value: f64,
    },

    #[error("{0} is empty")]
    EmptyDomain(&'static str),

    #[error("{component} is nonzero at vertex {vertex}, outside its admissible set")]
    DomainViolation {
        component: Component,
        vertex: String,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("size mismatch: expected {expected} vertex values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("coupling integral vanishes; the pair has no Nehari projection")]
    DegeneratePair,

    #[error("every restart collapsed to a pair with zero coupling")]
    AllRestartsDegenerate,

    #[error(
        "boundary of {domain} does not match the reference listing at vertex {vertex} ({detail})"
    )]
    BoundaryMismatch {
        domain: &'static str,
        vertex: String,
        detail: &'static str,
    },

    #[error("unknown vertex label {0}")]
    UnknownLabel(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A validation error raised while reading a file, with its position.
    #[error("line {line}, column {column}: {source}")]
    Located {
        line: usize,
        column: usize,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse error classes, each mapped to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Validation,
    Degenerate,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Parse => 2,
            ErrorCategory::Validation => 3,
            ErrorCategory::Degenerate => 4,
            ErrorCategory::Io => 1,
        }
    }
}

/// Exit code reserved for runs that finished without meeting the tolerance.
pub const EXIT_UNCONVERGED: i32 = 5;

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. } | Error::Csv(_) => ErrorCategory::Parse,
            Error::DegeneratePair | Error::AllRestartsDegenerate => ErrorCategory::Degenerate,
            Error::Io(_) => ErrorCategory::Io,
            Error::Located { source, .. } => source.category(),
            _ => ErrorCategory::Validation,
        }
    }

    pub(crate) fn at(self, line: usize, column: usize) -> Self {
        Error::Located {
            line,
            column,
            source: Box::new(self),
        }
    }

    /// The underlying error with any file position stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Located { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
