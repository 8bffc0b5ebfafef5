use std::fmt;
use std::process::ExitCode;

use twocenter::dynamics::DynamicsError;
use twocenter::invariants::InvariantError;
use twocenter::io::IoError;
use twocenter::regularization::LiftError;
use twocenter::topology::TopologyError;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// A computed quantity disagrees with its closed form (exit 1).
    Verification(String),
    /// Bad flags, files or preconditions (exit 2).
    Usage(String),
    /// Quadrature, tracing or genericity failure (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        use DynamicsError::*;
        match e {
            InvalidMass(_)
            | NonNegativeEnergy(_)
            | BelowCritical { .. }
            | NotCoprime { .. }
            | RotationNumberUnattainable { .. }
            | TooFewSamples(_)
            | CollisionOnTrace { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<LiftError> for CliError {
    fn from(e: LiftError) -> Self {
        match e {
            LiftError::Topology(t) => t.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        match e {
            InvariantError::Precondition(m) => CliError::Usage(m),
            InvariantError::Dynamics(d) => d.into(),
            InvariantError::Topology(t) => t.into(),
            InvariantError::Lift(l) => l.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
