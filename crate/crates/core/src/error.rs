use std::fmt;

use thiserror::Error;

use crate::domain::{ActionKind, ContainerId, ObjectId, RegionId, StackId};

/// Which precondition an action broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownStack(StackId),
    SameStack(StackId),
    EmptySource(StackId),
    DestinationFull(StackId),
    ActionDisabled(ActionKind),
    ToppleCount { stack: StackId, count: usize, height: usize },
    ToppleCap { count: usize, cap: usize },
    NotOnTable(ObjectId),
    UnknownContainer(ContainerId),
    NotLoadable(ObjectId),
    ContainerFull(ContainerId),
    RegionMismatch { container: ContainerId, region: RegionId },
    NotInContainer(ObjectId),
    Other(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownStack(s) => write!(f, "unknown stack {s}"),
            Violation::SameStack(s) => write!(f, "source and destination are both {s}"),
            Violation::EmptySource(s) => write!(f, "stack {s} is empty"),
            Violation::DestinationFull(s) => write!(f, "stack {s} is full"),
            Violation::ActionDisabled(k) => write!(f, "{k:?} is disabled for this instance"),
            Violation::ToppleCount { stack, count, height } => {
                write!(f, "cannot topple {count} from {stack} of height {height}")
            }
            Violation::ToppleCap { count, cap } => write!(f, "topple of {count} exceeds cap {cap}"),
            Violation::NotOnTable(o) => write!(f, "{o} is not on the table"),
            Violation::UnknownContainer(c) => write!(f, "unknown container {c}"),
            Violation::NotLoadable(o) => write!(f, "{o} cannot be loaded from its location"),
            Violation::ContainerFull(c) => write!(f, "container {c} is full"),
            Violation::RegionMismatch { container, region } => {
                write!(f, "container {container} cannot serve region {region}")
            }
            Violation::NotInContainer(o) => write!(f, "{o} is not in a container"),
            Violation::Other(msg) => f.write_str(msg),
        }
    }
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("precondition violated: {which}")]
    PreconditionViolated { which: Violation },
    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("search budget exceeded after {states_explored} states")]
    BudgetExceeded { states_explored: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("stack {stack} has invalid height {height}")]
    InvalidDescriptor { stack: usize, height: usize },
    #[error("object {object} sits {above} deep on a stack of height {height}")]
    HeightOverflow { object: ObjectId, above: usize, height: usize },
    #[error("{object} rests where this gadget has no node")]
    UnsupportedLocation { object: ObjectId },
    #[error("node {node} holds {count} objects, capacity {capacity}")]
    CapacityExceeded { node: usize, count: usize, capacity: usize },
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("cyclic dependencies among moves at timestep {t}")]
    LinearizationCycle { t: usize },
    #[error("malformed solution at timestep {t}: {msg}")]
    Malformed { t: usize, msg: String },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{objects} objects do not fit in capacity {capacity}")]
    CapacityExceeded { objects: usize, capacity: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
