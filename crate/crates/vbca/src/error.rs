use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// One message per violated parameter constraint.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("swarm must contain at least one peripheral drone")]
    DegenerateSwarm,

    #[error("unknown drone id {0}")]
    UnknownDrone(u32),

    /// A peripheral drone no longer has the central drone in transmission range.
    #[error("drone {drone} lost the central drone{}", match .step { Some(s) => format!(" at step {s}"), None => String::new() })]
    ConnectivityLoss { drone: u32, step: Option<u32> },

    #[error("state has no peripheral drones")]
    NoPeripherals,

    #[error("state mismatch: {0}")]
    StateMismatch(String),

    #[error("drone {0} is coincident with the central drone; direction undefined")]
    DegenerateDirection(u32),

    #[error("no reference geometries for k = {0}; supported range is 2..=8")]
    UnsupportedK(usize),

    #[error("invalid argument: {0}")]
    Parameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
