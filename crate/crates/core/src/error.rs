use crate::world::LayoutKind;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no collision-free start found next to slot {slot} after 100 draws")]
    StartSamplingFailed { slot: usize },
    #[error("slot {slot} does not exist in the {layout:?} layout")]
    InvalidSlot { layout: LayoutKind, slot: usize },
    #[error("planner start pose is in collision")]
    InvalidStart,
    #[error("planner goal pose is in collision")]
    InvalidGoal,
    #[error("no path found after expanding {expanded} nodes")]
    NoPathFound { expanded: usize },
    #[error("box QP did not converge (KKT residual {residual:.3e})")]
    QpNotConverged { residual: f64 },
    #[error("evaluation suite is empty")]
    EmptySuite,
    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("corrupt episode data: {0}")]
    CorruptFrame(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
