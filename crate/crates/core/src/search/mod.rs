//! Simultaneous multi-source shortest path searches with per-source length
//! functions.

mod engine;
mod future;

pub use engine::{
    EngineConfig, Hit, SearchEngine, SearchStats, SourceSpec, Target, ComponentId, SourceId,
    TerminalId, ROOT_TERMINAL,
};
pub use future::FutureCostTables;
