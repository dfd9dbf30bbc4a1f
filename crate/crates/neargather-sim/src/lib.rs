//! Event-driven ASYNC simulator, trace audit, scenario tooling, and file
//! formats for near-gathering swarms. The pure protocol kernel lives in
//! `neargather-core`; this crate adds everything that needs `std`: the
//! scheduler, JSONL traces, scenario files, the auditor, and the CLI.

pub mod audit;
pub mod scenario;
pub mod sim;

pub use audit::{audit_trace, write_metrics_csv, AuditReport};
pub use scenario::Scenario;
pub use sim::{
    run, ProtocolKind, RunStatus, SchedulerPolicy, SimConfig, SimError, Trace, TraceRecord,
};
