//! Runtime monitoring: compiled four-valued monitors and trace sessions.

mod automaton;
mod session;

pub use automaton::{compile_monitor, Cursor, Letter, MonitorAutomaton, SharedAutomaton, Verdict, MAX_ATOMS};
pub(crate) use session::SessionKey;
pub use session::{
    ConstraintOutcome, ConstraintStatus, Culprit, FinalReport, LogEntry, MonitorError, StepReport, TraceSession,
    ViolationRecord, ViolationSource,
};
