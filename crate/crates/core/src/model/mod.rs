//! Social state, actions, protocols and the commitment lifecycle.

mod commitment;
mod protocol;
mod state;

use thiserror::Error;

pub use commitment::{CommitmentInstance, CommitmentState, CommitmentTemplate, Move, Transition};
pub use protocol::{ActionDef, Binding, CommitmentOp, Issue, Protocol};
pub use state::{Event, EventEffects, SocialState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("agent `{agent}` does not play role `{role}` required by action `{action}`")]
    RoleMismatch { agent: String, action: String, role: String },
    #[error("unknown commitment `{0}`")]
    UnknownCommitmentLabel(String),
    #[error("commitment `{label}` cannot {mv} from state {from}")]
    IllegalTransition { label: String, from: CommitmentState, mv: Move },
}
