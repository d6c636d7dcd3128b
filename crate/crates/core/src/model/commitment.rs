use std::fmt;

use super::ModelError;
use crate::atom::{Atom, CommitmentStatus};
use crate::regulation::RegulationExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommitmentState {
    Conditional,
    Detached,
    Discharged,
    Violated,
    Released,
    Cancelled,
}

impl CommitmentState {
    pub fn is_terminal(self) -> bool {
        !matches!(self, CommitmentState::Conditional | CommitmentState::Detached)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            CommitmentState::Conditional => "conditional",
            CommitmentState::Detached => "detached",
            CommitmentState::Discharged => "discharged",
            CommitmentState::Violated => "violated",
            CommitmentState::Released => "released",
            CommitmentState::Cancelled => "cancelled",
        }
    }
}

impl fmt::Display for CommitmentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A lifecycle move. `Expire` closes an untriggered conditional commitment
/// at the end of an interaction; it lands in `Released` without sanction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Detach,
    Discharge,
    Violate,
    Release,
    Cancel,
    Expire,
}

impl Move {
    pub const ALL: [Move; 6] = [Move::Detach, Move::Discharge, Move::Violate, Move::Release, Move::Cancel, Move::Expire];

    /// Target state of the move from `from`, if legal.
    pub fn target(self, from: CommitmentState) -> Option<CommitmentState> {
        use CommitmentState::*;
        match (from, self) {
            (Conditional, Move::Detach) => Some(Detached),
            (Conditional, Move::Release) | (Conditional, Move::Expire) => Some(Released),
            (Conditional, Move::Cancel) => Some(Cancelled),
            (Detached, Move::Discharge) => Some(Discharged),
            (Detached, Move::Violate) => Some(Violated),
            (Detached, Move::Release) => Some(Released),
            (Detached, Move::Cancel) => Some(Cancelled),
            _ => None,
        }
    }

    pub fn status(self) -> CommitmentStatus {
        match self {
            Move::Detach => CommitmentStatus::Detached,
            Move::Discharge => CommitmentStatus::Discharged,
            Move::Violate => CommitmentStatus::Violated,
            Move::Release | Move::Expire => CommitmentStatus::Released,
            Move::Cancel => CommitmentStatus::Cancelled,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Move::Detach => "detach",
            Move::Discharge => "discharge",
            Move::Violate => "violate",
            Move::Release => "release",
            Move::Cancel => "cancel",
            Move::Expire => "expire",
        };
        f.write_str(s)
    }
}

/// A declared commitment: `C(debtor, creditor, antecedent, consequent)` over roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentTemplate {
    pub label: String,
    pub debtor: String,
    pub creditor: String,
    pub antecedent: RegulationExpr,
    pub consequent: RegulationExpr,
    pub line: Option<usize>,
}

impl CommitmentTemplate {
    pub fn new(
        label: impl Into<String>,
        debtor: impl Into<String>,
        creditor: impl Into<String>,
        antecedent: RegulationExpr,
        consequent: RegulationExpr,
    ) -> Self {
        CommitmentTemplate {
            label: label.into(),
            debtor: debtor.into(),
            creditor: creditor.into(),
            antecedent,
            consequent,
            line: None,
        }
    }

    pub fn instantiate(&self, created_at: usize) -> CommitmentInstance {
        CommitmentInstance {
            label: self.label.clone(),
            debtor: self.debtor.clone(),
            creditor: self.creditor.clone(),
            antecedent: self.antecedent.clone(),
            consequent: self.consequent.clone(),
            state: CommitmentState::Conditional,
            created_at,
            expired: false,
        }
    }
}

impl fmt::Display for CommitmentTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({}, {}, {}, {})", self.debtor, self.creditor, self.antecedent, self.consequent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentInstance {
    pub label: String,
    pub debtor: String,
    pub creditor: String,
    pub antecedent: RegulationExpr,
    pub consequent: RegulationExpr,
    pub state: CommitmentState,
    pub created_at: usize,
    /// Set when the instance was closed by [`Move::Expire`].
    pub expired: bool,
}

impl CommitmentInstance {
    pub fn is_live(&self) -> bool {
        !self.state.is_terminal()
    }

    /// Applies `mv` at event `index`. On error the instance is unchanged.
    pub fn transition(&mut self, mv: Move, index: usize) -> Result<Transition, ModelError> {
        let to = mv.target(self.state).ok_or_else(|| ModelError::IllegalTransition {
            label: self.label.clone(),
            from: self.state,
            mv,
        })?;
        let from = self.state;
        self.state = to;
        self.expired = mv == Move::Expire;
        Ok(Transition { label: self.label.clone(), from, to, mv, index })
    }

    /// State name used in reports; expired instances read `expired`.
    pub fn status_label(&self) -> &'static str {
        if self.expired {
            "expired"
        } else {
            self.state.keyword()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub label: String,
    pub from: CommitmentState,
    pub to: CommitmentState,
    pub mv: Move,
    pub index: usize,
}

impl Transition {
    pub fn status_atom(&self) -> Atom {
        Atom::status(self.mv.status(), self.label.clone())
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {} ({})", self.label, self.from, self.to, self.mv)
    }
}
