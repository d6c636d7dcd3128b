//! Propositions of the social state: plain facts and commitment-status events.

use std::fmt;

/// Lifecycle events a commitment can go through, each observable as an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommitmentStatus {
    Created,
    Detached,
    Discharged,
    Released,
    Cancelled,
    Violated,
}

impl CommitmentStatus {
    pub const ALL: [CommitmentStatus; 6] = [
        CommitmentStatus::Created,
        CommitmentStatus::Detached,
        CommitmentStatus::Discharged,
        CommitmentStatus::Released,
        CommitmentStatus::Cancelled,
        CommitmentStatus::Violated,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            CommitmentStatus::Created => "created",
            CommitmentStatus::Detached => "detached",
            CommitmentStatus::Discharged => "discharged",
            CommitmentStatus::Released => "released",
            CommitmentStatus::Cancelled => "cancelled",
            CommitmentStatus::Violated => "violated",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.keyword() == word)
    }
}

impl fmt::Display for CommitmentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// An atom either names a fact or records that a commitment reached a status.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Fact(String),
    Status(CommitmentStatus, String),
}

impl Atom {
    pub fn fact(name: impl Into<String>) -> Self {
        Atom::Fact(name.into())
    }

    pub fn status(status: CommitmentStatus, label: impl Into<String>) -> Self {
        Atom::Status(status, label.into())
    }

    pub fn is_fact(&self) -> bool {
        matches!(self, Atom::Fact(_))
    }

    /// Fact name, if this is a fact.
    pub fn fact_name(&self) -> Option<&str> {
        match self {
            Atom::Fact(name) => Some(name),
            Atom::Status(..) => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Fact(name) => f.write_str(name),
            Atom::Status(status, label) => write!(f, "{status}({label})"),
        }
    }
}

/// Words that may not be used as fact names in regulations.
pub(crate) const RESERVED: [&str; 7] = ["top", "achieve", "before", "response", "coexist", "and", "or"];

/// `[a-z][a-z0-9_-]*`
pub fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

/// Identifier usable as a fact atom inside a regulation.
pub fn is_fact_name(word: &str) -> bool {
    is_identifier(word) && !RESERVED.contains(&word) && CommitmentStatus::from_keyword(word).is_none()
}
