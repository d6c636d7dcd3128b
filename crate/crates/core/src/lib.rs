//! Regulations, commitments and runtime monitoring for multiagent protocols.

pub mod atom;
pub mod cli;
pub mod compliance;
pub mod control;
pub mod model;
pub mod monitor;
pub mod regulation;
pub mod scenarios;
pub mod syntax;
