//! Control and safety.
//!
//! An agent controls a regulation when it can bring it about with its own
//! actions plus the cooperation promised to it by commitments of which it is
//! the creditor. A commitment is safe when its debtor controls the consequent
//! without leaning on the commitment itself.
//!
//! Support through commitments is computed as a least fixpoint: a detached
//! commitment supports its creditor outright, a conditional one only once the
//! creditor controls its antecedent. Mutually conditional commitments that
//! only unlock each other never become usable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::atom::Atom;
use crate::model::{Binding, CommitmentInstance, CommitmentState, Protocol};
use crate::monitor::TraceSession;
use crate::regulation::RegulationExpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("role `{0}` is not declared by the protocol")]
    UnknownRole(String),
    #[error("atom `{0}` does not resolve against the protocol")]
    UnresolvedAtom(Atom),
    #[error("commitment `{0}` is already settled")]
    TerminalCommitment(String),
}

/// Facts an agent can bring about by itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityProfile {
    pub agent: String,
    pub achievable: BTreeSet<String>,
}

/// Union of the effects of the actions whose actor role each agent plays.
pub fn capabilities_of(protocol: &Protocol, binding: &Binding) -> Result<BTreeMap<String, CapabilityProfile>, ControlError> {
    binding.check(protocol).map_err(ControlError::UnknownRole)?;
    Ok(binding
        .agents(protocol)
        .into_iter()
        .map(|agent| {
            let achievable = protocol
                .actions
                .iter()
                .filter(|a| binding.plays(&agent, &a.actor))
                .flat_map(|a| a.effects.iter().cloned())
                .collect();
            (agent.clone(), CapabilityProfile { agent, achievable })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportContext {
    profiles: BTreeMap<String, CapabilityProfile>,
    binding: Binding,
    commitments: Vec<CommitmentInstance>,
    true_atoms: BTreeSet<Atom>,
    known: BTreeSet<Atom>,
}

impl SupportContext {
    /// Builds a context. Every commitment must be conditional or detached.
    pub fn new(
        protocol: &Protocol,
        binding: Binding,
        commitments: Vec<CommitmentInstance>,
        true_atoms: BTreeSet<Atom>,
    ) -> Result<Self, ControlError> {
        if let Some(c) = commitments.iter().find(|c| !c.is_live()) {
            return Err(ControlError::TerminalCommitment(c.label.clone()));
        }
        Ok(SupportContext {
            profiles: capabilities_of(protocol, &binding)?,
            binding,
            commitments,
            true_atoms,
            known: protocol.atom_universe(),
        })
    }

    /// Live commitments and true atoms of a running session.
    pub fn from_session(session: &TraceSession) -> Result<Self, ControlError> {
        let state = session.state();
        Self::new(
            session.protocol(),
            session.binding().clone(),
            state.commitments().filter(|c| c.is_live()).cloned().collect(),
            state.true_atoms().map(|(a, _)| a.clone()).collect(),
        )
    }

    /// Every declared commitment as a fresh conditional offer, empty social state.
    pub fn hypothetical(protocol: &Protocol, binding: Binding) -> Result<Self, ControlError> {
        let offers = protocol.commitments.iter().map(|t| t.instantiate(0)).collect();
        Self::new(protocol, binding, offers, BTreeSet::new())
    }

    pub fn commitments(&self) -> &[CommitmentInstance] {
        &self.commitments
    }

    pub fn profile(&self, agent: &str) -> Option<&CapabilityProfile> {
        self.profiles.get(agent)
    }

    pub fn binding(&self) -> &Binding {
        &self.binding
    }

    /// Replaces an agent's achievable facts.
    pub fn set_capabilities(&mut self, agent: &str, achievable: BTreeSet<String>) {
        self.profiles.insert(agent.to_string(), CapabilityProfile { agent: agent.to_string(), achievable });
    }

    pub fn add_commitment(&mut self, commitment: CommitmentInstance) -> Result<(), ControlError> {
        if !commitment.is_live() {
            return Err(ControlError::TerminalCommitment(commitment.label));
        }
        self.commitments.push(commitment);
        Ok(())
    }

    /// The same context minus the commitment labelled `label`.
    pub fn without(&self, label: &str) -> SupportContext {
        let mut ctx = self.clone();
        ctx.commitments.retain(|c| c.label != label);
        ctx
    }

    fn check_atoms(&self, expr: &RegulationExpr) -> Result<(), ControlError> {
        match expr.atoms().into_iter().find(|a| !self.known.contains(*a)) {
            Some(a) => Err(ControlError::UnresolvedAtom(a.clone())),
            None => Ok(()),
        }
    }
}

/// Why a control claim holds or fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub claim: String,
    pub holds: bool,
    pub children: Vec<Derivation>,
}

impl Derivation {
    fn leaf(claim: String, holds: bool) -> Self {
        Derivation { claim, holds, children: Vec::new() }
    }

    fn write_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let mark = if self.holds { "+" } else { "-" };
        writeln!(f, "{:indent$}[{mark}] {}", "", self.claim, indent = depth * 2)?;
        self.children.iter().try_for_each(|c| c.write_tree(f, depth + 1))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(f, 0)
    }
}

/// Does `agent` control `expr` in `ctx`?
pub fn control(agent: &str, expr: &RegulationExpr, ctx: &SupportContext) -> Result<bool, ControlError> {
    ctx.check_atoms(expr)?;
    let solver = Solver::new(ctx);
    Ok(solver.holds(agent, expr, usize::MAX))
}

/// Same as [`control`], with the derivation tree.
pub fn control_derivation(agent: &str, expr: &RegulationExpr, ctx: &SupportContext) -> Result<Derivation, ControlError> {
    ctx.check_atoms(expr)?;
    let solver = Solver::new(ctx);
    Ok(solver.derive(agent, expr, usize::MAX))
}

/// Is `commitment` safe for its debtor?
pub fn safe(commitment: &CommitmentInstance, ctx: &SupportContext) -> Result<bool, ControlError> {
    Ok(safety_derivation(commitment, ctx)?.holds)
}

/// Derivation of the debtor's control over the consequent, the tested
/// commitment excluded from the support.
pub fn safety_derivation(commitment: &CommitmentInstance, ctx: &SupportContext) -> Result<Derivation, ControlError> {
    if !commitment.is_live() {
        return Err(ControlError::TerminalCommitment(commitment.label.clone()));
    }
    let reduced = ctx.without(&commitment.label);
    let debtor = ctx.binding.agent_for(&commitment.debtor);
    control_derivation(&debtor, &commitment.consequent, &reduced)
}

enum Reason {
    AlreadyTrue,
    Own,
    Commitment(usize),
}

struct Solver<'c> {
    ctx: &'c SupportContext,
    /// Stage at which (commitment index, creditor agent) became usable.
    usable: BTreeMap<(usize, String), usize>,
}

impl<'c> Solver<'c> {
    fn new(ctx: &'c SupportContext) -> Self {
        let mut solver = Solver { ctx, usable: BTreeMap::new() };
        let creditors: Vec<(usize, String)> = ctx
            .commitments
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                ctx.profiles
                    .keys()
                    .filter(|agent| ctx.binding.plays(agent, &c.creditor))
                    .map(move |agent| (i, agent.clone()))
            })
            .collect();
        for stage in 1.. {
            let newly: Vec<(usize, String)> = creditors
                .iter()
                .filter(|key| !solver.usable.contains_key(*key))
                .filter(|(i, agent)| {
                    let c = &ctx.commitments[*i];
                    c.state == CommitmentState::Detached || solver.holds(agent, &c.antecedent, usize::MAX)
                })
                .cloned()
                .collect();
            if newly.is_empty() {
                break;
            }
            for key in newly {
                solver.usable.insert(key, stage);
            }
        }
        solver
    }

    fn usable_below(&self, i: usize, agent: &str, limit: usize) -> Option<usize> {
        self.usable.get(&(i, agent.to_string())).copied().filter(|&s| s < limit)
    }

    fn achieve_reason(&self, agent: &str, atom: &Atom, limit: usize) -> Option<Reason> {
        if self.ctx.true_atoms.contains(atom) {
            return Some(Reason::AlreadyTrue);
        }
        if let Atom::Fact(name) = atom {
            if self.ctx.profiles.get(agent).is_some_and(|p| p.achievable.contains(name)) {
                return Some(Reason::Own);
            }
        }
        self.ctx
            .commitments
            .iter()
            .enumerate()
            .filter(|(_, c)| entails_achieve(&c.consequent, atom))
            .filter_map(|(i, _)| self.usable_below(i, agent, limit).map(|stage| (stage, i)))
            .min()
            .map(|(_, i)| Reason::Commitment(i))
    }

    fn holds(&self, agent: &str, expr: &RegulationExpr, limit: usize) -> bool {
        let ach = |a: &Atom| self.achieve_reason(agent, a, limit).is_some();
        match expr {
            RegulationExpr::Top => true,
            RegulationExpr::Achieve(a) => ach(a),
            RegulationExpr::Before(a, b) => ach(a) && ach(b) && !self.ctx.true_atoms.contains(b),
            RegulationExpr::Response(_, b) => ach(b),
            RegulationExpr::Coexist(a, b) => ach(a) && ach(b),
            RegulationExpr::And(l, r) => self.holds(agent, l, limit) && self.holds(agent, r, limit),
            RegulationExpr::Or(l, r) => self.holds(agent, l, limit) || self.holds(agent, r, limit),
        }
    }

    fn derive(&self, agent: &str, expr: &RegulationExpr, limit: usize) -> Derivation {
        let claim = format!("{agent} controls `{expr}`");
        let children = match expr {
            RegulationExpr::Top => return Derivation::leaf(format!("{claim}: trivially"), true),
            RegulationExpr::Achieve(a) => return self.derive_achieve(agent, a, limit),
            RegulationExpr::Before(a, b) => {
                let mut kids = vec![self.derive_achieve(agent, a, limit), self.derive_achieve(agent, b, limit)];
                let free = !self.ctx.true_atoms.contains(b);
                kids.push(Derivation::leaf(
                    if free { format!("`{b}` has not happened yet") } else { format!("`{b}` already happened") },
                    free,
                ));
                kids
            }
            RegulationExpr::Response(_, b) => vec![self.derive_achieve(agent, b, limit)],
            RegulationExpr::Coexist(a, b) => vec![self.derive_achieve(agent, a, limit), self.derive_achieve(agent, b, limit)],
            RegulationExpr::And(l, r) => vec![self.derive(agent, l, limit), self.derive(agent, r, limit)],
            RegulationExpr::Or(l, r) => vec![self.derive(agent, l, limit), self.derive(agent, r, limit)],
        };
        let holds = self.holds(agent, expr, limit);
        Derivation { claim, holds, children }
    }

    fn derive_achieve(&self, agent: &str, atom: &Atom, limit: usize) -> Derivation {
        let claim = format!("{agent} controls `achieve {atom}`");
        match self.achieve_reason(agent, atom, limit) {
            None => Derivation::leaf(format!("{claim}: no own action and no usable commitment"), false),
            Some(Reason::AlreadyTrue) => Derivation::leaf(format!("{claim}: already true"), true),
            Some(Reason::Own) => Derivation::leaf(format!("{claim}: own action"), true),
            Some(Reason::Commitment(i)) => {
                let c = &self.ctx.commitments[i];
                let stage = self.usable.get(&(i, agent.to_string())).copied().unwrap_or(0);
                let via = format!(
                    "{claim}: via {} = C({}, {}, {}, {})",
                    c.label, c.debtor, c.creditor, c.antecedent, c.consequent
                );
                let child = if c.state == CommitmentState::Detached {
                    Derivation::leaf(format!("{} is detached", c.label), true)
                } else {
                    self.derive(agent, &c.antecedent, stage)
                };
                Derivation { claim: via, holds: true, children: vec![child] }
            }
        }
    }
}

/// Syntactic entailment of `achieve atom` by a consequent.
fn entails_achieve(expr: &RegulationExpr, atom: &Atom) -> bool {
    match expr {
        RegulationExpr::Achieve(a) => a == atom,
        RegulationExpr::And(l, r) => entails_achieve(l, atom) || entails_achieve(r, atom),
        RegulationExpr::Or(l, r) => entails_achieve(l, atom) && entails_achieve(r, atom),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionDef, CommitmentTemplate, Move};
    use crate::regulation::parse_regulation;

    fn reg(s: &str) -> RegulationExpr {
        parse_regulation(s).unwrap()
    }

    fn base() -> Protocol {
        Protocol::new("p")
            .role("x")
            .role("y")
            .role("z")
            .action(ActionDef::new("do-a", "y").means("a"))
            .action(ActionDef::new("do-b", "x").means("b"))
            .commitment(CommitmentTemplate::new("c-main", "x", "z", RegulationExpr::Top, reg("a before b")))
            .commitment(CommitmentTemplate::new("c-a", "y", "x", RegulationExpr::Top, reg("achieve a")))
    }

    fn detached(p: &Protocol, label: &str) -> CommitmentInstance {
        let mut c = p.find_commitment(label).unwrap().instantiate(0);
        c.transition(Move::Detach, 0).unwrap();
        c
    }

    #[test]
    fn capabilities_follow_roles() {
        let p = base();
        let caps = capabilities_of(&p, &Binding::Identity).unwrap();
        assert_eq!(caps["x"].achievable, BTreeSet::from(["b".to_string()]));
        assert!(caps["z"].achievable.is_empty());
        let both = capabilities_of(&p, &Binding::explicit([("ann", "x"), ("ann", "y")])).unwrap();
        assert_eq!(both["ann"].achievable, BTreeSet::from(["a".to_string(), "b".to_string()]));
        assert_eq!(
            capabilities_of(&p, &Binding::explicit([("ann", "pilot")])),
            Err(ControlError::UnknownRole("pilot".into()))
        );
    }

    #[test]
    fn before_needs_both_atoms() {
        let p = base();
        let ctx = SupportContext::new(&p, Binding::Identity, vec![detached(&p, "c-a")], BTreeSet::new()).unwrap();
        assert_eq!(control("x", &reg("a before b"), &ctx), Ok(true));
        let bare = ctx.without("c-a");
        assert_eq!(control("x", &reg("a before b"), &bare), Ok(false));
        assert_eq!(control("x", &reg("a response b"), &bare), Ok(true));
    }

    #[test]
    fn safety_excludes_the_tested_commitment() {
        let p = base();
        let main = detached(&p, "c-main");
        let ctx = SupportContext::new(&p, Binding::Identity, vec![detached(&p, "c-a"), main.clone()], BTreeSet::new()).unwrap();
        assert_eq!(safe(&main, &ctx), Ok(true));
        assert_eq!(safe(&main, &ctx.without("c-a")), Ok(false));
        let trivial = CommitmentTemplate::new("t", "x", "y", RegulationExpr::Top, RegulationExpr::Top).instantiate(0);
        assert_eq!(safe(&trivial, &ctx.without("c-a")), Ok(true));
    }

    #[test]
    fn b_already_true_blocks_before() {
        let p = base();
        let ctx = SupportContext::new(&p, Binding::Identity, vec![detached(&p, "c-a")], BTreeSet::from([Atom::fact("b")])).unwrap();
        assert_eq!(control("x", &reg("a before b"), &ctx), Ok(false));
        assert_eq!(control("x", &reg("achieve b"), &ctx), Ok(true));
    }

    #[test]
    fn mutually_conditional_support_is_not_control() {
        // c1 = C(y, x, achieve g, achieve a), c2 = C(y, x, achieve a, achieve g): neither unlocks
        let p = Protocol::new("p")
            .role("x")
            .role("y")
            .fact("a")
            .fact("g")
            .commitment(CommitmentTemplate::new("c1", "y", "x", reg("achieve g"), reg("achieve a")))
            .commitment(CommitmentTemplate::new("c2", "y", "x", reg("achieve a"), reg("achieve g")));
        let ctx = SupportContext::hypothetical(&p, Binding::Identity).unwrap();
        assert_eq!(control("x", &reg("achieve a"), &ctx), Ok(false));
        assert_eq!(control("x", &reg("achieve g"), &ctx), Ok(false));
    }

    #[test]
    fn conditional_support_unlocks_in_stages() {
        // x can do g; c1 needs g, c2 needs a (from c1)
        let p = Protocol::new("p")
            .role("x")
            .role("y")
            .action(ActionDef::new("do-g", "x").means("g"))
            .fact("a")
            .fact("h")
            .commitment(CommitmentTemplate::new("c1", "y", "x", reg("achieve g"), reg("achieve a")))
            .commitment(CommitmentTemplate::new("c2", "y", "x", reg("achieve a"), reg("achieve h")));
        let ctx = SupportContext::hypothetical(&p, Binding::Identity).unwrap();
        let d = control_derivation("x", &reg("achieve h"), &ctx).unwrap();
        assert!(d.holds);
        let text = d.to_string();
        assert!(text.contains("via c2"), "{text}");
        assert!(text.contains("via c1"), "{text}");
        assert!(text.contains("own action"), "{text}");
    }

    #[test]
    fn unresolved_atoms_and_terminal_commitments() {
        let p = base();
        let ctx = SupportContext::hypothetical(&p, Binding::Identity).unwrap();
        assert_eq!(control("x", &reg("achieve nope"), &ctx), Err(ControlError::UnresolvedAtom(Atom::fact("nope"))));
        let mut done = detached(&p, "c-a");
        done.transition(Move::Discharge, 1).unwrap();
        assert_eq!(safe(&done, &ctx), Err(ControlError::TerminalCommitment("c-a".into())));
        assert!(SupportContext::new(&p, Binding::Identity, vec![done], BTreeSet::new()).is_err());
    }

    #[test]
    fn or_consequent_entails_only_common_atoms() {
        assert!(entails_achieve(&reg("achieve a and achieve b"), &Atom::fact("a")));
        assert!(!entails_achieve(&reg("achieve a or achieve b"), &Atom::fact("a")));
        assert!(entails_achieve(&reg("achieve a or (achieve a and top)"), &Atom::fact("a")));
        assert!(!entails_achieve(&reg("a before b"), &Atom::fact("a")));
    }
}
