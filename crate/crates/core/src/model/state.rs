use std::collections::BTreeMap;

use super::commitment::{CommitmentInstance, CommitmentState, Move, Transition};
use super::protocol::{Binding, CommitmentOp, Protocol};
use super::ModelError;
use crate::atom::{Atom, CommitmentStatus};
use crate::regulation::FirstOccurrence;

/// An agent performing a named action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub agent: String,
    pub action: String,
}

impl Event {
    pub fn new(agent: impl Into<String>, action: impl Into<String>) -> Self {
        Event { agent: agent.into(), action: action.into() }
    }
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.agent, self.action)
    }
}

/// What the constitutive part of an event did to the social state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventEffects {
    pub index: usize,
    /// Atoms that became true, in assertion order.
    pub new_atoms: Vec<Atom>,
    /// Labels instantiated by this event.
    pub created: Vec<String>,
    /// Release/cancel transitions applied by this event.
    pub transitions: Vec<Transition>,
}

/// The shared record of true atoms and commitment instances.
///
/// Atoms are never retracted. Each keeps the index of the event at which it
/// first became true.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SocialState {
    first: BTreeMap<Atom, usize>,
    order: Vec<Atom>,
    commitments: BTreeMap<String, CommitmentInstance>,
    len: usize,
}

impl SocialState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of events applied so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn holds(&self, atom: &Atom) -> bool {
        self.first.contains_key(atom)
    }

    pub fn first(&self, atom: &Atom) -> Option<usize> {
        self.first.get(atom).copied()
    }

    /// True atoms in the order they became true.
    pub fn true_atoms(&self) -> impl Iterator<Item = (&Atom, usize)> {
        self.order.iter().map(|a| (a, self.first[a]))
    }

    pub fn first_occurrence(&self) -> FirstOccurrence {
        self.first.iter().map(|(a, i)| (a.clone(), *i)).collect()
    }

    pub fn commitment(&self, label: &str) -> Option<&CommitmentInstance> {
        self.commitments.get(label)
    }

    pub fn commitments(&self) -> impl Iterator<Item = &CommitmentInstance> {
        self.commitments.values()
    }

    /// Records `atom` as true at `index`; returns false if it already held.
    pub fn assert_atom(&mut self, atom: Atom, index: usize) -> bool {
        if self.first.contains_key(&atom) {
            return false;
        }
        self.first.insert(atom.clone(), index);
        self.order.push(atom);
        true
    }

    /// Applies the constitutive meaning of `event` as event number `self.len()`.
    ///
    /// Facts are asserted, then commitment operations run in declaration
    /// order. `create` on a label with a live instance is a no-op, as are
    /// `release`/`cancel` on a label without one. Detach and discharge are
    /// the monitor's business. On error the state is unchanged.
    pub fn apply_event(&mut self, protocol: &Protocol, binding: &Binding, event: &Event) -> Result<EventEffects, ModelError> {
        let action = protocol
            .find_action(&event.action)
            .ok_or_else(|| ModelError::UnknownAction(event.action.clone()))?;
        if !binding.plays(&event.agent, &action.actor) {
            return Err(ModelError::RoleMismatch {
                agent: event.agent.clone(),
                action: action.name.clone(),
                role: action.actor.clone(),
            });
        }
        for op in &action.ops {
            if protocol.find_commitment(op.label()).is_none() {
                return Err(ModelError::UnknownCommitmentLabel(op.label().to_string()));
            }
        }

        let index = self.len;
        let mut effects = EventEffects { index, ..Default::default() };
        for fact in &action.effects {
            let atom = Atom::fact(fact.clone());
            if self.assert_atom(atom.clone(), index) {
                effects.new_atoms.push(atom);
            }
        }
        for op in &action.ops {
            match op {
                CommitmentOp::Create(label) => {
                    if self.commitments.get(label).is_some_and(CommitmentInstance::is_live) {
                        continue;
                    }
                    let template = protocol.find_commitment(label).expect("checked above");
                    self.commitments.insert(label.clone(), template.instantiate(index));
                    effects.created.push(label.clone());
                    let atom = Atom::status(CommitmentStatus::Created, label.clone());
                    if self.assert_atom(atom.clone(), index) {
                        effects.new_atoms.push(atom);
                    }
                }
                CommitmentOp::Release(label) | CommitmentOp::Cancel(label) => {
                    if !self.commitments.get(label).is_some_and(CommitmentInstance::is_live) {
                        continue;
                    }
                    let mv = if matches!(op, CommitmentOp::Release(_)) { Move::Release } else { Move::Cancel };
                    let t = self.transition_commitment(label, mv, index)?;
                    let atom = t.status_atom();
                    if self.first(&atom) == Some(index) && !effects.new_atoms.contains(&atom) {
                        effects.new_atoms.push(atom);
                    }
                    effects.transitions.push(t);
                }
            }
        }
        self.len += 1;
        Ok(effects)
    }

    /// Moves the live instance of `label` and records its status atom at `index`.
    pub fn transition_commitment(&mut self, label: &str, mv: Move, index: usize) -> Result<Transition, ModelError> {
        let instance = self
            .commitments
            .get_mut(label)
            .ok_or_else(|| ModelError::UnknownCommitmentLabel(label.to_string()))?;
        let t = instance.transition(mv, index)?;
        self.assert_atom(t.status_atom(), index);
        Ok(t)
    }

    /// Settles commitments at the end of the interaction.
    ///
    /// Detached instances are discharged when `consequent_satisfied` says their
    /// consequent holds now and violated otherwise; conditional instances
    /// expire without sanction.
    pub fn close_trace<F>(&mut self, consequent_satisfied: F) -> Vec<Transition>
    where
        F: Fn(&CommitmentInstance) -> bool,
    {
        let index = self.len;
        let plan: Vec<(String, Move)> = self
            .commitments
            .values()
            .filter_map(|c| match c.state {
                CommitmentState::Detached if consequent_satisfied(c) => Some((c.label.clone(), Move::Discharge)),
                CommitmentState::Detached => Some((c.label.clone(), Move::Violate)),
                CommitmentState::Conditional => Some((c.label.clone(), Move::Expire)),
                _ => None,
            })
            .collect();
        plan.into_iter()
            .map(|(label, mv)| self.transition_commitment(&label, mv, index).expect("planned from live state"))
            .collect()
    }
}
