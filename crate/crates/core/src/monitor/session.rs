use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::automaton::{compile_monitor, Cursor, SharedAutomaton, Verdict};
use crate::atom::Atom;
use crate::model::{
    Binding, CommitmentInstance, CommitmentState, Event, Issue, ModelError, Move, Protocol, SocialState, Transition,
};
use crate::regulation::{ConstraintDecl, RegulationExpr, Severity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("protocol does not validate: {}", join_issues(.0))]
    Validation(Vec<Issue>),
    #[error("role `{0}` in the agent binding is not declared by the protocol")]
    UnknownRole(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown constraint `{0}`")]
    UnknownConstraint(String),
    #[error("constraint `{0}` already exists")]
    DuplicateConstraint(String),
    #[error("constraint `{id}` refers to undeclared atom `{atom}`")]
    UnresolvedAtom { id: String, atom: Atom },
}

fn join_issues(issues: &[Issue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Who a violation is charged to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Culprit {
    Agent(String),
    /// A pending obligation nobody settled before the trace ended.
    EndOfTrace,
}

impl fmt::Display for Culprit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Culprit::Agent(a) => f.write_str(a),
            Culprit::EndOfTrace => f.write_str("end-of-trace"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationSource {
    Constraint(String),
    Commitment(String),
}

impl ViolationSource {
    pub fn id(&self) -> &str {
        match self {
            ViolationSource::Constraint(id) | ViolationSource::Commitment(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationRecord {
    pub source: ViolationSource,
    pub index: usize,
    pub severity: Severity,
    pub culprit: Culprit,
    /// Constraint culprits are the actor of the triggering event, which is a
    /// guess; commitment culprits are debtors and therefore exact.
    pub heuristic: bool,
}

/// Entries of the replayable session log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    Event(Event),
    Activate(String),
    Retire(String),
    Add(ConstraintDecl),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintStatus {
    /// Never activated.
    Inactive,
    Active,
    /// Cursor frozen by a retirement.
    Retired,
}

#[derive(Debug, Clone)]
struct ConstraintSlot {
    decl: ConstraintDecl,
    status: ConstraintStatus,
    cursor: Option<Cursor>,
    activated_at: Option<usize>,
}

#[derive(Debug, Clone)]
struct CommitmentCursors {
    antecedent: Cursor,
    consequent: Cursor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub event: Event,
    /// Every atom that became true at this index, constitutive ones first.
    pub new_atoms: Vec<Atom>,
    /// Constraints whose verdict changed: `(id, before, after)`.
    pub verdicts: Vec<(String, Verdict, Verdict)>,
    pub transitions: Vec<Transition>,
    pub violations: Vec<ViolationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintOutcome {
    pub id: String,
    pub severity: Severity,
    pub status: ConstraintStatus,
    /// `None` for a constraint that was never active.
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalReport {
    pub events: usize,
    pub constraints: Vec<ConstraintOutcome>,
    /// Final instance of every label that was ever created, in declaration order.
    pub commitments: Vec<CommitmentInstance>,
    pub close_transitions: Vec<Transition>,
    pub violations: Vec<ViolationRecord>,
}

/// A monitored interaction.
///
/// Constraint cursors start at the constraint's activation; commitment
/// cursors start at the commitment's creation. A cursor never observes atoms
/// that were already true when it started.
#[derive(Debug, Clone)]
pub struct TraceSession {
    protocol: Arc<Protocol>,
    binding: Binding,
    state: SocialState,
    constraints: Vec<ConstraintSlot>,
    cursors: BTreeMap<String, CommitmentCursors>,
    violations: Vec<ViolationRecord>,
    log: Vec<LogEntry>,
    cache: HashMap<RegulationExpr, SharedAutomaton>,
}

impl TraceSession {
    /// Starts a session with every constraint not declared inactive running.
    pub fn start(protocol: Protocol) -> Result<Self, MonitorError> {
        Self::with_binding(protocol, Binding::Identity)
    }

    pub fn with_binding(protocol: Protocol, binding: Binding) -> Result<Self, MonitorError> {
        protocol.validate().map_err(MonitorError::Validation)?;
        binding.check(&protocol).map_err(MonitorError::UnknownRole)?;
        let mut session = TraceSession {
            constraints: Vec::with_capacity(protocol.constraints.len()),
            protocol: Arc::new(protocol),
            binding,
            state: SocialState::new(),
            cursors: BTreeMap::new(),
            violations: Vec::new(),
            log: Vec::new(),
            cache: HashMap::new(),
        };
        for decl in session.protocol.constraints.clone() {
            session.push_slot(decl);
        }
        Ok(session)
    }

    /// Rebuilds a session by replaying a log from scratch.
    pub fn replay(protocol: Protocol, binding: Binding, log: &[LogEntry]) -> Result<Self, MonitorError> {
        let mut session = Self::with_binding(protocol, binding)?;
        for entry in log {
            match entry {
                LogEntry::Event(e) => {
                    session.step(e)?;
                }
                LogEntry::Activate(id) => session.set_constraint_active(id, true)?,
                LogEntry::Retire(id) => session.set_constraint_active(id, false)?,
                LogEntry::Add(decl) => session.add_constraint(decl.clone())?,
            }
        }
        Ok(session)
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn binding(&self) -> &Binding {
        &self.binding
    }

    pub fn state(&self) -> &SocialState {
        &self.state
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn violations(&self) -> &[ViolationRecord] {
        &self.violations
    }

    pub fn event_count(&self) -> usize {
        self.state.len()
    }

    /// Current verdict of a constraint, or `None` if it was never activated.
    pub fn constraint_verdict(&self, id: &str) -> Option<Verdict> {
        self.slot(id).and_then(|s| s.cursor.as_ref()).map(Cursor::verdict)
    }

    pub fn constraint_status(&self, id: &str) -> Option<ConstraintStatus> {
        self.slot(id).map(|s| s.status)
    }

    /// Ids of constraints currently being monitored.
    pub fn active_constraints(&self) -> impl Iterator<Item = &ConstraintDecl> {
        self.constraints.iter().filter(|s| s.status == ConstraintStatus::Active).map(|s| &s.decl)
    }

    /// Antecedent and consequent verdicts of a commitment's current instance.
    pub fn commitment_verdicts(&self, label: &str) -> Option<(Verdict, Verdict)> {
        self.cursors.get(label).map(|c| (c.antecedent.verdict(), c.consequent.verdict()))
    }

    /// Compiled monitor for `expr`, shared with every other user in the session.
    pub fn automaton(&mut self, expr: &RegulationExpr) -> SharedAutomaton {
        self.cache.entry(expr.clone()).or_insert_with(|| Arc::new(compile_monitor(expr))).clone()
    }

    fn slot(&self, id: &str) -> Option<&ConstraintSlot> {
        self.constraints.iter().find(|s| s.decl.id == id)
    }

    fn push_slot(&mut self, decl: ConstraintDecl) {
        let active = decl.active;
        self.constraints.push(ConstraintSlot { decl, status: ConstraintStatus::Inactive, cursor: None, activated_at: None });
        if active {
            let i = self.constraints.len() - 1;
            self.activate_slot(i);
        }
    }

    fn activate_slot(&mut self, i: usize) {
        let automaton = self.automaton(&self.constraints[i].decl.expr.clone());
        let slot = &mut self.constraints[i];
        slot.cursor = Some(Cursor::new(automaton));
        slot.status = ConstraintStatus::Active;
        slot.activated_at = Some(self.state.len());
    }

    /// Meta-action: activate or retire a constraint without stopping the interaction.
    ///
    /// Activation starts a fresh cursor on the suffix from the current event
    /// index; activating an already active constraint does nothing.
    /// Retirement freezes the cursor. Past violations stay on record.
    pub fn set_constraint_active(&mut self, id: &str, active: bool) -> Result<(), MonitorError> {
        let i = self
            .constraints
            .iter()
            .position(|s| s.decl.id == id)
            .ok_or_else(|| MonitorError::UnknownConstraint(id.to_string()))?;
        match (self.constraints[i].status, active) {
            (ConstraintStatus::Active, true) => {}
            (_, true) => self.activate_slot(i),
            (ConstraintStatus::Active, false) => self.constraints[i].status = ConstraintStatus::Retired,
            (_, false) => {}
        }
        self.log.push(if active { LogEntry::Activate(id.to_string()) } else { LogEntry::Retire(id.to_string()) });
        Ok(())
    }

    /// Meta-action: introduce a new constraint at runtime.
    pub fn add_constraint(&mut self, decl: ConstraintDecl) -> Result<(), MonitorError> {
        if self.slot(&decl.id).is_some() {
            return Err(MonitorError::DuplicateConstraint(decl.id));
        }
        if let Some(atom) = self.protocol.unresolved_atoms(&decl.expr).first() {
            return Err(MonitorError::UnresolvedAtom { id: decl.id.clone(), atom: (*atom).clone() });
        }
        self.log.push(LogEntry::Add(decl.clone()));
        self.push_slot(decl);
        Ok(())
    }

    /// Processes one event. Only constitutive errors (unknown action, role
    /// mismatch) reject it; regulative problems are recorded as violations.
    pub fn step(&mut self, event: &Event) -> Result<StepReport, MonitorError> {
        let protocol = Arc::clone(&self.protocol);
        let effects = self.state.apply_event(&protocol, &self.binding, event)?;
        let index = effects.index;
        self.log.push(LogEntry::Event(event.clone()));

        let mut report = StepReport {
            index,
            event: event.clone(),
            new_atoms: effects.new_atoms.clone(),
            verdicts: Vec::new(),
            transitions: effects.transitions.clone(),
            violations: Vec::new(),
        };

        for t in &effects.transitions {
            if t.mv == Move::Cancel && t.from == CommitmentState::Detached {
                let debtor = self.state.commitment(&t.label).map(|c| c.debtor.clone()).unwrap_or_default();
                report.violations.push(self.commitment_violation(&t.label, &debtor, index));
            }
        }
        for label in &effects.created {
            let template = protocol.find_commitment(label).expect("validated");
            let cursors = CommitmentCursors {
                antecedent: Cursor::new(self.automaton(&template.antecedent)),
                consequent: Cursor::new(self.automaton(&template.consequent)),
            };
            self.cursors.insert(label.clone(), cursors);
        }

        // Commitment cursors see the event's constitutive atoms first, then
        // each wave of lifecycle atoms those cause, as separate letters.
        let mut wave = effects.new_atoms;
        loop {
            if !wave.is_empty() {
                for (label, cursors) in self.cursors.iter_mut() {
                    if self.state.commitment(label).is_some_and(CommitmentInstance::is_live) {
                        cursors.antecedent.step(&wave);
                        cursors.consequent.step(&wave);
                    }
                }
            }
            let moves = self.lifecycle_moves();
            if moves.is_empty() {
                break;
            }
            wave = Vec::new();
            for (label, mv) in moves {
                let t = self.state.transition_commitment(&label, mv, index)?;
                if mv == Move::Violate {
                    let debtor = self.state.commitment(&label).map(|c| c.debtor.clone()).unwrap_or_default();
                    report.violations.push(self.commitment_violation(&label, &debtor, index));
                }
                let atom = t.status_atom();
                if self.state.first(&atom) == Some(index) && !report.new_atoms.contains(&atom) {
                    report.new_atoms.push(atom.clone());
                    wave.push(atom);
                }
                report.transitions.push(t);
            }
        }

        // Constraints see everything that became true at this index at once.
        for slot in self.constraints.iter_mut().filter(|s| s.status == ConstraintStatus::Active) {
            let cursor = slot.cursor.as_mut().expect("active slots have cursors");
            let before = cursor.verdict();
            let after = cursor.step(&report.new_atoms);
            if before != after {
                report.verdicts.push((slot.decl.id.clone(), before, after));
                if after == Verdict::PermViol {
                    report.violations.push(ViolationRecord {
                        source: ViolationSource::Constraint(slot.decl.id.clone()),
                        index,
                        severity: slot.decl.severity,
                        culprit: Culprit::Agent(event.agent.clone()),
                        heuristic: true,
                    });
                }
            }
        }

        self.violations.extend(report.violations.iter().cloned());
        Ok(report)
    }

    /// Detach, then discharge or violate, based on current cursor verdicts.
    fn lifecycle_moves(&self) -> Vec<(String, Move)> {
        let mut moves = Vec::new();
        for (label, cursors) in &self.cursors {
            let Some(c) = self.state.commitment(label) else { continue };
            let mut state = c.state;
            // Achievement-only antecedents are PermSat as soon as they hold,
            // so settled satisfaction covers satisfied-now detachment for them.
            if state == CommitmentState::Conditional && cursors.antecedent.verdict() == Verdict::PermSat {
                moves.push((label.clone(), Move::Detach));
                state = CommitmentState::Detached;
            }
            if state == CommitmentState::Detached {
                match cursors.consequent.verdict() {
                    Verdict::PermSat => moves.push((label.clone(), Move::Discharge)),
                    Verdict::PermViol => moves.push((label.clone(), Move::Violate)),
                    _ => {}
                }
            }
        }
        moves
    }

    fn commitment_violation(&self, label: &str, debtor_role: &str, index: usize) -> ViolationRecord {
        ViolationRecord {
            source: ViolationSource::Commitment(label.to_string()),
            index,
            severity: Severity::default(),
            culprit: Culprit::Agent(self.binding.agent_for(debtor_role)),
            heuristic: false,
        }
    }

    /// Ends the interaction: pending constraint obligations become
    /// violations, commitments are settled, and everything is reported.
    pub fn close(mut self) -> FinalReport {
        let index = self.state.len();
        let mut pending = Vec::new();
        for slot in self.constraints.iter().filter(|s| s.status == ConstraintStatus::Active) {
            if slot.cursor.as_ref().map(Cursor::verdict) == Some(Verdict::TempViol) {
                pending.push(ViolationRecord {
                    source: ViolationSource::Constraint(slot.decl.id.clone()),
                    index,
                    severity: slot.decl.severity,
                    culprit: Culprit::EndOfTrace,
                    heuristic: false,
                });
            }
        }
        self.violations.extend(pending);

        let cursors = &self.cursors;
        let close_transitions = self
            .state
            .close_trace(|c| cursors.get(&c.label).is_some_and(|k| k.consequent.verdict().is_satisfied()));
        for t in &close_transitions {
            if t.mv == Move::Violate {
                let debtor = self.state.commitment(&t.label).map(|c| c.debtor.clone()).unwrap_or_default();
                let v = self.commitment_violation(&t.label, &debtor, index);
                self.violations.push(v);
            }
        }

        let constraints = self
            .constraints
            .iter()
            .map(|s| ConstraintOutcome {
                id: s.decl.id.clone(),
                severity: s.decl.severity,
                status: s.status,
                verdict: s.cursor.as_ref().map(Cursor::verdict),
            })
            .collect();
        let commitments = self
            .protocol
            .commitments
            .iter()
            .filter_map(|t| self.state.commitment(&t.label).cloned())
            .collect();
        FinalReport {
            events: index,
            constraints,
            commitments,
            close_transitions,
            violations: self.violations,
        }
    }

    /// Everything that determines how the session reacts to future events.
    pub(crate) fn fingerprint(&self) -> SessionKey {
        SessionKey {
            constraints: self
                .constraints
                .iter()
                .map(|s| (s.status == ConstraintStatus::Active, s.cursor.as_ref().map(Cursor::state)))
                .collect(),
            commitments: self
                .state
                .commitments()
                .map(|c| {
                    let k = &self.cursors[&c.label];
                    (c.label.clone(), c.state, c.expired, k.antecedent.state(), k.consequent.state())
                })
                .collect(),
            atoms: self.state.true_atoms().map(|(a, _)| a.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct SessionKey {
    constraints: Vec<(bool, Option<usize>)>,
    commitments: Vec<(String, CommitmentState, bool, usize, usize)>,
    atoms: BTreeSet<Atom>,
}

impl FinalReport {
    pub fn commitment(&self, label: &str) -> Option<&CommitmentInstance> {
        self.commitments.iter().find(|c| c.label == label)
    }

    pub fn constraint(&self, id: &str) -> Option<&ConstraintOutcome> {
        self.constraints.iter().find(|c| c.id == id)
    }
}
