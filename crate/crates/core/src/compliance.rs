//! Compliance of a regulation with the norms in force.
//!
//! A regulation is compatible with a running session when some extension of
//! the interaction fulfils it while no active constraint and no commitment is
//! violated. Fulfilment is the non-vacuous reading of the regulation: `a before
//! b` asks for both atoms, in that order.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::atom::Atom;
use crate::model::{Event, Protocol, SocialState};
use crate::monitor::{compile_monitor, Cursor, MonitorError, SessionKey, TraceSession};
use crate::regulation::{FirstOccurrence, RegulationExpr};

/// Environment variable overriding the oracle's trace budget.
pub const MAX_ORACLE_ENV: &str = "REGULA_MAX_ORACLE";
pub const DEFAULT_MAX_ORACLE: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplianceError {
    #[error("the search bound must be at least 1")]
    InvalidBound,
    #[error("atom `{0}` does not resolve against the protocol")]
    UnresolvedAtom(Atom),
    #[error("{traces} traces exceed the oracle budget of {limit} (set {MAX_ORACLE_ENV} to raise it)")]
    BoundTooLarge { traces: u64, limit: u64 },
    #[error("invalid value `{0}` for {MAX_ORACLE_ENV}")]
    BadBudget(String),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compatibility {
    Compatible,
    Incompatible,
}

impl fmt::Display for Compatibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compatibility::Compatible => "COMPATIBLE",
            Compatibility::Incompatible => "INCOMPATIBLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityResult {
    pub verdict: Compatibility,
    /// Shortest extension fulfilling the regulation, lexicographically first by action name.
    pub witness: Option<Vec<Event>>,
    /// Longest extension considered.
    pub bound_used: usize,
    /// True when every reachable configuration was visited before the bound.
    pub exhausted: bool,
}

/// Size of the product of the monitors involved: every active constraint, the
/// regulation's fulfilment monitor, and both monitors of each declared commitment.
pub fn product_bound(regulation: &RegulationExpr, session: &TraceSession) -> usize {
    let size = |e: &RegulationExpr| compile_monitor(e).len();
    let constraints = session.active_constraints().map(|d| size(&d.expr));
    let commitments = session
        .protocol()
        .commitments
        .iter()
        .map(|c| size(&c.antecedent).saturating_mul(size(&c.consequent)));
    constraints
        .chain(commitments)
        .fold(size(&regulation.fulfilment()), usize::saturating_mul)
}

/// Breadth-first search over extensions of `session` of length at most
/// `bound` (default: [`product_bound`]). Extensions that record a violation
/// are pruned; so are configurations already visited.
pub fn compatible_check(
    regulation: &RegulationExpr,
    session: &TraceSession,
    bound: Option<usize>,
) -> Result<CompatibilityResult, ComplianceError> {
    if let Some(atom) = session.protocol().unresolved_atoms(regulation).first() {
        return Err(ComplianceError::UnresolvedAtom((*atom).clone()));
    }
    let bound = match bound {
        Some(0) => return Err(ComplianceError::InvalidBound),
        Some(b) => b,
        None => product_bound(regulation, session),
    };
    let protocol = session.protocol();
    let mut actions: Vec<(String, Event)> = protocol
        .actions
        .iter()
        .map(|a| (a.name.clone(), Event::new(session.binding().agent_for(&a.actor), a.name.clone())))
        .collect();
    actions.sort_by(|x, y| x.0.cmp(&y.0));

    let baseline = session.violations().len();
    let start = Node { session: session.clone(), goal: Cursor::new(compile_monitor(&regulation.fulfilment()).into()), path: Vec::new() };
    let mut seen: HashSet<(SessionKey, usize)> = HashSet::from([start.key()]);
    let mut queue = VecDeque::from([start]);
    let mut truncated = false;
    while let Some(node) = queue.pop_front() {
        if node.fulfils(baseline) {
            return Ok(CompatibilityResult {
                verdict: Compatibility::Compatible,
                witness: Some(node.path),
                bound_used: bound,
                exhausted: false,
            });
        }
        if node.path.len() == bound {
            truncated = true;
            continue;
        }
        for (_, event) in &actions {
            let mut next = Node { session: node.session.clone(), goal: node.goal.clone(), path: node.path.clone() };
            let report = next.session.step(event)?;
            if next.session.violations().len() > baseline {
                continue;
            }
            next.goal.step(&report.new_atoms);
            next.path.push(event.clone());
            if seen.insert(next.key()) {
                queue.push_back(next);
            }
        }
    }
    Ok(CompatibilityResult { verdict: Compatibility::Incompatible, witness: None, bound_used: bound, exhausted: !truncated })
}

struct Node {
    session: TraceSession,
    goal: Cursor,
    path: Vec<Event>,
}

impl Node {
    fn key(&self) -> (SessionKey, usize) {
        (self.session.fingerprint(), self.goal.state())
    }

    fn fulfils(&self, baseline: usize) -> bool {
        self.goal.verdict().is_satisfied() && self.session.clone().close().violations.len() == baseline
    }
}

/// One trace of the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTrace {
    pub events: Vec<Event>,
    pub first: FirstOccurrence,
    /// `(constraint id, eval on the whole trace)` in declaration order.
    pub results: Vec<(String, bool)>,
}

/// Every action sequence of length at most `max_len`, shortest first, with
/// the first-occurrence map of its constitutive atoms and the reference
/// evaluation of each constraint. Commitment lifecycles are not simulated.
pub fn enumerate_oracle(protocol: &Protocol, max_len: usize) -> Result<OracleIter<'_>, ComplianceError> {
    let limit = match std::env::var(MAX_ORACLE_ENV) {
        Ok(v) => v.trim().parse::<u64>().map_err(|_| ComplianceError::BadBudget(v))?,
        Err(_) => DEFAULT_MAX_ORACLE,
    };
    let n = protocol.actions.len() as u64;
    let mut traces: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..=max_len {
        traces = traces.saturating_add(layer);
        layer = layer.saturating_mul(n);
    }
    if traces > limit {
        return Err(ComplianceError::BoundTooLarge { traces, limit });
    }
    Ok(OracleIter { protocol, max_len, current: Some(Vec::new()) })
}

pub struct OracleIter<'p> {
    protocol: &'p Protocol,
    max_len: usize,
    /// Indices into the action list of the next trace to yield.
    current: Option<Vec<usize>>,
}

impl Iterator for OracleIter<'_> {
    type Item = OracleTrace;

    fn next(&mut self) -> Option<OracleTrace> {
        let digits = self.current.take()?;
        let actions = &self.protocol.actions;
        self.current = advance(&digits, actions.len(), self.max_len);

        let mut state = SocialState::new();
        let mut first = FirstOccurrence::new();
        let events: Vec<Event> = digits
            .iter()
            .map(|&d| Event::new(actions[d].actor.clone(), actions[d].name.clone()))
            .collect();
        for (index, &d) in digits.iter().enumerate() {
            for fact in &actions[d].effects {
                let atom = Atom::fact(fact.clone());
                if state.assert_atom(atom.clone(), index) {
                    first.record(atom, index);
                }
            }
        }
        let results = self.protocol.constraints.iter().map(|d| (d.id.clone(), d.expr.holds(&first))).collect();
        Some(OracleTrace { events, first, results })
    }
}

/// Next sequence in shortlex order.
fn advance(digits: &[usize], base: usize, max_len: usize) -> Option<Vec<usize>> {
    if base == 0 {
        return None;
    }
    let mut next = digits.to_vec();
    for d in next.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return Some(next);
        }
        *d = 0;
    }
    (next.len() < max_len).then(|| vec![0; next.len() + 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionDef;
    use crate::regulation::{parse_regulation, ConstraintDecl};

    fn reg(s: &str) -> RegulationExpr {
        parse_regulation(s).unwrap()
    }

    fn train() -> Protocol {
        Protocol::new("train")
            .role("passenger")
            .action(ActionDef::new("punch-ticket", "passenger").means("punch"))
            .action(ActionDef::new("board-train", "passenger").means("travel"))
            .constraint(ConstraintDecl::new("punch-first", reg("punch before travel")))
    }

    #[test]
    fn train_ordering() {
        let session = TraceSession::start(train()).unwrap();
        let bad = compatible_check(&reg("travel before punch"), &session, None).unwrap();
        assert_eq!(bad.verdict, Compatibility::Incompatible);
        assert_eq!(bad.bound_used, 12);
        let good = compatible_check(&reg("punch before travel"), &session, None).unwrap();
        assert_eq!(good.verdict, Compatibility::Compatible);
        let names: Vec<&str> = good.witness.as_ref().unwrap().iter().map(|e| e.action.as_str()).collect();
        assert_eq!(names, ["punch-ticket", "board-train"]);
    }

    #[test]
    fn regulation_reads_the_future_only() {
        let mut session = TraceSession::start(train()).unwrap();
        session.step(&Event::new("passenger", "punch-ticket")).unwrap();
        let r = compatible_check(&reg("top"), &session, Some(3)).unwrap();
        assert_eq!(r.witness, Some(vec![]));
        let r = compatible_check(&reg("achieve punch"), &session, Some(3)).unwrap();
        assert_eq!((r.verdict, r.exhausted), (Compatibility::Incompatible, true));
        let r = compatible_check(&reg("achieve travel"), &session, None).unwrap();
        assert_eq!(r.witness.unwrap(), [Event::new("passenger", "board-train")]);
    }

    #[test]
    fn bound_limits_the_search() {
        let session = TraceSession::start(train()).unwrap();
        let r = compatible_check(&reg("punch before travel"), &session, Some(1)).unwrap();
        assert_eq!(r.verdict, Compatibility::Incompatible);
        assert_eq!(compatible_check(&reg("top"), &session, Some(0)), Err(ComplianceError::InvalidBound));
        assert_eq!(
            compatible_check(&reg("achieve fly"), &session, None),
            Err(ComplianceError::UnresolvedAtom(Atom::fact("fly")))
        );
    }

    #[test]
    fn shortlex_enumeration() {
        let mut seen = vec![];
        let mut d = Some(vec![]);
        while let Some(cur) = d {
            seen.push(cur.clone());
            d = advance(&cur, 2, 2);
        }
        assert_eq!(seen, [vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(advance(&[], 0, 3), None);
    }

    #[test]
    fn oracle_counts_and_evaluates() {
        let p = train();
        let all: Vec<OracleTrace> = enumerate_oracle(&p, 3).unwrap().collect();
        assert_eq!(all.len(), 1 + 2 + 4 + 8);
        let violating = all.iter().filter(|t| !t.results[0].1).count();
        // traces where travel occurs with no earlier punch
        let expected = all
            .iter()
            .filter(|t| {
                let pos = |n: &str| t.events.iter().position(|e| e.action == n);
                matches!((pos("punch-ticket"), pos("board-train")), (p, Some(b)) if p.is_none_or(|p| p > b))
            })
            .count();
        assert_eq!(violating, expected);
    }

    #[test]
    fn oracle_budget() {
        let p = train()
            .action(ActionDef::new("a", "passenger").means("x"))
            .action(ActionDef::new("b", "passenger").means("y"));
        // 4 actions up to length 12: (4^13 - 1) / 3 traces
        assert_eq!(
            enumerate_oracle(&p, 12).err(),
            Some(ComplianceError::BoundTooLarge { traces: 22_369_621, limit: DEFAULT_MAX_ORACLE })
        );
        assert!(enumerate_oracle(&p, 11).is_ok());
    }
}
