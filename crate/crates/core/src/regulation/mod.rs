//! Temporal regulations: the AST, its finite-trace semantics and its renderings.
//!
//! Regulations talk about the order in which atoms *first become true* in the
//! social state. Since the social state is monotone, a trace is fully
//! described (for regulation purposes) by its [`FirstOccurrence`] map, and
//! [`RegulationExpr::holds`] is the reference semantics every other
//! evaluator in the crate is checked against.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::atom::Atom;

pub use parse::{parse_regulation, ParseError};
pub(crate) use parse::RegParser;

/// A temporal regulation. Temporal operators take atoms, not sub-expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegulationExpr {
    Top,
    /// `achieve a`: a becomes true at some point.
    Achieve(Atom),
    /// `a before b`: b may only become true strictly after a did.
    Before(Atom, Atom),
    /// `a response b`: if a becomes true, b becomes true then or later.
    Response(Atom, Atom),
    /// `a coexist b`: either both become true or neither does.
    Coexist(Atom, Atom),
    And(Box<RegulationExpr>, Box<RegulationExpr>),
    Or(Box<RegulationExpr>, Box<RegulationExpr>),
}

impl RegulationExpr {
    pub fn achieve(a: Atom) -> Self {
        RegulationExpr::Achieve(a)
    }

    pub fn before(a: Atom, b: Atom) -> Self {
        RegulationExpr::Before(a, b)
    }

    pub fn response(a: Atom, b: Atom) -> Self {
        RegulationExpr::Response(a, b)
    }

    pub fn coexist(a: Atom, b: Atom) -> Self {
        RegulationExpr::Coexist(a, b)
    }

    pub fn and(self, other: RegulationExpr) -> Self {
        RegulationExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: RegulationExpr) -> Self {
        RegulationExpr::Or(Box::new(self), Box::new(other))
    }

    /// All atoms mentioned, in sorted order.
    pub fn atoms(&self) -> BTreeSet<&Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a Atom>) {
        match self {
            RegulationExpr::Top => {}
            RegulationExpr::Achieve(a) => {
                out.insert(a);
            }
            RegulationExpr::Before(a, b) | RegulationExpr::Response(a, b) | RegulationExpr::Coexist(a, b) => {
                out.insert(a);
                out.insert(b);
            }
            RegulationExpr::And(l, r) | RegulationExpr::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Ended-now truth value on a trace summarised by its first occurrences.
    pub fn holds(&self, first: &FirstOccurrence) -> bool {
        match self {
            RegulationExpr::Top => true,
            RegulationExpr::Achieve(a) => first.get(a).is_some(),
            RegulationExpr::Before(a, b) => match (first.get(a), first.get(b)) {
                (_, None) => true,
                (Some(fa), Some(fb)) => fa < fb,
                (None, Some(_)) => false,
            },
            RegulationExpr::Response(a, b) => match (first.get(a), first.get(b)) {
                (None, _) => true,
                (Some(fa), Some(fb)) => fb >= fa,
                (Some(_), None) => false,
            },
            RegulationExpr::Coexist(a, b) => first.get(a).is_some() == first.get(b).is_some(),
            RegulationExpr::And(l, r) => l.holds(first) && r.holds(first),
            RegulationExpr::Or(l, r) => l.holds(first) || r.holds(first),
        }
    }

    /// The non-vacuous reading of a regulation taken on as commitment content:
    /// the debtor has to make the mentioned atoms happen, in the given order.
    ///
    /// `a before b` becomes `a before b and achieve b`, `a response b` becomes
    /// `a response b and achieve a`, `a coexist b` becomes
    /// `achieve a and achieve b`.
    pub fn fulfilment(&self) -> RegulationExpr {
        use RegulationExpr::*;
        match self {
            Top => Top,
            Achieve(a) => Achieve(a.clone()),
            Before(a, b) => Before(a.clone(), b.clone()).and(Achieve(b.clone())),
            Response(a, b) => Response(a.clone(), b.clone()).and(Achieve(a.clone())),
            Coexist(a, b) => Achieve(a.clone()).and(Achieve(b.clone())),
            And(l, r) => l.fulfilment().and(r.fulfilment()),
            Or(l, r) => l.fulfilment().or(r.fulfilment()),
        }
    }

    /// Renders the regulation as an LTLf formula over "becomes true" event
    /// propositions (each atom holds at exactly the position where it first
    /// became true).
    ///
    /// `before` is rendered as weak until plus the strict-tie refinement,
    /// written `!(first(a)=first(b))`, which in event form is `!F(a & b)`.
    pub fn to_ltlf(&self) -> String {
        match self {
            RegulationExpr::Top => "true".to_string(),
            RegulationExpr::Achieve(a) => format!("F {a}"),
            RegulationExpr::Before(a, b) => format!("(!{b} W {a}) & !(first({a})=first({b}))"),
            RegulationExpr::Response(a, b) => format!("G({a} -> F {b})"),
            RegulationExpr::Coexist(a, b) => format!("F {a} <-> F {b}"),
            RegulationExpr::And(l, r) => format!("({}) & ({})", l.to_ltlf(), r.to_ltlf()),
            RegulationExpr::Or(l, r) => format!("({}) | ({})", l.to_ltlf(), r.to_ltlf()),
        }
    }

    /// True when the expression contains no ordering operator.
    pub fn is_achievement_only(&self) -> bool {
        match self {
            RegulationExpr::Top | RegulationExpr::Achieve(_) => true,
            RegulationExpr::Before(..) | RegulationExpr::Response(..) | RegulationExpr::Coexist(..) => false,
            RegulationExpr::And(l, r) | RegulationExpr::Or(l, r) => l.is_achievement_only() && r.is_achievement_only(),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, child: &RegulationExpr, left: bool) -> fmt::Result {
        let same_op = matches!(
            (self, child),
            (RegulationExpr::And(..), RegulationExpr::And(..)) | (RegulationExpr::Or(..), RegulationExpr::Or(..))
        );
        let compound = matches!(child, RegulationExpr::And(..) | RegulationExpr::Or(..));
        if compound && !(left && same_op) {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

/// Pretty printing. `parse_regulation(&e.to_string()) == Ok(e)` for every `e`.
impl fmt::Display for RegulationExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegulationExpr::Top => f.write_str("top"),
            RegulationExpr::Achieve(a) => write!(f, "achieve {a}"),
            RegulationExpr::Before(a, b) => write!(f, "{a} before {b}"),
            RegulationExpr::Response(a, b) => write!(f, "{a} response {b}"),
            RegulationExpr::Coexist(a, b) => write!(f, "{a} coexist {b}"),
            RegulationExpr::And(l, r) => {
                self.fmt_child(f, l, true)?;
                f.write_str(" and ")?;
                self.fmt_child(f, r, false)
            }
            RegulationExpr::Or(l, r) => {
                self.fmt_child(f, l, true)?;
                f.write_str(" or ")?;
                self.fmt_child(f, r, false)
            }
        }
    }
}

impl FromStr for RegulationExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_regulation(s)
    }
}

pub fn pretty_print(expr: &RegulationExpr) -> String {
    expr.to_string()
}

/// Least event index at which each atom held. Atoms that never held are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FirstOccurrence {
    first: BTreeMap<Atom, usize>,
}

impl FirstOccurrence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `atom` at `index` unless it already holds earlier.
    pub fn record(&mut self, atom: Atom, index: usize) {
        let slot = self.first.entry(atom).or_insert(index);
        if index < *slot {
            *slot = index;
        }
    }

    pub fn get(&self, atom: &Atom) -> Option<usize> {
        self.first.get(atom).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, usize)> {
        self.first.iter().map(|(a, i)| (a, *i))
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// First occurrences as seen by an observer that starts at `from`: atoms
    /// that held before `from` are invisible, the rest are re-indexed.
    pub fn suffix(&self, from: usize) -> FirstOccurrence {
        FirstOccurrence {
            first: self
                .first
                .iter()
                .filter(|(_, &i)| i >= from)
                .map(|(a, &i)| (a.clone(), i - from))
                .collect(),
        }
    }

    /// Builds the map from a sequence of social-state snapshots, where
    /// `states[i]` is the set of atoms true after event `i`.
    pub fn from_states<'a, S, I>(states: S) -> Self
    where
        S: IntoIterator<Item = I>,
        I: IntoIterator<Item = &'a Atom>,
    {
        let mut first = FirstOccurrence::new();
        for (index, state) in states.into_iter().enumerate() {
            for atom in state {
                first.record(atom.clone(), index);
            }
        }
        first
    }
}

impl FromIterator<(Atom, usize)> for FirstOccurrence {
    fn from_iter<T: IntoIterator<Item = (Atom, usize)>>(iter: T) -> Self {
        let mut first = FirstOccurrence::new();
        for (a, i) in iter {
            first.record(a, i);
        }
        first
    }
}

/// Evaluates `expr` at the end of a finite trace of social states.
pub fn eval_on_trace(expr: &RegulationExpr, trace: &[BTreeSet<Atom>]) -> bool {
    expr.holds(&FirstOccurrence::from_states(trace))
}

/// How relevant a violation of a constraint is.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Low,
    #[default]
    Medium,
    High,
}

impl Severity {
    pub fn keyword(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "low" => Some(Severity::Low),
            "medium" => Some(Severity::Medium),
            "high" => Some(Severity::High),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A regulative constraint of a protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub id: String,
    pub expr: RegulationExpr,
    pub severity: Severity,
    /// Whether the constraint is monitored from the start of a session.
    pub active: bool,
    /// Source line, when parsed from a protocol file.
    pub line: Option<usize>,
}

impl ConstraintDecl {
    pub fn new(id: impl Into<String>, expr: RegulationExpr) -> Self {
        ConstraintDecl {
            id: id.into(),
            expr,
            severity: Severity::default(),
            active: true,
            line: None,
        }
    }

    pub fn with_severity(mut self, severity: Severity) -> Self {
        self.severity = severity;
        self
    }

    pub fn inactive(mut self) -> Self {
        self.active = false;
        self
    }
}
