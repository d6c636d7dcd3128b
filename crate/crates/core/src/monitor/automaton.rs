//! Deterministic monitors for regulations.
//!
//! Each temporal operator has a small hand-written automaton over "atoms that
//! became true at this event" letters. Conjunctions and disjunctions are
//! synchronous products. Every intermediate result is minimised, and each
//! state of the final machine is labelled with a four-valued [`Verdict`] by
//! looking at which acceptance values remain reachable from it.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::atom::Atom;
use crate::regulation::RegulationExpr;

/// Largest number of distinct atoms a single regulation may mention.
pub const MAX_ATOMS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    /// Satisfied now and on every continuation.
    PermSat,
    /// Violated now and on every continuation.
    PermViol,
    /// Satisfied now; some continuation violates it.
    TempSat,
    /// Violated now; some continuation satisfies it.
    TempViol,
}

impl Verdict {
    /// Ended-now reading.
    pub fn is_satisfied(self) -> bool {
        matches!(self, Verdict::PermSat | Verdict::TempSat)
    }

    pub fn is_permanent(self) -> bool {
        matches!(self, Verdict::PermSat | Verdict::PermViol)
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::PermSat => "PermSat",
            Verdict::PermViol => "PermViol",
            Verdict::TempSat => "TempSat",
            Verdict::TempViol => "TempViol",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bit set over an automaton's atom list.
pub type Letter = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorAutomaton {
    atoms: Vec<Atom>,
    verdicts: Vec<Verdict>,
    /// `next[state][letter]`
    next: Vec<Vec<usize>>,
}

impl MonitorAutomaton {
    /// The initial state is always 0.
    pub const INITIAL: usize = 0;

    /// Atoms the automaton reacts to, sorted. Everything else self-loops.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    pub fn verdict(&self, state: usize) -> Verdict {
        self.verdicts[state]
    }

    pub fn next(&self, state: usize, letter: Letter) -> usize {
        self.next[state][letter as usize]
    }

    /// Letter for a set of atoms that became true together; atoms outside
    /// the automaton's alphabet are ignored.
    pub fn letter<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> Letter {
        atoms
            .into_iter()
            .filter_map(|a| self.atoms.binary_search(a).ok())
            .fold(0, |acc, i| acc | (1 << i))
    }

    /// Runs the automaton over a sequence of events and returns the final state.
    pub fn run<'a, E, I>(&self, events: E) -> usize
    where
        E: IntoIterator<Item = I>,
        I: IntoIterator<Item = &'a Atom>,
    {
        events.into_iter().fold(Self::INITIAL, |s, ev| self.next(s, self.letter(ev)))
    }
}

/// Compiles `expr` into a minimal deterministic monitor.
///
/// # Panics
///
/// If `expr` mentions more than [`MAX_ATOMS`] distinct atoms.
pub fn compile_monitor(expr: &RegulationExpr) -> MonitorAutomaton {
    assert!(
        expr.atoms().len() <= MAX_ATOMS,
        "regulation mentions more than {MAX_ATOMS} atoms"
    );
    let dfa = build(expr);
    let verdicts = label(&dfa);
    MonitorAutomaton { atoms: dfa.atoms, verdicts, next: dfa.next }
}

/// Shared, cheaply clonable compiled monitor.
pub type SharedAutomaton = Arc<MonitorAutomaton>;

/// A position in a compiled monitor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cursor {
    automaton: SharedAutomaton,
    state: usize,
}

impl Cursor {
    pub fn new(automaton: SharedAutomaton) -> Self {
        Cursor { automaton, state: MonitorAutomaton::INITIAL }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn automaton(&self) -> &SharedAutomaton {
        &self.automaton
    }

    pub fn verdict(&self) -> Verdict {
        self.automaton.verdict(self.state)
    }

    /// Advances on the atoms that became true at one event.
    pub fn step<'a>(&mut self, atoms: impl IntoIterator<Item = &'a Atom>) -> Verdict {
        let letter = self.automaton.letter(atoms);
        self.state = self.automaton.next(self.state, letter);
        self.verdict()
    }
}

#[derive(Debug, Clone)]
struct Dfa {
    atoms: Vec<Atom>,
    accept: Vec<bool>,
    next: Vec<Vec<usize>>,
    initial: usize,
}

fn build(expr: &RegulationExpr) -> Dfa {
    match expr {
        RegulationExpr::Top => Dfa { atoms: vec![], accept: vec![true], next: vec![vec![0]], initial: 0 },
        RegulationExpr::Achieve(a) => binary(a, a, &ACHIEVE),
        RegulationExpr::Before(a, b) => binary(a, b, &BEFORE),
        RegulationExpr::Response(a, b) => binary(a, b, &RESPONSE),
        RegulationExpr::Coexist(a, b) => binary(a, b, &COEXIST),
        RegulationExpr::And(l, r) => minimize(&product(&build(l), &build(r), |x, y| x && y)),
        RegulationExpr::Or(l, r) => minimize(&product(&build(l), &build(r), |x, y| x || y)),
    }
}

/// Hand-written machine over two atoms. `step(state, saw_a, saw_b)` gives the
/// successor; state 0 is initial. States remember what already happened, so
/// seeing an atom again never changes anything.
struct OperatorTable {
    accept: &'static [bool],
    step: fn(usize, bool, bool) -> usize,
}

// achieve a: 0 waiting, 1 done
const ACHIEVE: OperatorTable = OperatorTable {
    accept: &[false, true],
    step: |s, a, _| if a { 1 } else { s },
};

// a before b: 0 nothing yet, 1 a came first, 2 b came first or together with a
const BEFORE: OperatorTable = OperatorTable {
    accept: &[true, true, false],
    step: |s, a, b| match s {
        0 if b => 2,
        0 if a => 1,
        _ => s,
    },
};

// a response b: 0 idle, 1 b without a, 2 a pending, 3 answered, 4 broken (b preceded a)
const RESPONSE: OperatorTable = OperatorTable {
    accept: &[true, true, false, true, false],
    step: |s, a, b| match (s, a, b) {
        (0, true, true) => 3,
        (0, true, false) => 2,
        (0, false, true) => 1,
        (1, true, _) => 4,
        (2, _, true) => 3,
        _ => s,
    },
};

// a coexist b: 0 neither, 1 only a, 2 only b, 3 both
const COEXIST: OperatorTable = OperatorTable {
    accept: &[true, false, false, true],
    step: |s, a, b| match (s, a, b) {
        (0, true, true) => 3,
        (0, true, false) => 1,
        (0, false, true) => 2,
        (1, _, true) | (2, true, _) => 3,
        _ => s,
    },
};

fn binary(a: &Atom, b: &Atom, table: &OperatorTable) -> Dfa {
    let mut atoms = vec![a.clone(), b.clone()];
    atoms.sort();
    atoms.dedup();
    let bit_a = 1 << atoms.binary_search(a).expect("present");
    let bit_b = 1 << atoms.binary_search(b).expect("present");
    let letters = 1usize << atoms.len();
    let next = (0..table.accept.len())
        .map(|s| (0..letters).map(|l| (table.step)(s, l & bit_a != 0, l & bit_b != 0)).collect())
        .collect();
    minimize(&Dfa { atoms, accept: table.accept.to_vec(), next, initial: 0 })
}

/// Reachable part of the synchronous product.
fn product(l: &Dfa, r: &Dfa, combine: fn(bool, bool) -> bool) -> Dfa {
    let mut atoms: Vec<Atom> = l.atoms.iter().chain(&r.atoms).cloned().collect();
    atoms.sort();
    atoms.dedup();
    let project = |side: &[Atom]| -> Vec<usize> {
        side.iter().map(|a| atoms.binary_search(a).expect("union contains side")).collect()
    };
    let (pl, pr) = (project(&l.atoms), project(&r.atoms));
    let restrict = |letter: usize, positions: &[usize]| -> usize {
        positions.iter().enumerate().fold(0, |acc, (i, &p)| acc | (((letter >> p) & 1) << i))
    };
    let letters = 1usize << atoms.len();

    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs = vec![(l.initial, r.initial)];
    index.insert((l.initial, r.initial), 0);
    let mut next: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (sl, sr) = pairs[i];
        let row = (0..letters)
            .map(|letter| {
                let succ = (l.next[sl][restrict(letter, &pl)], r.next[sr][restrict(letter, &pr)]);
                *index.entry(succ).or_insert_with(|| {
                    pairs.push(succ);
                    pairs.len() - 1
                })
            })
            .collect();
        next.push(row);
        i += 1;
    }
    let accept = pairs.iter().map(|&(sl, sr)| combine(l.accept[sl], r.accept[sr])).collect();
    Dfa { atoms, accept, next, initial: 0 }
}

/// Moore partition refinement, then renumbering in breadth-first order from
/// the initial state (so the result is canonical and starts at 0).
fn minimize(dfa: &Dfa) -> Dfa {
    let n = dfa.accept.len();
    let mut class: Vec<usize> = dfa.accept.iter().map(|&a| usize::from(a)).collect();
    let mut count = 0;
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let refined: Vec<usize> = (0..n)
            .map(|s| {
                let sig = (class[s], dfa.next[s].iter().map(|&t| class[t]).collect());
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let new_count = ids.len();
        class = refined;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    let letters = dfa.next.first().map_or(1, Vec::len);
    let mut order: Vec<usize> = Vec::new();
    let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([class[dfa.initial]]);
    renumber.insert(class[dfa.initial], 0);
    let representative: BTreeMap<usize, usize> = (0..n).rev().map(|s| (class[s], s)).collect();
    while let Some(c) = queue.pop_front() {
        order.push(c);
        let rep = representative[&c];
        for letter in 0..letters {
            let t = class[dfa.next[rep][letter]];
            if !renumber.contains_key(&t) {
                renumber.insert(t, renumber.len());
                queue.push_back(t);
            }
        }
    }
    let accept = order.iter().map(|c| dfa.accept[representative[c]]).collect();
    let next = order
        .iter()
        .map(|c| {
            let rep = representative[c];
            (0..letters).map(|l| renumber[&class[dfa.next[rep][l]]]).collect()
        })
        .collect();
    Dfa { atoms: dfa.atoms.clone(), accept, next, initial: 0 }
}

fn label(dfa: &Dfa) -> Vec<Verdict> {
    (0..dfa.accept.len())
        .map(|s| {
            let mut seen = vec![false; dfa.accept.len()];
            let mut stack = vec![s];
            seen[s] = true;
            let (mut any_accept, mut any_reject) = (false, false);
            while let Some(q) = stack.pop() {
                if dfa.accept[q] {
                    any_accept = true;
                } else {
                    any_reject = true;
                }
                for &t in &dfa.next[q] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            match (dfa.accept[s], any_accept, any_reject) {
                (true, _, false) => Verdict::PermSat,
                (false, false, _) => Verdict::PermViol,
                (true, _, true) => Verdict::TempSat,
                (false, true, _) => Verdict::TempViol,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regulation::parse_regulation;

    fn compile(text: &str) -> MonitorAutomaton {
        compile_monitor(&parse_regulation(text).unwrap())
    }

    fn f(n: &str) -> Atom {
        Atom::fact(n)
    }

    #[test]
    fn achieve_has_two_states() {
        let m = compile("achieve a");
        assert_eq!(m.len(), 2);
        assert_eq!(m.verdict(0), Verdict::TempViol);
        let s = m.next(0, m.letter([&f("a")]));
        assert_eq!(m.verdict(s), Verdict::PermSat);
    }

    #[test]
    fn before_has_three_states() {
        let m = compile("a before b");
        assert_eq!(m.len(), 3);
        assert_eq!(m.verdict(0), Verdict::TempSat);
        assert_eq!(m.verdict(m.next(0, m.letter([&f("a")]))), Verdict::PermSat);
        assert_eq!(m.verdict(m.next(0, m.letter([&f("b")]))), Verdict::PermViol);
        assert_eq!(m.verdict(m.next(0, m.letter([&f("a"), &f("b")]))), Verdict::PermViol);
    }

    #[test]
    fn top_is_one_permsat_state() {
        let m = compile("top");
        assert_eq!(m.len(), 1);
        assert_eq!(m.verdict(0), Verdict::PermSat);
    }

    #[test]
    fn response_and_coexist_sizes() {
        assert_eq!(compile("a response b").len(), 5);
        assert_eq!(compile("a coexist b").len(), 4);
        // degenerate operands
        assert_eq!(compile("a before a").verdict(0), Verdict::TempSat);
        assert_eq!(compile("a coexist a").verdict(0), Verdict::PermSat);
    }

    #[test]
    fn products_are_minimised() {
        // the conjunction of a formula with itself is the formula
        assert_eq!(compile("a before b and a before b"), compile("a before b"));
        assert_eq!(compile("top and achieve a"), compile("achieve a"));
        assert_eq!(compile("top or achieve a").len(), 1);
        let m = compile("travel before punch and achieve punch");
        assert_eq!(m.len(), 4);
    }

    #[test]
    fn irrelevant_atoms_self_loop() {
        let m = compile("a before b");
        assert_eq!(m.letter([&f("zzz")]), 0);
        assert_eq!(m.next(0, 0), 0);
    }

    #[test]
    fn cursor_absorbs() {
        let mut c = Cursor::new(Arc::new(compile("a before b")));
        assert_eq!(c.step([&f("b")]), Verdict::PermViol);
        assert_eq!(c.step([&f("a")]), Verdict::PermViol);
    }
}
