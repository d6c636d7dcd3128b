// The LTLf rendering of every regulation agrees with the first-occurrence
// semantics. The rendering is parsed back here and evaluated by a small
// finite-trace LTL interpreter that knows nothing about first-occurrence maps.

use std::collections::BTreeSet;

use proptest::prelude::*;
use regula::atom::{Atom, CommitmentStatus};
use regula::regulation::{eval_on_trace, RegulationExpr};

#[derive(Debug, Clone)]
enum Ltl {
    True,
    Prop(String),
    /// Both atoms become true at the same position.
    Tie(String, String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Iff(Box<Ltl>, Box<Ltl>),
    Eventually(Box<Ltl>),
    Always(Box<Ltl>),
    WeakUntil(Box<Ltl>, Box<Ltl>),
}

struct Reader<'s> {
    s: &'s [u8],
    pos: usize,
}

impl<'s> Reader<'s> {
    fn parse(text: &'s str) -> Ltl {
        let mut r = Reader { s: text.as_bytes(), pos: 0 };
        let f = r.iff();
        r.ws();
        assert_eq!(r.pos, r.s.len(), "trailing input in {text:?}");
        f
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos] == b' ' {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Ltl {
        let l = self.implies();
        if self.eat("<->") {
            Ltl::Iff(l.into(), self.iff().into())
        } else {
            l
        }
    }

    fn implies(&mut self) -> Ltl {
        let l = self.or();
        if self.eat("->") {
            Ltl::Implies(l.into(), self.implies().into())
        } else {
            l
        }
    }

    fn or(&mut self) -> Ltl {
        let mut l = self.and();
        while self.eat("|") {
            l = Ltl::Or(l.into(), self.and().into());
        }
        l
    }

    fn and(&mut self) -> Ltl {
        let mut l = self.until();
        while self.eat("&") {
            l = Ltl::And(l.into(), self.until().into());
        }
        l
    }

    fn until(&mut self) -> Ltl {
        let l = self.unary();
        if self.eat("W ") {
            Ltl::WeakUntil(l.into(), self.unary().into())
        } else {
            l
        }
    }

    fn unary(&mut self) -> Ltl {
        if self.eat("!") {
            Ltl::Not(self.unary().into())
        } else if self.eat("F ") || self.eat("F(") && self.back() {
            Ltl::Eventually(self.unary().into())
        } else if self.eat("G(") && self.back() {
            Ltl::Always(self.unary().into())
        } else {
            self.primary()
        }
    }

    fn back(&mut self) -> bool {
        self.pos -= 1;
        true
    }

    fn primary(&mut self) -> Ltl {
        if self.eat("(") {
            let f = self.iff();
            assert!(self.eat(")"));
            return f;
        }
        if self.eat("true") {
            return Ltl::True;
        }
        if self.eat("first(") {
            let a = self.name();
            assert!(self.eat(")=first("));
            let b = self.name();
            assert!(self.eat(")"));
            return Ltl::Tie(a, b);
        }
        Ltl::Prop(self.name())
    }

    /// An atom as displayed: `name` or `status(label)`.
    fn name(&mut self) -> String {
        self.ws();
        let start = self.pos;
        let word = |c: u8| c.is_ascii_alphanumeric() || c == b'-' || c == b'_';
        while self.pos < self.s.len() && word(self.s[self.pos]) {
            self.pos += 1;
        }
        let head = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        assert!(!head.is_empty(), "expected an atom at {start}");
        if CommitmentStatus::from_keyword(head).is_some() && self.s.get(self.pos) == Some(&b'(') {
            while self.s[self.pos] != b')' {
                self.pos += 1;
            }
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string()
    }
}

/// Positions at which each atom becomes true.
struct Events {
    at: Vec<BTreeSet<String>>,
}

impl Events {
    fn holds(&self, f: &Ltl, i: usize) -> bool {
        let n = self.at.len();
        match f {
            Ltl::True => true,
            Ltl::Prop(p) => i < n && self.at[i].contains(p),
            Ltl::Tie(a, b) => self.at.iter().any(|s| s.contains(a) && s.contains(b)),
            Ltl::Not(g) => !self.holds(g, i),
            Ltl::And(l, r) => self.holds(l, i) && self.holds(r, i),
            Ltl::Or(l, r) => self.holds(l, i) || self.holds(r, i),
            Ltl::Implies(l, r) => !self.holds(l, i) || self.holds(r, i),
            Ltl::Iff(l, r) => self.holds(l, i) == self.holds(r, i),
            Ltl::Eventually(g) => (i..n).any(|j| self.holds(g, j)),
            Ltl::Always(g) => (i..n).all(|j| self.holds(g, j)),
            Ltl::WeakUntil(l, r) => {
                (i..n).all(|j| self.holds(l, j)) || (i..n).any(|k| self.holds(r, k) && (i..k).all(|j| self.holds(l, j)))
            }
        }
    }
}

fn atoms() -> Vec<Atom> {
    vec![Atom::fact("a"), Atom::fact("b-2"), Atom::status(CommitmentStatus::Violated, "c1")]
}

/// `steps[i]` lists the atoms asserted by event `i`; re-assertions are allowed.
fn check(expr: &RegulationExpr, steps: &[Vec<Atom>]) {
    let mut states = Vec::new();
    let mut seen = BTreeSet::new();
    let mut events = Events { at: Vec::new() };
    for step in steps {
        let fresh: BTreeSet<String> = step.iter().filter(|a| !seen.contains(*a)).map(|a| a.to_string()).collect();
        seen.extend(step.iter().cloned());
        states.push(seen.clone());
        events.at.push(fresh);
    }
    let formula = Reader::parse(&expr.to_ltlf());
    assert_eq!(
        events.holds(&formula, 0),
        eval_on_trace(expr, &states),
        "{expr} as {} on {steps:?}",
        expr.to_ltlf()
    );
}

fn basic_expressions() -> Vec<RegulationExpr> {
    let atoms = atoms();
    let mut out = vec![RegulationExpr::Top];
    for a in &atoms {
        out.push(RegulationExpr::achieve(a.clone()));
        for b in &atoms {
            out.push(RegulationExpr::before(a.clone(), b.clone()));
            out.push(RegulationExpr::response(a.clone(), b.clone()));
            out.push(RegulationExpr::coexist(a.clone(), b.clone()));
        }
    }
    out
}

#[test]
fn every_operator_on_every_short_trace() {
    let atoms = atoms();
    let letters: Vec<Vec<Atom>> = (0..8u32)
        .map(|mask| atoms.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.clone()).collect())
        .collect();
    let exprs = basic_expressions();
    let mut traces: Vec<Vec<Vec<Atom>>> = vec![vec![]];
    let mut frontier = traces.clone();
    for _ in 0..5 {
        frontier = frontier
            .iter()
            .flat_map(|t| letters.iter().map(move |l| [t.clone(), vec![l.clone()]].concat()))
            .collect();
        traces.extend(frontier.iter().cloned());
    }
    assert_eq!(traces.len(), 1 + 8 + 64 + 512 + 4096 + 32768);
    for trace in &traces {
        for e in &exprs {
            check(e, trace);
        }
    }
}

fn expr_strategy() -> impl Strategy<Value = RegulationExpr> {
    let leaf = prop::sample::select(basic_expressions());
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l.and(r)),
            (inner.clone(), inner).prop_map(|(l, r)| l.or(r)),
        ]
    })
}

proptest! {
    #[test]
    fn compound_expressions_agree(
        expr in expr_strategy(),
        trace in prop::collection::vec(prop::collection::vec(prop::sample::select(atoms()), 0..3), 0..6),
    ) {
        check(&expr, &trace);
    }
}

#[test]
fn renderings_are_the_documented_ones() {
    let a = Atom::fact("a");
    let b = Atom::fact("b");
    assert_eq!(RegulationExpr::before(a.clone(), b.clone()).to_ltlf(), "(!b W a) & !(first(a)=first(b))");
    let both = RegulationExpr::achieve(a.clone()).or(RegulationExpr::response(a, b));
    assert_eq!(both.to_ltlf(), "(F a) | (G(a -> F b))");
}
