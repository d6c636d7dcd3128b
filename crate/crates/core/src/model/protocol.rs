use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::commitment::CommitmentTemplate;
use crate::atom::{is_fact_name, is_identifier, Atom};
use crate::regulation::{ConstraintDecl, RegulationExpr};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CommitmentOp {
    Create(String),
    Release(String),
    Cancel(String),
}

impl CommitmentOp {
    pub fn label(&self) -> &str {
        match self {
            CommitmentOp::Create(l) | CommitmentOp::Release(l) | CommitmentOp::Cancel(l) => l,
        }
    }
}

impl fmt::Display for CommitmentOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitmentOp::Create(l) => write!(f, "creates {l}"),
            CommitmentOp::Release(l) => write!(f, "releases {l}"),
            CommitmentOp::Cancel(l) => write!(f, "cancels {l}"),
        }
    }
}

/// Constitutive definition of an action: who performs it and what it means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub name: String,
    pub actor: String,
    /// Fact atoms asserted by the action.
    pub effects: Vec<String>,
    pub ops: Vec<CommitmentOp>,
    pub line: Option<usize>,
}

impl ActionDef {
    pub fn new(name: impl Into<String>, actor: impl Into<String>) -> Self {
        ActionDef { name: name.into(), actor: actor.into(), effects: Vec::new(), ops: Vec::new(), line: None }
    }

    pub fn means(mut self, fact: impl Into<String>) -> Self {
        self.effects.push(fact.into());
        self
    }

    pub fn creates(mut self, label: impl Into<String>) -> Self {
        self.ops.push(CommitmentOp::Create(label.into()));
        self
    }

    pub fn releases(mut self, label: impl Into<String>) -> Self {
        self.ops.push(CommitmentOp::Release(label.into()));
        self
    }

    pub fn cancels(mut self, label: impl Into<String>) -> Self {
        self.ops.push(CommitmentOp::Cancel(label.into()));
        self
    }
}

/// A protocol: roles and actions (constitutive part), plus commitment
/// templates and constraints (regulative part).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Protocol {
    pub name: String,
    pub roles: Vec<String>,
    /// Declared fact atoms. Facts named in action effects are declared implicitly.
    pub facts: BTreeSet<String>,
    pub actions: Vec<ActionDef>,
    pub commitments: Vec<CommitmentTemplate>,
    pub constraints: Vec<ConstraintDecl>,
}

/// One problem found by [`Protocol::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl Protocol {
    pub fn new(name: impl Into<String>) -> Self {
        Protocol { name: name.into(), ..Default::default() }
    }

    pub fn role(mut self, role: impl Into<String>) -> Self {
        self.roles.push(role.into());
        self
    }

    pub fn fact(mut self, fact: impl Into<String>) -> Self {
        self.facts.insert(fact.into());
        self
    }

    pub fn action(mut self, action: ActionDef) -> Self {
        self.facts.extend(action.effects.iter().cloned());
        self.actions.push(action);
        self
    }

    pub fn commitment(mut self, template: CommitmentTemplate) -> Self {
        self.commitments.push(template);
        self
    }

    pub fn constraint(mut self, decl: ConstraintDecl) -> Self {
        self.constraints.push(decl);
        self
    }

    pub fn find_action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn find_commitment(&self, label: &str) -> Option<&CommitmentTemplate> {
        self.commitments.iter().find(|c| c.label == label)
    }

    pub fn find_constraint(&self, id: &str) -> Option<&ConstraintDecl> {
        self.constraints.iter().find(|c| c.id == id)
    }

    pub fn has_role(&self, role: &str) -> bool {
        self.roles.iter().any(|r| r == role)
    }

    /// Every fact atom plus every status atom a declared label can produce.
    pub fn atom_universe(&self) -> BTreeSet<Atom> {
        let mut out: BTreeSet<Atom> = self.facts.iter().map(Atom::fact).collect();
        for c in &self.commitments {
            for status in crate::atom::CommitmentStatus::ALL {
                out.insert(Atom::status(status, c.label.clone()));
            }
        }
        out
    }

    /// Atoms of `expr` that do not resolve against this protocol.
    pub fn unresolved_atoms<'e>(&self, expr: &'e RegulationExpr) -> Vec<&'e Atom> {
        expr.atoms()
            .into_iter()
            .filter(|atom| match atom {
                Atom::Fact(name) => !self.facts.contains(name),
                Atom::Status(_, label) => self.find_commitment(label).is_none(),
            })
            .collect()
    }

    /// Closed-world validation of all references.
    pub fn validate(&self) -> Result<(), Vec<Issue>> {
        let mut issues = Vec::new();
        let mut push = |line: Option<usize>, message: String| issues.push(Issue { line, message });

        if !is_identifier(&self.name) {
            push(None, format!("protocol name `{}` is not a valid identifier", self.name));
        }
        let mut seen = BTreeSet::new();
        for role in &self.roles {
            if !is_identifier(role) {
                push(None, format!("role `{role}` is not a valid identifier"));
            }
            if !seen.insert(role) {
                push(None, format!("role `{role}` declared twice"));
            }
        }
        for fact in &self.facts {
            if !is_fact_name(fact) {
                push(None, format!("`{fact}` is not a valid fact name"));
            }
        }

        let labels: BTreeMap<&str, &CommitmentTemplate> = self.commitments.iter().map(|c| (c.label.as_str(), c)).collect();
        let mut seen = BTreeSet::new();
        for action in &self.actions {
            if !seen.insert(&action.name) {
                push(action.line, format!("action `{}` declared twice", action.name));
            }
            if !self.has_role(&action.actor) {
                push(action.line, format!("action `{}` is performed by undeclared role `{}`", action.name, action.actor));
            }
            if action.effects.is_empty() && action.ops.is_empty() {
                push(action.line, format!("action `{}` has no effect", action.name));
            }
            for op in &action.ops {
                if !labels.contains_key(op.label()) {
                    push(action.line, format!("action `{}` refers to undeclared commitment `{}`", action.name, op.label()));
                }
            }
        }

        let mut seen = BTreeSet::new();
        for c in &self.commitments {
            if !is_identifier(&c.label) {
                push(c.line, format!("commitment label `{}` is not a valid identifier", c.label));
            }
            if !seen.insert(&c.label) {
                push(c.line, format!("commitment `{}` declared twice", c.label));
            }
            for role in [&c.debtor, &c.creditor] {
                if !self.has_role(role) {
                    push(c.line, format!("commitment `{}` refers to undeclared role `{role}`", c.label));
                }
            }
            if c.debtor == c.creditor {
                push(c.line, format!("commitment `{}` has the same debtor and creditor", c.label));
            }
            for expr in [&c.antecedent, &c.consequent] {
                for atom in self.unresolved_atoms(expr) {
                    push(c.line, format!("commitment `{}` refers to undeclared atom `{atom}`", c.label));
                }
            }
        }

        let mut seen = BTreeSet::new();
        for decl in &self.constraints {
            if !seen.insert(&decl.id) {
                push(decl.line, format!("constraint `{}` declared twice", decl.id));
            }
            for atom in self.unresolved_atoms(&decl.expr) {
                push(decl.line, format!("constraint `{}` refers to undeclared atom `{atom}`", decl.id));
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

/// Which agents play which roles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Binding {
    /// An agent plays the role with the same name.
    #[default]
    Identity,
    /// Agent name to the roles it plays.
    Explicit(BTreeMap<String, BTreeSet<String>>),
}

impl Binding {
    pub fn explicit<I, A, R>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, R)>,
        A: Into<String>,
        R: Into<String>,
    {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (agent, role) in pairs {
            map.entry(agent.into()).or_default().insert(role.into());
        }
        Binding::Explicit(map)
    }

    pub fn plays(&self, agent: &str, role: &str) -> bool {
        match self {
            Binding::Identity => agent == role,
            Binding::Explicit(map) => map.get(agent).is_some_and(|roles| roles.contains(role)),
        }
    }

    /// Agents known to the binding, given the protocol's roles.
    pub fn agents(&self, protocol: &Protocol) -> Vec<String> {
        match self {
            Binding::Identity => protocol.roles.clone(),
            Binding::Explicit(map) => map.keys().cloned().collect(),
        }
    }

    /// The agent reported for a role: the first agent (by name) playing it,
    /// or the role name itself when nobody does.
    pub fn agent_for(&self, role: &str) -> String {
        match self {
            Binding::Identity => role.to_string(),
            Binding::Explicit(map) => map
                .iter()
                .find(|(_, roles)| roles.contains(role))
                .map_or_else(|| role.to_string(), |(agent, _)| agent.clone()),
        }
    }

    /// Checks that every bound role exists. Returns the first unknown role.
    pub fn check(&self, protocol: &Protocol) -> Result<(), String> {
        if let Binding::Explicit(map) = self {
            for role in map.values().flatten() {
                if !protocol.has_role(role) {
                    return Err(role.clone());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regulation::parse_regulation;

    fn payment() -> Protocol {
        Protocol::new("payment")
            .role("buyer")
            .role("seller")
            .action(ActionDef::new("pay-by-cash", "buyer").means("paid"))
            .action(ActionDef::new("send-goods", "seller").means("sent"))
            .constraint(ConstraintDecl::new("paid-before-sent", parse_regulation("paid before sent").unwrap()))
    }

    #[test]
    fn payment_validates() {
        assert_eq!(payment().validate(), Ok(()));
    }

    #[test]
    fn undeclared_atom_in_constraint() {
        let p = payment().constraint(ConstraintDecl::new("bad", parse_regulation("achieve refunded").unwrap()));
        let issues = p.validate().unwrap_err();
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("refunded"));
    }

    #[test]
    fn reference_errors() {
        let p = payment()
            .action(ActionDef::new("sneak", "thief").means("stolen").creates("c9"))
            .commitment(CommitmentTemplate::new("c1", "buyer", "buyer", RegulationExpr::Top, RegulationExpr::Top))
            .constraint(ConstraintDecl::new("paid-before-sent", RegulationExpr::Top));
        let msgs: Vec<String> = p.validate().unwrap_err().into_iter().map(|i| i.message).collect();
        assert!(msgs.iter().any(|m| m.contains("undeclared role `thief`")));
        assert!(msgs.iter().any(|m| m.contains("undeclared commitment `c9`")));
        assert!(msgs.iter().any(|m| m.contains("same debtor and creditor")));
        assert!(msgs.iter().any(|m| m.contains("declared twice")));
    }

    #[test]
    fn status_atoms_need_declared_labels() {
        let p = payment().constraint(ConstraintDecl::new("x", parse_regulation("achieve created(c1)").unwrap()));
        assert!(p.validate().is_err());
    }

    #[test]
    fn binding_lookup() {
        let b = Binding::explicit([("alice", "buyer"), ("alice", "seller"), ("bob", "seller")]);
        assert!(b.plays("alice", "seller"));
        assert!(!b.plays("bob", "buyer"));
        assert_eq!(b.agent_for("seller"), "alice");
        assert_eq!(b.agent_for("auditor"), "auditor");
        assert_eq!(Binding::Identity.agent_for("buyer"), "buyer");
        assert_eq!(b.check(&payment()), Ok(()));
        assert_eq!(Binding::explicit([("x", "nobody")]).check(&payment()), Err("nobody".into()));
    }
}
