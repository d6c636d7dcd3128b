//! The line-oriented protocol format.
//!
//! ```text
//! protocol <ident>
//! roles <role>, <role>, ...
//! atoms <fact>, <fact>, ...
//! action <ident> by <role> means <fact>(, <fact>)* (creates|releases|cancels <label>)*
//! commitment <label> : C(<role>, <role>, <reg>, <reg>)
//! constraint <ident> [severity low|medium|high] [inactive] : <reg>
//! ```
//!
//! One declaration per line, `#` starts a comment.

use std::fmt::Write as _;

use super::lexer::{tokenize, Token, TokenKind};
use super::{strip_comment, Diagnostic};
use crate::atom::{is_fact_name, is_identifier, CommitmentStatus};
use crate::model::{ActionDef, CommitmentOp, CommitmentTemplate, Protocol};
use crate::regulation::{ConstraintDecl, ParseError, RegParser, RegulationExpr, Severity};

/// Parses and validates a protocol. All problems found are reported, sorted by position.
pub fn parse_protocol(text: &str) -> Result<Protocol, Vec<Diagnostic>> {
    let mut protocol = Protocol::default();
    let mut header: Option<usize> = None;
    let mut diagnostics = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let tokens = match tokenize(line) {
            Ok(tokens) => tokens,
            Err(e) => {
                diagnostics.push(Diagnostic::new(line_no, e.offset + 1, format!("unexpected character `{}`", e.found)));
                continue;
            }
        };
        let mut p = LineParser { tokens: &tokens, pos: 0, line: line_no, len: line.len() };
        let keyword = tokens[0].word().unwrap_or("");
        if keyword != "protocol" && header.is_none() {
            diagnostics.push(p.error_at(0, "expected `protocol <name>` before any declaration"));
            header = Some(line_no);
        }
        if let Err(d) = declaration(&mut p, keyword, &mut protocol, &mut header) {
            diagnostics.push(d);
        }
    }
    if header.is_none() {
        diagnostics.push(Diagnostic::new(1, 1, "missing `protocol <name>` header"));
    }
    if diagnostics.is_empty() {
        if let Err(issues) = protocol.validate() {
            let fallback = header.unwrap_or(1);
            diagnostics.extend(issues.into_iter().map(|issue| Diagnostic::new(issue.line.unwrap_or(fallback), 1, issue.message)));
        }
    }
    if diagnostics.is_empty() {
        Ok(protocol)
    } else {
        diagnostics.sort_by_key(|d| (d.line, d.column));
        Err(diagnostics)
    }
}

fn declaration(
    p: &mut LineParser<'_>,
    keyword: &str,
    protocol: &mut Protocol,
    header: &mut Option<usize>,
) -> Result<(), Diagnostic> {
    match keyword {
        "protocol" => {
            p.pos += 1;
            if header.is_some() && !protocol.name.is_empty() {
                return Err(p.error_at(0, "duplicate `protocol` header"));
            }
            protocol.name = p.ident("protocol name")?;
            *header = Some(p.line);
        }
        "roles" => {
            p.pos += 1;
            protocol.roles.extend(p.ident_list("role")?);
        }
        "atoms" => {
            p.pos += 1;
            for (fact, at) in p.ident_list_with_pos("fact")? {
                if !is_fact_name(&fact) {
                    return Err(p.error_at(at, format!("`{fact}` is reserved and cannot name a fact")));
                }
                protocol.facts.insert(fact);
            }
        }
        "action" => {
            p.pos += 1;
            let action = action(p)?;
            protocol.facts.extend(action.effects.iter().cloned());
            protocol.actions.push(action);
        }
        "commitment" => {
            p.pos += 1;
            protocol.commitments.push(commitment(p)?);
        }
        "constraint" => {
            p.pos += 1;
            protocol.constraints.push(constraint(p)?);
        }
        _ => {
            return Err(p.error_at(
                0,
                format!("expected a declaration (protocol, roles, atoms, action, commitment, constraint), found {}", p.tokens[0].kind),
            ))
        }
    }
    p.end()
}

fn action(p: &mut LineParser<'_>) -> Result<ActionDef, Diagnostic> {
    let name = p.ident("action name")?;
    p.keyword("by")?;
    let actor = p.ident("role")?;
    let mut def = ActionDef::new(name, actor);
    def.line = Some(p.line);
    p.keyword("means")?;
    loop {
        let at = p.pos;
        let fact = p.ident("fact")?;
        if CommitmentStatus::from_keyword(&fact).is_some() && p.peek_kind() == Some(&TokenKind::LParen) {
            return Err(p.error_at(at, "actions assert facts only; commitment status atoms cannot be effects"));
        }
        if !is_fact_name(&fact) {
            return Err(p.error_at(at, format!("`{fact}` is reserved and cannot name a fact")));
        }
        def.effects.push(fact);
        if p.peek_kind() != Some(&TokenKind::Comma) {
            break;
        }
        p.pos += 1;
    }
    while let Some(word) = p.peek_word() {
        let op = match word {
            "creates" => CommitmentOp::Create,
            "releases" => CommitmentOp::Release,
            "cancels" => CommitmentOp::Cancel,
            _ => break,
        };
        p.pos += 1;
        def.ops.push(op(p.ident("commitment label")?));
    }
    Ok(def)
}

fn commitment(p: &mut LineParser<'_>) -> Result<CommitmentTemplate, Diagnostic> {
    let label = p.ident("commitment label")?;
    p.expect(TokenKind::Colon)?;
    p.keyword("C")?;
    p.expect(TokenKind::LParen)?;
    let debtor = p.ident("debtor role")?;
    p.expect(TokenKind::Comma)?;
    let creditor = p.ident("creditor role")?;
    p.expect(TokenKind::Comma)?;
    let antecedent = p.regulation()?;
    p.expect(TokenKind::Comma)?;
    let consequent = p.regulation()?;
    p.expect(TokenKind::RParen)?;
    let mut template = CommitmentTemplate::new(label, debtor, creditor, antecedent, consequent);
    template.line = Some(p.line);
    Ok(template)
}

fn constraint(p: &mut LineParser<'_>) -> Result<ConstraintDecl, Diagnostic> {
    let id = p.ident("constraint id")?;
    let mut severity = Severity::default();
    let mut active = true;
    if p.peek_word() == Some("severity") {
        p.pos += 1;
        let at = p.pos;
        let word = p.ident("severity")?;
        severity = Severity::from_keyword(&word)
            .ok_or_else(|| p.error_at(at, format!("unknown severity `{word}`, expected low, medium or high")))?;
    }
    if p.peek_word() == Some("inactive") {
        p.pos += 1;
        active = false;
    }
    p.expect(TokenKind::Colon)?;
    let expr = p.regulation()?;
    let mut decl = ConstraintDecl::new(id, expr).with_severity(severity);
    decl.active = active;
    decl.line = Some(p.line);
    Ok(decl)
}

struct LineParser<'t> {
    tokens: &'t [Token],
    pos: usize,
    line: usize,
    len: usize,
}

impl<'t> LineParser<'t> {
    fn column(&self, pos: usize) -> usize {
        self.tokens.get(pos).map_or(self.len, |t| t.offset) + 1
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.line, self.column(pos), message)
    }

    fn found(&self) -> String {
        self.tokens.get(self.pos).map_or_else(|| "end of line".to_string(), |t| t.kind.to_string())
    }

    fn peek_kind(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_word(&self) -> Option<&'t str> {
        self.tokens.get(self.pos).and_then(Token::word)
    }

    fn ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek_word() {
            Some(w) if is_identifier(w) => {
                self.pos += 1;
                Ok(w.to_string())
            }
            Some(w) => Err(self.error_at(self.pos, format!("`{w}` is not a valid {what}"))),
            None => Err(self.error_at(self.pos, format!("expected {what}, found {}", self.found()))),
        }
    }

    fn ident_list_with_pos(&mut self, what: &str) -> Result<Vec<(String, usize)>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            let at = self.pos;
            out.push((self.ident(what)?, at));
            if self.peek_kind() != Some(&TokenKind::Comma) {
                return Ok(out);
            }
            self.pos += 1;
        }
    }

    fn ident_list(&mut self, what: &str) -> Result<Vec<String>, Diagnostic> {
        Ok(self.ident_list_with_pos(what)?.into_iter().map(|(w, _)| w).collect())
    }

    fn keyword(&mut self, word: &str) -> Result<(), Diagnostic> {
        if self.peek_word() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_at(self.pos, format!("expected `{word}`, found {}", self.found())))
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), Diagnostic> {
        if self.peek_kind() == Some(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_at(self.pos, format!("expected {kind}, found {}", self.found())))
        }
    }

    fn regulation(&mut self) -> Result<RegulationExpr, Diagnostic> {
        let mut parser = RegParser::new(&self.tokens[self.pos..], self.len);
        match parser.parse_reg() {
            Ok(expr) => {
                self.pos += parser.position();
                Ok(expr)
            }
            Err(e) => {
                let message = match &e {
                    ParseError::Syntax { message, .. } => message.clone(),
                    ParseError::UnknownOperator { word, .. } => format!("unknown operator `{word}`"),
                };
                Err(Diagnostic::new(self.line, e.offset() + 1, message))
            }
        }
    }

    fn end(&self) -> Result<(), Diagnostic> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(self.error_at(self.pos, format!("unexpected {} at end of declaration", t.kind))),
        }
    }
}

/// Renders a protocol back to source text that parses to an equal protocol,
/// line numbers aside.
pub fn render_protocol(protocol: &Protocol) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol {}", protocol.name);
    if !protocol.roles.is_empty() {
        let _ = writeln!(out, "roles {}", protocol.roles.join(", "));
    }
    if !protocol.facts.is_empty() {
        let facts: Vec<&str> = protocol.facts.iter().map(String::as_str).collect();
        let _ = writeln!(out, "atoms {}", facts.join(", "));
    }
    for a in &protocol.actions {
        let _ = write!(out, "action {} by {} means {}", a.name, a.actor, a.effects.join(", "));
        for op in &a.ops {
            let _ = write!(out, " {op}");
        }
        out.push('\n');
    }
    for c in &protocol.commitments {
        let _ = writeln!(out, "commitment {} : C({}, {}, {}, {})", c.label, c.debtor, c.creditor, c.antecedent, c.consequent);
    }
    for d in &protocol.constraints {
        let _ = write!(out, "constraint {}", d.id);
        if d.severity != Severity::default() {
            let _ = write!(out, " severity {}", d.severity);
        }
        if !d.active {
            out.push_str(" inactive");
        }
        let _ = writeln!(out, " : {}", d.expr);
    }
    out
}
