use thiserror::Error;

use super::RegulationExpr;
use crate::atom::{is_fact_name, Atom, CommitmentStatus, RESERVED};
use crate::syntax::lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown operator `{word}` at offset {offset}")]
    UnknownOperator { offset: usize, word: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownOperator { offset, .. } => *offset,
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax { offset, message: message.into() }
    }
}

/// Parses a regulation:
///
/// ```text
/// reg  := disj
/// disj := conj ("or" conj)*
/// conj := term ("and" term)*
/// term := "top" | "achieve" atom | atom "before" atom
///       | atom "response" atom | atom "coexist" atom | "(" reg ")"
/// atom := ident | status "(" ident ")"
/// ```
pub fn parse_regulation(text: &str) -> Result<RegulationExpr, ParseError> {
    let tokens = tokenize(text).map_err(|e| ParseError::syntax(e.offset, format!("unexpected character `{}`", e.found)))?;
    let mut parser = RegParser::new(&tokens, text.len());
    let expr = parser.parse_reg()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::syntax(tok.offset, format!("unexpected {} after regulation", tok.kind)));
    }
    Ok(expr)
}

/// Recursive-descent parser over a token slice. Stops at the first token that
/// cannot continue the regulation, so it can be embedded in larger grammars.
pub(crate) struct RegParser<'t> {
    tokens: &'t [Token],
    pos: usize,
    end_offset: usize,
}

impl<'t> RegParser<'t> {
    pub(crate) fn new(tokens: &'t [Token], end_offset: usize) -> Self {
        RegParser { tokens, pos: 0, end_offset }
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_word(&self) -> Option<&'t str> {
        self.peek().and_then(Token::word)
    }

    fn next_offset(&self) -> usize {
        self.peek().map_or(self.end_offset, |t| t.offset)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let tok = self.tokens.get(self.pos);
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(tok) if tok.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(ParseError::syntax(tok.offset, format!("expected {kind}, found {}", tok.kind))),
            None => Err(ParseError::syntax(self.end_offset, format!("expected {kind}, found end of input"))),
        }
    }

    pub(crate) fn parse_reg(&mut self) -> Result<RegulationExpr, ParseError> {
        let mut lhs = self.parse_conj()?;
        while self.peek_word() == Some("or") {
            self.pos += 1;
            let rhs = self.parse_conj()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn parse_conj(&mut self) -> Result<RegulationExpr, ParseError> {
        let mut lhs = self.parse_term()?;
        while self.peek_word() == Some("and") {
            self.pos += 1;
            let rhs = self.parse_term()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<RegulationExpr, ParseError> {
        let offset = self.next_offset();
        match self.peek().map(|t| &t.kind) {
            None => Err(ParseError::syntax(offset, "expected a regulation, found end of input")),
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.parse_reg()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::Word(w)) if w == "top" => {
                self.pos += 1;
                Ok(RegulationExpr::Top)
            }
            Some(TokenKind::Word(w)) if w == "achieve" => {
                self.pos += 1;
                Ok(RegulationExpr::Achieve(self.parse_atom()?))
            }
            Some(TokenKind::Word(_)) => {
                let lhs = self.parse_atom()?;
                let op_offset = self.next_offset();
                let op = match self.bump() {
                    Some(Token { kind: TokenKind::Word(w), .. }) => w.as_str(),
                    Some(tok) => {
                        return Err(ParseError::syntax(tok.offset, format!("expected an operator after `{lhs}`, found {}", tok.kind)))
                    }
                    None => return Err(ParseError::syntax(op_offset, format!("expected an operator after `{lhs}`"))),
                };
                let ctor: fn(Atom, Atom) -> RegulationExpr = match op {
                    "before" => RegulationExpr::Before,
                    "response" => RegulationExpr::Response,
                    "coexist" => RegulationExpr::Coexist,
                    other => return Err(ParseError::UnknownOperator { offset: op_offset, word: other.to_string() }),
                };
                let rhs = self.parse_atom()?;
                Ok(ctor(lhs, rhs))
            }
            Some(kind) => Err(ParseError::syntax(offset, format!("expected a regulation, found {kind}"))),
        }
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let offset = self.next_offset();
        let word = match self.bump() {
            Some(Token { kind: TokenKind::Word(w), .. }) => w.as_str(),
            Some(tok) => return Err(ParseError::syntax(tok.offset, format!("expected an atom, found {}", tok.kind))),
            None => return Err(ParseError::syntax(offset, "expected an atom, found end of input")),
        };
        if let Some(status) = CommitmentStatus::from_keyword(word) {
            self.expect(TokenKind::LParen)?;
            let label_offset = self.next_offset();
            let label = match self.bump() {
                Some(Token { kind: TokenKind::Word(w), .. }) if crate::atom::is_identifier(w) => w.clone(),
                _ => return Err(ParseError::syntax(label_offset, "expected a commitment label")),
            };
            self.expect(TokenKind::RParen)?;
            return Ok(Atom::Status(status, label));
        }
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) && !RESERVED.contains(&word) {
            return Err(ParseError::UnknownOperator { offset, word: word.to_string() });
        }
        if !is_fact_name(word) {
            return Err(ParseError::syntax(offset, format!("`{word}` is not a valid atom name")));
        }
        Ok(Atom::Fact(word.to_string()))
    }
}
