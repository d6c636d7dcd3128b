//! The trace format: one `<agent> <action>` event per line, plus
//! `!activate <id>` and `!retire <id>` meta lines. Events are indexed in file
//! order from 0; meta lines take no index.

use std::fmt::Write as _;

use super::{strip_comment, Diagnostic};
use crate::atom::is_identifier;
use crate::model::Event;
use crate::monitor::LogEntry;

/// A trace entry with its source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub line: usize,
    pub entry: LogEntry,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEntry>, Vec<Diagnostic>> {
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        let words: Vec<(usize, &str)> = body
            .split_whitespace()
            .map(|w| (w.as_ptr() as usize - body.as_ptr() as usize + 1, w))
            .collect();
        match parse_line(&words) {
            Ok(None) => {}
            Ok(Some(entry)) => entries.push(TraceEntry { line, entry }),
            Err((column, message)) => diagnostics.push(Diagnostic::new(line, column, message)),
        }
    }
    if diagnostics.is_empty() {
        Ok(entries)
    } else {
        Err(diagnostics)
    }
}

fn parse_line(words: &[(usize, &str)]) -> Result<Option<LogEntry>, (usize, String)> {
    let check = |(col, w): (usize, &str), what: &str| {
        if is_identifier(w) {
            Ok(w.to_string())
        } else {
            Err((col, format!("`{w}` is not a valid {what}")))
        }
    };
    match words {
        [] => Ok(None),
        [(col, meta), rest @ ..] if meta.starts_with('!') => {
            let id = match rest {
                [id] => check(*id, "constraint id")?,
                [] => return Err((*col, format!("`{meta}` needs a constraint id"))),
                [_, (c, w), ..] => return Err((*c, format!("unexpected `{w}` after constraint id"))),
            };
            match *meta {
                "!activate" => Ok(Some(LogEntry::Activate(id))),
                "!retire" => Ok(Some(LogEntry::Retire(id))),
                _ => Err((*col, format!("unknown meta action `{meta}`, expected !activate or !retire"))),
            }
        }
        [agent, action] => Ok(Some(LogEntry::Event(Event::new(check(*agent, "agent")?, check(*action, "action")?)))),
        [(col, _)] => Err((*col, "expected `<agent> <action>`".to_string())),
        [_, _, (col, w), ..] => Err((*col, format!("unexpected `{w}` after action"))),
    }
}

/// Strips line numbers.
pub fn trace_log(entries: &[TraceEntry]) -> Vec<LogEntry> {
    entries.iter().map(|e| e.entry.clone()).collect()
}

/// Renders events and meta actions in trace syntax. Added constraints have no
/// trace syntax and are written as comments.
pub fn render_trace(log: &[LogEntry]) -> String {
    let mut out = String::new();
    for entry in log {
        let _ = match entry {
            LogEntry::Event(e) => writeln!(out, "{} {}", e.agent, e.action),
            LogEntry::Activate(id) => writeln!(out, "!activate {id}"),
            LogEntry::Retire(id) => writeln!(out, "!retire {id}"),
            LogEntry::Add(decl) => writeln!(out, "# added constraint {} : {}", decl.id, decl.expr),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_events_and_meta_lines() {
        let text = "# payment\nbuyer pay-by-cash\n\n  !retire paid-before-sent  # stop\nseller send-goods\n!activate x\n";
        let entries = parse_trace(text).unwrap();
        assert_eq!(entries.iter().map(|e| e.line).collect::<Vec<_>>(), [2, 4, 5, 6]);
        assert_eq!(entries[0].entry, LogEntry::Event(Event::new("buyer", "pay-by-cash")));
        assert_eq!(entries[1].entry, LogEntry::Retire("paid-before-sent".into()));
        assert_eq!(entries[3].entry, LogEntry::Activate("x".into()));
        assert_eq!(render_trace(&trace_log(&entries)), "buyer pay-by-cash\n!retire paid-before-sent\nseller send-goods\n!activate x\n");
    }

    #[test]
    fn errors_carry_columns() {
        let diags = parse_trace("buyer\n  a b c\n!pause x\n!retire\nBob go\n").unwrap_err();
        let pos: Vec<(usize, usize)> = diags.iter().map(|d| (d.line, d.column)).collect();
        assert_eq!(pos, [(1, 1), (2, 7), (3, 1), (4, 1), (5, 1)]);
    }
}
