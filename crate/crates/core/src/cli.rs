//! The `regula` command line.
//!
//! Exit codes: 0 clean, 1 semantic negative (violation, unsafe,
//! incompatible), 2 input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::compliance::{compatible_check, Compatibility};
use crate::control::{safety_derivation, Derivation, SupportContext};
use crate::model::{Binding, Protocol};
use crate::monitor::{FinalReport, LogEntry, StepReport, TraceSession, ViolationRecord};
use crate::regulation::parse_regulation;
use crate::scenarios::{self, SCENARIOS};
use crate::syntax::protocol_file::parse_protocol;
use crate::syntax::trace_file::{parse_trace, TraceEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "regula", version, about = "Regulations and commitments for multiagent protocols")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print nothing on stdout; rely on the exit code.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a protocol file.
    Validate { protocol: PathBuf },
    /// Run a trace through the protocol's monitors.
    Monitor {
        protocol: PathBuf,
        trace: PathBuf,
        /// Agent-to-role pairs, `agent=role`. Defaults to agents named after their roles.
        #[arg(long, value_delimiter = ',', value_parser = binding_pair)]
        binding: Vec<(String, String)>,
    },
    /// Decide whether a commitment is safe for its debtor.
    Safety {
        protocol: PathBuf,
        #[arg(long)]
        commitment: String,
        #[arg(long, value_delimiter = ',', value_parser = binding_pair)]
        binding: Vec<(String, String)>,
        /// Trace whose final state provides the live commitments.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Check a regulation against the norms in force.
    Compliance {
        protocol: PathBuf,
        /// Use the consequent of this declared commitment.
        #[arg(long, conflicts_with = "regulation", required_unless_present = "regulation")]
        commitment: Option<String>,
        #[arg(long)]
        regulation: Option<String>,
        /// Interaction so far.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Longest extension to search. Defaults to the product of the monitor sizes.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, value_delimiter = ',', value_parser = binding_pair)]
        binding: Vec<(String, String)>,
    },
    /// List, show or extract the bundled scenarios.
    Scenarios {
        #[command(subcommand)]
        action: Option<ScenarioAction>,
    },
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    List,
    Show { name: String },
    Extract {
        /// Scenario to extract; all of them when omitted.
        name: Option<String>,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn binding_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((agent, role)) if !agent.trim().is_empty() && !role.trim().is_empty() => {
            Ok((agent.trim().to_string(), role.trim().to_string()))
        }
        _ => Err(format!("expected agent=role, got `{s}`")),
    }
}

/// Runs the command line. Never exits the process.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut sink = std::io::sink();
    let out: &mut dyn Write = if cli.quiet { &mut sink } else { out };
    let mut ctx = Ctx { out, err, format: cli.format };
    let result = match cli.command {
        Command::Validate { protocol } => ctx.validate(&protocol),
        Command::Monitor { protocol, trace, binding } => ctx.monitor(&protocol, &trace, binding),
        Command::Safety { protocol, commitment, binding, state } => ctx.safety(&protocol, &commitment, binding, state.as_deref()),
        Command::Compliance { protocol, commitment, regulation, trace, bound, binding } => {
            ctx.compliance(&protocol, commitment.as_deref(), regulation.as_deref(), trace.as_deref(), bound, binding)
        }
        Command::Scenarios { action } => ctx.scenarios(action.unwrap_or(ScenarioAction::List)),
    };
    match result {
        Ok(code) => code,
        Err(Failure(lines)) => {
            for line in lines {
                let _ = writeln!(ctx.err, "error: {line}");
            }
            EXIT_INPUT
        }
    }
}

/// Input error, one message per line.
struct Failure(Vec<String>);

impl Failure {
    fn one(message: impl Into<String>) -> Self {
        Failure(vec![message.into()])
    }
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    format: Format,
}

macro_rules! emit {
    ($ctx:expr, $($arg:tt)*) => {{
        let _ = writeln!($ctx.out, $($arg)*);
    }};
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::one(format!("cannot read {}: {e}", path.display())))
}

fn load_protocol(path: &Path) -> Result<Protocol, Failure> {
    parse_protocol(&read(path)?).map_err(|diags| Failure(diags.iter().map(|d| format!("{}:{d}", path.display())).collect()))
}

fn load_trace(path: &Path) -> Result<Vec<TraceEntry>, Failure> {
    parse_trace(&read(path)?).map_err(|diags| Failure(diags.iter().map(|d| format!("{}:{d}", path.display())).collect()))
}

fn make_binding(protocol: &Protocol, pairs: Vec<(String, String)>) -> Result<Binding, Failure> {
    let binding = if pairs.is_empty() { Binding::Identity } else { Binding::explicit(pairs) };
    binding
        .check(protocol)
        .map_err(|role| Failure::one(format!("binding refers to undeclared role `{role}`")))?;
    Ok(binding)
}

/// Replays a trace file, calling `on_step` after each event.
fn replay(
    protocol: Protocol,
    binding: Binding,
    path: &Path,
    mut on_step: impl FnMut(&StepReport),
) -> Result<TraceSession, Failure> {
    let entries = load_trace(path)?;
    let mut session = TraceSession::with_binding(protocol, binding).map_err(|e| Failure::one(e.to_string()))?;
    for TraceEntry { line, entry } in &entries {
        let at = |e: &dyn std::fmt::Display| Failure::one(format!("{}:{line}: {e}", path.display()));
        match entry {
            LogEntry::Event(event) => on_step(&session.step(event).map_err(|e| at(&e))?),
            LogEntry::Activate(id) => session.set_constraint_active(id, true).map_err(|e| at(&e))?,
            LogEntry::Retire(id) => session.set_constraint_active(id, false).map_err(|e| at(&e))?,
            LogEntry::Add(decl) => session.add_constraint(decl.clone()).map_err(|e| at(&e))?,
        }
    }
    Ok(session)
}

fn plural(n: usize, word: &str) -> String {
    format!("{n} {word}{}", if n == 1 { "" } else { "s" })
}

impl Ctx<'_> {
    fn validate(&mut self, path: &Path) -> Outcome {
        let p = load_protocol(path)?;
        match self.format {
            Format::Text => {
                let mut summary = format!(
                    "{}: {}, {}, {}",
                    p.name,
                    plural(p.roles.len(), "role"),
                    plural(p.actions.len(), "action"),
                    plural(p.constraints.len(), "constraint")
                );
                if !p.commitments.is_empty() {
                    summary += &format!(", {}", plural(p.commitments.len(), "commitment"));
                }
                emit!(self, "{summary}");
            }
            Format::Tsv => emit!(
                self,
                "PROTOCOL\t{}\t{}\t{}\t{}\t{}",
                p.name,
                p.roles.len(),
                p.actions.len(),
                p.constraints.len(),
                p.commitments.len()
            ),
        }
        Ok(EXIT_OK)
    }

    fn monitor(&mut self, protocol: &Path, trace: &Path, binding: Vec<(String, String)>) -> Outcome {
        let p = load_protocol(protocol)?;
        let binding = make_binding(&p, binding)?;
        let format = self.format;
        let out = &mut *self.out;
        let session = replay(p, binding, trace, |step| match format {
            Format::Text => {
                let atoms: Vec<String> = step.new_atoms.iter().map(|a| format!("+{a}")).collect();
                let _ = writeln!(out, "[{}] {}: {}", step.index, step.event, atoms.join(" "));
                for (id, before, after) in &step.verdicts {
                    let _ = writeln!(out, "    {id}: {before} -> {after}");
                }
                for t in &step.transitions {
                    let _ = writeln!(out, "    {t}");
                }
                for v in &step.violations {
                    let _ = writeln!(out, "    VIOLATION {}", describe(v));
                }
            }
            Format::Tsv => {
                for v in &step.violations {
                    let _ = writeln!(out, "{}", violation_tsv(v));
                }
            }
        })?;
        let already = session.violations().len();
        let report = session.close();
        self.final_report(&report, already);
        Ok(if report.violations.is_empty() { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn final_report(&mut self, report: &FinalReport, streamed: usize) {
        match self.format {
            Format::Text => {
                emit!(self, "end of trace after {}", plural(report.events, "event"));
                for t in &report.close_transitions {
                    emit!(self, "    {t}");
                }
                for v in &report.violations[streamed..] {
                    emit!(self, "    VIOLATION {}", describe(v));
                }
                for c in &report.constraints {
                    let verdict = c.verdict.map_or("never active".to_string(), |v| v.to_string());
                    emit!(self, "constraint {}: {verdict} ({:?})", c.id, c.status);
                }
                for c in &report.commitments {
                    emit!(self, "commitment {}: {}", c.label, c.status_label());
                }
                emit!(self, "{}", plural(report.violations.len(), "violation"));
            }
            Format::Tsv => {
                for v in &report.violations[streamed..] {
                    emit!(self, "{}", violation_tsv(v));
                }
                for c in &report.constraints {
                    let verdict = c.verdict.map_or("inactive".to_string(), |v| v.to_string());
                    emit!(self, "VERDICT\t{}\t{verdict}", c.id);
                }
                for c in &report.commitments {
                    emit!(self, "COMMITMENT\t{}\t{}", c.label, c.status_label());
                }
            }
        }
    }

    fn safety(&mut self, protocol: &Path, label: &str, binding: Vec<(String, String)>, state: Option<&Path>) -> Outcome {
        let p = load_protocol(protocol)?;
        let binding = make_binding(&p, binding)?;
        let template = p
            .find_commitment(label)
            .ok_or_else(|| Failure::one(format!("unknown commitment `{label}`")))?
            .clone();
        let (ctx, commitment) = match state {
            None => {
                let ctx = SupportContext::hypothetical(&p, binding).map_err(|e| Failure::one(e.to_string()))?;
                (ctx, template.instantiate(0))
            }
            Some(path) => {
                let session = replay(p, binding, path, |_| {})?;
                let ctx = SupportContext::from_session(&session).map_err(|e| Failure::one(e.to_string()))?;
                let commitment = match session.state().commitment(label) {
                    Some(c) if !c.is_live() => {
                        return Err(Failure::one(format!("commitment `{label}` is already {}", c.status_label())))
                    }
                    Some(c) => c.clone(),
                    None => template.instantiate(session.event_count()),
                };
                (ctx, commitment)
            }
        };
        let derivation = safety_derivation(&commitment, &ctx).map_err(|e| Failure::one(e.to_string()))?;
        let verdict = if derivation.holds { "SAFE" } else { "UNSAFE" };
        match self.format {
            Format::Text => {
                emit!(self, "{verdict}: {label} = {template}");
                let _ = write!(self.out, "{derivation}");
            }
            Format::Tsv => {
                emit!(self, "SAFETY\t{label}\t{verdict}");
                self.derivation_tsv(&derivation, 0);
            }
        }
        Ok(if derivation.holds { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn derivation_tsv(&mut self, d: &Derivation, depth: usize) {
        emit!(self, "DERIVATION\t{depth}\t{}\t{}", if d.holds { "+" } else { "-" }, d.claim);
        for c in &d.children {
            self.derivation_tsv(c, depth + 1);
        }
    }

    fn compliance(
        &mut self,
        protocol: &Path,
        commitment: Option<&str>,
        regulation: Option<&str>,
        trace: Option<&Path>,
        bound: Option<usize>,
        binding: Vec<(String, String)>,
    ) -> Outcome {
        let p = load_protocol(protocol)?;
        let binding = make_binding(&p, binding)?;
        let expr = match (commitment, regulation) {
            (Some(label), _) => p
                .find_commitment(label)
                .ok_or_else(|| Failure::one(format!("unknown commitment `{label}`")))?
                .consequent
                .clone(),
            (None, Some(text)) => parse_regulation(text).map_err(|e| Failure::one(format!("regulation: {e}")))?,
            (None, None) => return Err(Failure::one("give --commitment or --regulation")),
        };
        let session = match trace {
            Some(path) => replay(p, binding, path, |_| {})?,
            None => TraceSession::with_binding(p, binding).map_err(|e| Failure::one(e.to_string()))?,
        };
        let result = compatible_check(&expr, &session, bound).map_err(|e| Failure::one(e.to_string()))?;
        match self.format {
            Format::Text => match &result.witness {
                Some(w) => {
                    emit!(self, "COMPATIBLE: `{expr}` (bound {})", result.bound_used);
                    emit!(self, "witness ({}):", plural(w.len(), "event"));
                    for e in w {
                        emit!(self, "  {e}");
                    }
                }
                None => {
                    let how = if result.exhausted { "every reachable state explored" } else { "search cut at the bound" };
                    emit!(self, "INCOMPATIBLE: `{expr}` (bound {}, {how})", result.bound_used);
                }
            },
            Format::Tsv => {
                emit!(self, "COMPLIANCE\t{}\t{}", result.verdict, result.bound_used);
                for (i, e) in result.witness.iter().flatten().enumerate() {
                    emit!(self, "WITNESS\t{i}\t{}\t{}", e.agent, e.action);
                }
            }
        }
        Ok(if result.verdict == Compatibility::Compatible { EXIT_OK } else { EXIT_NEGATIVE })
    }

    fn scenarios(&mut self, action: ScenarioAction) -> Outcome {
        let lookup = |name: &str| scenarios::find(name).ok_or_else(|| Failure::one(format!("unknown scenario `{name}`")));
        match action {
            ScenarioAction::List => {
                for s in SCENARIOS {
                    match self.format {
                        Format::Text => emit!(self, "{:<16}{}", s.name, s.summary),
                        Format::Tsv => emit!(self, "SCENARIO\t{}\t{}", s.name, s.summary),
                    }
                }
            }
            ScenarioAction::Show { name } => {
                let s = lookup(&name)?;
                for f in s.files() {
                    emit!(self, "# === {} ===", f.file);
                    let _ = self.out.write_all(f.text.as_bytes());
                }
            }
            ScenarioAction::Extract { name, dir } => {
                let chosen: Vec<_> = match name {
                    Some(n) => vec![lookup(&n)?],
                    None => SCENARIOS.iter().collect(),
                };
                for s in chosen {
                    let written = s.extract(&dir).map_err(|e| Failure::one(format!("cannot write to {}: {e}", dir.display())))?;
                    for path in written {
                        emit!(self, "{}", path.display());
                    }
                }
            }
        }
        Ok(EXIT_OK)
    }
}

fn describe(v: &ViolationRecord) -> String {
    format!(
        "{} at {}, severity {}, culprit {}{}",
        v.source.id(),
        v.index,
        v.severity,
        v.culprit,
        if v.heuristic { " (guessed)" } else { "" }
    )
}

fn violation_tsv(v: &ViolationRecord) -> String {
    format!("VIOLATION\t{}\t{}\t{}\t{}", v.source.id(), v.index, v.severity, v.culprit)
}
