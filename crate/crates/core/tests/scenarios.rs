use std::time::{Duration, Instant};

use regula::model::{Binding, CommitmentState};
use regula::monitor::{Culprit, FinalReport, TraceSession, Verdict, ViolationSource};
use regula::regulation::Severity;
use regula::scenarios::{self, SCENARIOS};
use regula::syntax::protocol_file::parse_protocol;
use regula::syntax::trace_file::{parse_trace, trace_log};

fn monitor(scenario: &str, trace: &str) -> FinalReport {
    let s = scenarios::find(scenario).unwrap();
    let protocol = parse_protocol(s.protocol.text).unwrap();
    let log = trace_log(&parse_trace(scenarios::trace(trace).unwrap()).unwrap());
    TraceSession::replay(protocol, Binding::Identity, &log).unwrap().close()
}

fn violations(report: &FinalReport) -> Vec<(&str, usize, Severity, String)> {
    report.violations.iter().map(|v| (v.source.id(), v.index, v.severity, v.culprit.to_string())).collect()
}

#[test]
fn insurance_reimbursement() {
    let r = monitor("insurance-a", "insurance-a-approved.trace");
    assert_eq!(r.commitment("c-reimburse").unwrap().state, CommitmentState::Discharged);
    assert!(r.violations.is_empty());

    let r = monitor("insurance-a", "insurance-a-late-approval.trace");
    assert_eq!(r.commitment("c-reimburse").unwrap().status_label(), "expired");
    assert!(r.violations.is_empty());

    let r = monitor("insurance-a", "insurance-a-unpaid.trace");
    assert_eq!(violations(&r), [("c-reimburse", 3, Severity::Medium, "ins".to_string())]);
}

#[test]
fn contract_net() {
    let r = monitor("contract-net", "contract-net-award.trace");
    assert!(r.violations.is_empty());
    assert!(r.commitments.iter().all(|c| c.state == CommitmentState::Discharged));

    let r = monitor("contract-net", "contract-net-reject.trace");
    assert!(r.violations.is_empty());
    assert_eq!(r.commitment("c-perform").unwrap().state, CommitmentState::Released);
    assert_eq!(r.constraint("pay-after-work").unwrap().verdict, Some(Verdict::TempSat));

    let r = monitor("contract-net", "contract-net-unsolicited.trace");
    assert_eq!(
        violations(&r),
        [
            ("cfp-first", 0, Severity::Medium, "participant".to_string()),
            ("c-perform", 3, Severity::Medium, "participant".to_string()),
        ]
    );
    assert!(r.violations[0].heuristic && !r.violations[1].heuristic);
}

#[test]
fn stylized_advice() {
    let r = monitor("mifid-stylized", "mifid-compliant.trace");
    assert!(r.violations.is_empty());
    assert_eq!(r.constraint("cooling-off").unwrap().verdict, None);

    let r = monitor("mifid-stylized", "mifid-unsuitable.trace");
    assert_eq!(violations(&r), [("suitability-before-advice", 2, Severity::High, "firm".to_string())]);

    let r = monitor("mifid-stylized", "mifid-amended.trace");
    assert_eq!(violations(&r)[0], ("cooling-off", 2, Severity::Low, "client".to_string()));
    let late = &r.violations[1];
    assert_eq!(late.source, ViolationSource::Constraint("report-executions".into()));
    assert_eq!(late.culprit, Culprit::EndOfTrace);
}

#[test]
fn every_fixture_monitors_quickly() {
    for s in SCENARIOS {
        for t in s.traces {
            let start = Instant::now();
            monitor(s.name, t.file);
            assert!(start.elapsed() < Duration::from_secs(1), "{} took {:?}", t.file, start.elapsed());
        }
    }
}
