// Follow the insurer's payment commitment through the three insurance traces.

use regula::monitor::{LogEntry, TraceSession};
use regula::scenarios;
use regula::syntax::protocol_file::parse_protocol;
use regula::syntax::trace_file::{parse_trace, trace_log};

fn main() {
    let scenario = scenarios::find("insurance-c").unwrap();
    let protocol = parse_protocol(scenario.protocol.text).unwrap();
    for file in ["insurance-c-happy.trace", "insurance-c-wrong-order.trace", "insurance-c-unpaid.trace"] {
        let log = trace_log(&parse_trace(scenarios::trace(file).unwrap()).unwrap());
        let mut session = TraceSession::start(protocol.clone()).unwrap();
        println!("{file}");
        for entry in &log {
            if let LogEntry::Event(e) = entry {
                let report = session.step(e).unwrap();
                for t in report.transitions.iter().filter(|t| t.label == "c-pay") {
                    println!("  [{}] {}: {} -> {}", t.index, e.action, t.from, t.to);
                }
            }
        }
        let report = session.close();
        let c = report.commitment("c-pay").unwrap();
        println!("  final: {}, violations: {}", c.status_label(), report.violations.len());
    }
}
