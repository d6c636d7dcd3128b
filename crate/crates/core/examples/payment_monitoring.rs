// Monitor the payment protocol event by event, then add a card payment action
// and watch the unchanged constraint catch early shipping.

use regula::model::Event;
use regula::monitor::TraceSession;
use regula::scenarios;
use regula::syntax::protocol_file::parse_protocol;

fn main() {
    let protocol = parse_protocol(scenarios::find("payment").unwrap().protocol.text).unwrap();
    for run in [["pay-by-credit-card", "send-goods"], ["send-goods", "pay-by-cash"]] {
        let mut session = TraceSession::start(protocol.clone()).unwrap();
        for action in run {
            let actor = protocol.find_action(action).unwrap().actor.clone();
            let report = session.step(&Event::new(actor, action)).unwrap();
            for (id, from, to) in &report.verdicts {
                println!("[{}] {action}: {id} {from} -> {to}", report.index);
            }
            for v in &report.violations {
                println!("[{}] {action}: VIOLATION of {} charged to {}", v.index, v.source.id(), v.culprit);
            }
        }
        let report = session.close();
        println!("{} violation(s) in {run:?}\n", report.violations.len());
    }
}
