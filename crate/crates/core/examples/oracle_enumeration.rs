// Enumerate every short trace of a protocol with its reference verdicts and
// compare them against the runtime monitor.

use regula::compliance::enumerate_oracle;
use regula::model::{ActionDef, Protocol};
use regula::monitor::TraceSession;
use regula::regulation::{parse_regulation, ConstraintDecl};

fn main() {
    let protocol = Protocol::new("oracle")
        .role("r")
        .action(ActionDef::new("do-a", "r").means("a"))
        .action(ActionDef::new("do-b", "r").means("b"))
        .constraint(ConstraintDecl::new("order", parse_regulation("a before b").unwrap()))
        .constraint(ConstraintDecl::new("reply", parse_regulation("a response b").unwrap()));
    let (mut traces, mut agree) = (0, 0);
    for t in enumerate_oracle(&protocol, 4).unwrap() {
        let mut session = TraceSession::start(protocol.clone()).unwrap();
        for e in &t.events {
            session.step(e).unwrap();
        }
        traces += 1;
        if t.results.iter().all(|(id, ok)| session.constraint_verdict(id).unwrap().is_satisfied() == *ok) {
            agree += 1;
        }
    }
    println!("{agree}/{traces} traces agree with the oracle");
    if let Err(e) = enumerate_oracle(&protocol, 40) {
        println!("length 40: {e}");
    }
}
