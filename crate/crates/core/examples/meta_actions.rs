// Activate and retire constraints mid-trace. Constraints only judge the
// events that follow their activation.

use regula::model::{ActionDef, Event, Protocol};
use regula::monitor::TraceSession;
use regula::regulation::{parse_regulation, ConstraintDecl};

fn main() {
    let protocol = Protocol::new("meta")
        .role("clerk")
        .action(ActionDef::new("file", "clerk").means("filed"))
        .action(ActionDef::new("review", "clerk").means("reviewed"))
        .constraint(ConstraintDecl::new("review-first", parse_regulation("reviewed before filed").unwrap()).inactive())
        .constraint(ConstraintDecl::new("answer", parse_regulation("filed response reviewed").unwrap()));
    let clerk = |a: &str| Event::new("clerk", a);

    let mut late = TraceSession::start(protocol.clone()).unwrap();
    late.step(&clerk("file")).unwrap();
    late.set_constraint_active("review-first", true).unwrap();
    late.step(&clerk("review")).unwrap();
    println!("activated after filing: {} violation(s)", late.close().violations.len());

    let mut retired = TraceSession::start(protocol).unwrap();
    retired.step(&clerk("file")).unwrap();
    println!("answer pending: {}", retired.constraint_verdict("answer").unwrap());
    retired.set_constraint_active("answer", false).unwrap();
    println!("retired while pending: {} violation(s)", retired.close().violations.len());
}
