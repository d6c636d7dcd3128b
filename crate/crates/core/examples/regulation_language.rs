// Parse regulations, print them in both notations and evaluate them on a trace.

use regula::atom::Atom;
use regula::regulation::{eval_on_trace, parse_regulation, pretty_print};
use std::collections::BTreeSet;

fn main() {
    let sources = [
        "paid before sent",
        "request response reply and achieve reply",
        "(achieve a and achieve b) or a coexist c",
        "violated(c-pay) response fined",
    ];
    let trace: Vec<BTreeSet<Atom>> = [vec!["paid"], vec!["paid", "sent"], vec!["request"]]
        .iter()
        .scan(BTreeSet::new(), |acc, step| {
            acc.extend(step.iter().map(|f| Atom::fact(*f)));
            Some(acc.clone())
        })
        .collect();
    for src in sources {
        let expr = parse_regulation(src).expect("valid regulation");
        println!("{}", pretty_print(&expr));
        println!("  ltlf:       {}", expr.to_ltlf());
        println!("  fulfilment: {}", pretty_print(&expr.fulfilment()));
        println!("  on trace:   {}", eval_on_trace(&expr, &trace));
    }
    match parse_regulation("paid before") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
}
