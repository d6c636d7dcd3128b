// Check which travel regulations the train protocol can comply with.

use regula::compliance::{compatible_check, product_bound};
use regula::monitor::TraceSession;
use regula::regulation::parse_regulation;
use regula::scenarios;
use regula::syntax::protocol_file::parse_protocol;

fn main() {
    let protocol = parse_protocol(scenarios::find("train").unwrap().protocol.text).unwrap();
    let session = TraceSession::start(protocol).unwrap();
    for src in ["travel before punch", "punch before travel", "achieve travel"] {
        let reg = parse_regulation(src).unwrap();
        let result = compatible_check(&reg, &session, None).unwrap();
        print!("{src}: {} (bound {} of {})", result.verdict, result.bound_used, product_bound(&reg, &session));
        if let Some(w) = result.witness {
            let names: Vec<&str> = w.iter().map(|e| e.action.as_str()).collect();
            print!(" via {}", names.join(", "));
        }
        println!();
    }
}
