// Ask whether the insurer can always settle with the patient, with and
// without the surgeon's billing commitment.

use regula::control::{safety_derivation, SupportContext};
use regula::model::Binding;
use regula::scenarios;
use regula::syntax::protocol_file::parse_protocol;

fn main() {
    let protocol = parse_protocol(scenarios::find("insurance-c").unwrap().protocol.text).unwrap();
    let settle = protocol.find_commitment("c-settle").unwrap().instantiate(0);
    let ctx = SupportContext::hypothetical(&protocol, Binding::Identity).unwrap();
    println!("with c-bill:\n{}", safety_derivation(&settle, &ctx).unwrap());
    println!("without c-bill:\n{}", safety_derivation(&settle, &ctx.without("c-bill")).unwrap());
}
