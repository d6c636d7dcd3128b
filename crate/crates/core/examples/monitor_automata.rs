// Compile regulations into four-valued monitors and step them letter by letter.

use regula::atom::Atom;
use regula::monitor::compile_monitor;
use regula::regulation::parse_regulation;

fn main() {
    let a = Atom::fact("a");
    let b = Atom::fact("b");
    for src in ["achieve a", "a before b", "a response b", "a coexist b", "a before b or achieve c"] {
        let m = compile_monitor(&parse_regulation(src).unwrap());
        print!("{src:<26} {} states:", m.len());
        let mut state = 0;
        print!(" {}", m.verdict(state));
        for letter in [vec![&a], vec![], vec![&b]] {
            state = m.next(state, m.letter(letter));
            print!(" -> {}", m.verdict(state));
        }
        println!();
    }
}
