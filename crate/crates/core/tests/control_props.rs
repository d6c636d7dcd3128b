use std::collections::BTreeSet;

use proptest::prelude::*;
use regula::atom::Atom;
use regula::control::{control, control_derivation, safe, SupportContext};
use regula::model::{Binding, CommitmentInstance, CommitmentTemplate, Move, Protocol};
use regula::regulation::RegulationExpr;

const AGENTS: [&str; 3] = ["r0", "r1", "r2"];
const FACTS: [&str; 4] = ["a", "b", "c", "d"];

fn fact() -> impl Strategy<Value = Atom> {
    prop::sample::select(FACTS.to_vec()).prop_map(Atom::fact)
}

fn antecedent() -> impl Strategy<Value = RegulationExpr> {
    prop_oneof![
        Just(RegulationExpr::Top),
        fact().prop_map(RegulationExpr::achieve),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::before(a, b)),
    ]
}

fn query() -> impl Strategy<Value = RegulationExpr> {
    prop_oneof![
        fact().prop_map(RegulationExpr::achieve),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::before(a, b)),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::response(a, b)),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::coexist(a, b)),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::achieve(a).and(RegulationExpr::achieve(b))),
        (fact(), fact()).prop_map(|(a, b)| RegulationExpr::achieve(a).or(RegulationExpr::achieve(b))),
    ]
}

#[derive(Debug, Clone)]
struct Offer {
    debtor: usize,
    creditor: usize,
    antecedent: RegulationExpr,
    consequent: RegulationExpr,
    detached: bool,
}

fn offer() -> impl Strategy<Value = Offer> {
    (0usize..3, 1usize..3, antecedent(), query(), any::<bool>()).prop_map(|(debtor, shift, antecedent, consequent, detached)| {
        Offer { debtor, creditor: (debtor + shift) % 3, antecedent, consequent, detached }
    })
}

fn caps() -> impl Strategy<Value = Vec<BTreeSet<String>>> {
    prop::collection::vec(prop::collection::btree_set(prop::sample::select(FACTS.to_vec()).prop_map(String::from), 0..3), 3)
}

fn protocol(offers: &[Offer]) -> Protocol {
    let mut p = Protocol::new("p");
    for r in AGENTS {
        p = p.role(r);
    }
    for f in FACTS {
        p = p.fact(f);
    }
    for (i, o) in offers.iter().enumerate() {
        p = p.commitment(CommitmentTemplate::new(
            format!("k{i}"),
            AGENTS[o.debtor],
            AGENTS[o.creditor],
            o.antecedent.clone(),
            o.consequent.clone(),
        ));
    }
    p
}

fn instance(p: &Protocol, i: usize, o: &Offer) -> CommitmentInstance {
    let mut c = p.find_commitment(&format!("k{i}")).unwrap().instantiate(0);
    if o.detached {
        c.transition(Move::Detach, 0).unwrap();
    }
    c
}

fn context(p: &Protocol, offers: &[Offer], upto: usize, caps: &[BTreeSet<String>]) -> SupportContext {
    let commitments = offers.iter().enumerate().take(upto).map(|(i, o)| instance(p, i, o)).collect();
    let mut ctx = SupportContext::new(p, Binding::Identity, commitments, BTreeSet::new()).unwrap();
    for (agent, set) in AGENTS.iter().zip(caps) {
        ctx.set_capabilities(agent, set.clone());
    }
    ctx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn more_support_never_removes_control(
        offers in prop::collection::vec(offer(), 0..4),
        keep in 0usize..4,
        small in caps(),
        extra in caps(),
        q in query(),
    ) {
        let p = protocol(&offers);
        let keep = keep.min(offers.len());
        let big: Vec<BTreeSet<String>> = small.iter().zip(&extra).map(|(s, e)| s | e).collect();
        let before = context(&p, &offers, keep, &small);
        let after = context(&p, &offers, offers.len(), &big);
        for agent in AGENTS {
            if control(agent, &q, &before).unwrap() {
                prop_assert!(control(agent, &q, &after).unwrap(), "{agent} lost control of {q}");
            }
        }
    }

    #[test]
    fn derivations_agree_with_control(offers in prop::collection::vec(offer(), 0..4), c in caps(), q in query()) {
        let p = protocol(&offers);
        let ctx = context(&p, &offers, offers.len(), &c);
        for agent in AGENTS {
            let d = control_derivation(agent, &q, &ctx).unwrap();
            prop_assert_eq!(d.holds, control(agent, &q, &ctx).unwrap());
        }
    }

    #[test]
    fn a_commitment_never_supports_itself(offers in prop::collection::vec(offer(), 1..4), c in caps()) {
        let p = protocol(&offers);
        let with = context(&p, &offers, offers.len(), &c);
        let tested = instance(&p, 0, &offers[0]);
        let without = with.without("k0");
        prop_assert_eq!(safe(&tested, &with).unwrap(), safe(&tested, &without).unwrap());
    }

    #[test]
    fn own_capabilities_suffice(c in caps(), q in query()) {
        // with no commitments, control is exactly coverage of the needed atoms
        let p = protocol(&[]);
        let ctx = context(&p, &[], 0, &c);
        for (i, agent) in AGENTS.iter().enumerate() {
            let has = |a: &Atom| c[i].contains(a.fact_name().unwrap());
            let expected = match &q {
                RegulationExpr::Achieve(a) => has(a),
                RegulationExpr::Before(a, b) | RegulationExpr::Coexist(a, b) => has(a) && has(b),
                RegulationExpr::Response(_, b) => has(b),
                RegulationExpr::And(l, r) => q_atoms(l).iter().chain(q_atoms(r).iter()).all(has),
                RegulationExpr::Or(l, r) => q_atoms(l).iter().all(has) || q_atoms(r).iter().all(has),
                RegulationExpr::Top => true,
            };
            prop_assert_eq!(control(agent, &q, &ctx).unwrap(), expected, "{} {}", agent, q);
        }
    }
}

fn q_atoms(e: &RegulationExpr) -> Vec<Atom> {
    e.atoms().into_iter().cloned().collect()
}

#[test]
fn circular_conditional_support_is_rejected() {
    let offers = [
        Offer {
            debtor: 1,
            creditor: 0,
            antecedent: RegulationExpr::achieve(Atom::fact("b")),
            consequent: RegulationExpr::achieve(Atom::fact("a")),
            detached: false,
        },
        Offer {
            debtor: 2,
            creditor: 0,
            antecedent: RegulationExpr::achieve(Atom::fact("a")),
            consequent: RegulationExpr::achieve(Atom::fact("b")),
            detached: false,
        },
    ];
    let p = protocol(&offers);
    let none = vec![BTreeSet::new(); 3];
    let ctx = context(&p, &offers, 2, &none);
    assert!(!control("r0", &RegulationExpr::achieve(Atom::fact("a")), &ctx).unwrap());
    let mut seeded = none.clone();
    seeded[0].insert("b".to_string());
    let ctx = context(&p, &offers, 2, &seeded);
    assert!(control("r0", &RegulationExpr::achieve(Atom::fact("a")), &ctx).unwrap());
}
