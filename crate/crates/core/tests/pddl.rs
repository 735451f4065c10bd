mod common;

use dirtask_core::pddl::{emit_scenario, ground, parse_domain, parse_problem, print_domain, print_problem, scenario_task};
use dirtask_core::scenario::{reference_pack, AskVariant};
use proptest::prelude::*;

fn round_trip(domain: &str, problem: &str) -> (String, String, Vec<u8>) {
    let d = parse_domain(domain).unwrap_or_else(|e| panic!("{e}\n{domain}"));
    let p = parse_problem(problem, &d).unwrap_or_else(|e| panic!("{e}\n{problem}"));
    (print_domain(&d), print_problem(&p), ground(&d, &p).canonical_bytes())
}

#[test]
fn emitted_pack_parses_and_prints_identically() {
    let mut files = 0;
    for sc in reference_pack() {
        for v in AskVariant::ALL {
            let (dt, pt) = emit_scenario(&sc, v).unwrap();
            let (d2, p2, grounded) = round_trip(&dt, &pt);
            assert_eq!(d2, dt, "{} {v}", sc.id);
            assert_eq!(p2, pt, "{} {v}", sc.id);
            assert_eq!(grounded, scenario_task(&sc, v).canonical_bytes(), "{} {v}", sc.id);
            files += 2;
        }
    }
    assert_eq!(files, 28);
}

#[test]
fn grounding_census() {
    // (family, variant, facts, actions, init facts)
    let mut got = vec![];
    for sc in reference_pack() {
        for v in AskVariant::ALL {
            let t = scenario_task(&sc, v);
            got.push(format!("{} {} {} {} {}", sc.id, v, t.fact_count(), t.actions.len(), t.init.len()));
        }
    }
    let want = include_str!("golden/census.txt");
    assert_eq!(got.join("\n"), want.trim_end());
}

#[test]
fn grounding_is_deterministic() {
    for sc in reference_pack() {
        let a = scenario_task(&sc, AskVariant::WithAsk).canonical_bytes();
        let b = scenario_task(&sc, AskVariant::WithAsk).canonical_bytes();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_is_idempotent(sc in common::scenario(), ask in any::<bool>()) {
        let v = if ask { AskVariant::WithAsk } else { AskVariant::WithoutAsk };
        let (dt, pt) = emit_scenario(&sc, v).unwrap();
        let (d2, p2, _) = round_trip(&dt, &pt);
        let (d3, p3, _) = round_trip(&d2, &p2);
        prop_assert_eq!(&d2, &dt);
        prop_assert_eq!(&p2, &pt);
        prop_assert_eq!(d3, d2);
        prop_assert_eq!(p3, p2);
    }
}
