//! Scenario -> PDDL domain/problem.
//!
//! `+ask` adds the `ask` action and gates every take on
//! `(or (knows-target) (not (ambiguous)))`. The subset has no disjunction,
//! so each take schema is split into an unambiguous variant and a `-known`
//! variant with disjoint preconditions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::{ground, print_domain, print_problem};
use crate::scenario::{check_family_predicates, validate_structure, AskVariant, Scenario, ScenarioError, Unrealizable};
use crate::task::GroundedTask;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EmitError {
    #[error(transparent)]
    Invalid(#[from] ScenarioError),
    #[error(transparent)]
    Unrealizable(#[from] Unrealizable),
}

fn tn(name: &str, ty: &str) -> TypedName {
    TypedName {
        name: name.into(),
        ty: ty.into(),
    }
}

fn at(pred: &str, args: &[&str]) -> Atom {
    Atom {
        predicate: pred.into(),
        args: args.iter().map(|&s| s.into()).collect(),
    }
}

fn p(pred: &str, args: &[&str]) -> Literal {
    Literal::pos(at(pred, args))
}

fn n(pred: &str, args: &[&str]) -> Literal {
    Literal::neg(at(pred, args))
}

pub fn domain_name(variant: AskVariant) -> &'static str {
    match variant {
        AskVariant::WithAsk => "director-matcher-ask",
        AskVariant::WithoutAsk => "director-matcher-noask",
    }
}

/// The planning domain for a variant. Scenario-independent.
pub fn domain_ast(variant: AskVariant) -> Domain {
    let with_ask = variant == AskVariant::WithAsk;
    let mut predicates = vec![
        PredicateDecl {
            name: "at-matcher".into(),
            params: vec![tn("?l", "location")],
        },
        PredicateDecl {
            name: "adjacent".into(),
            params: vec![tn("?a", "location"), tn("?b", "location")],
        },
        PredicateDecl {
            name: "on".into(),
            params: vec![tn("?i", "item"), tn("?l", "location")],
        },
        PredicateDecl {
            name: "in".into(),
            params: vec![tn("?i", "item"), tn("?c", "container")],
        },
        PredicateDecl {
            name: "container-at".into(),
            params: vec![tn("?c", "container"), tn("?l", "location")],
        },
        PredicateDecl {
            name: "open".into(),
            params: vec![tn("?c", "container")],
        },
        PredicateDecl {
            name: "holding".into(),
            params: vec![tn("?i", "item")],
        },
        PredicateDecl {
            name: "hand-empty".into(),
            params: vec![],
        },
    ];
    if with_ask {
        for name in ["knows-target", "ambiguous"] {
            predicates.push(PredicateDecl {
                name: name.into(),
                params: vec![],
            });
        }
    }

    let take_eff = |from_container: bool| {
        let mut e = vec![p("holding", &["?i"]), n("hand-empty", &[])];
        if from_container {
            e.push(n("in", &["?i", "?c"]));
        } else {
            e.push(n("on", &["?i", "?l"]));
        }
        e
    };
    let take_pre = |from_container: bool| {
        let mut pre = vec![p("at-matcher", &["?l"])];
        if from_container {
            pre.push(p("container-at", &["?c", "?l"]));
            pre.push(p("open", &["?c"]));
            pre.push(p("in", &["?i", "?c"]));
        } else {
            pre.push(p("on", &["?i", "?l"]));
        }
        pre.push(p("hand-empty", &[]));
        pre
    };
    let take_params = |from_container: bool| {
        if from_container {
            vec![tn("?i", "item"), tn("?c", "container"), tn("?l", "location")]
        } else {
            vec![tn("?i", "item"), tn("?l", "location")]
        }
    };

    let mut actions = vec![
        ActionSchema {
            name: "move".into(),
            params: vec![tn("?from", "location"), tn("?to", "location")],
            precondition: vec![p("at-matcher", &["?from"]), p("adjacent", &["?from", "?to"])],
            effect: vec![p("at-matcher", &["?to"]), n("at-matcher", &["?from"])],
        },
        ActionSchema {
            name: "open".into(),
            params: vec![tn("?c", "container"), tn("?l", "location")],
            precondition: vec![
                p("at-matcher", &["?l"]),
                p("container-at", &["?c", "?l"]),
                n("open", &["?c"]),
            ],
            effect: vec![p("open", &["?c"])],
        },
    ];
    for from_container in [false, true] {
        let base = if from_container { "take-from" } else { "take" };
        let mut pre = take_pre(from_container);
        if with_ask {
            pre.push(n("ambiguous", &[]));
        }
        actions.push(ActionSchema {
            name: base.into(),
            params: take_params(from_container),
            precondition: pre,
            effect: take_eff(from_container),
        });
        if with_ask {
            let mut pre = take_pre(from_container);
            pre.push(p("ambiguous", &[]));
            pre.push(p("knows-target", &[]));
            actions.push(ActionSchema {
                name: format!("{base}-known"),
                params: take_params(from_container),
                precondition: pre,
                effect: take_eff(from_container),
            });
        }
    }
    if with_ask {
        actions.push(ActionSchema {
            name: "ask".into(),
            params: vec![],
            precondition: vec![],
            effect: vec![p("knows-target", &[])],
        });
    }
    Domain {
        name: domain_name(variant).into(),
        requirements: vec![
            ":strips".into(),
            ":typing".into(),
            ":negative-preconditions".into(),
        ],
        types: ["location", "item", "container"]
            .iter()
            .map(|t| TypeDecl {
                name: (*t).into(),
                parent: "object".into(),
            })
            .collect(),
        predicates,
        actions,
    }
}

pub fn location_object(i: usize) -> String {
    format!("loc{i}")
}

fn problem_name(sc: &Scenario, variant: AskVariant) -> String {
    let mut s: String = sc
        .id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert(0, 'p');
    }
    format!("{s}-{}", variant.slug())
}

/// The problem for a scenario, without validation.
pub fn problem_ast(sc: &Scenario, variant: AskVariant) -> Problem {
    let s = &sc.initial;
    let locs: Vec<String> = (0..s.locations.len()).map(location_object).collect();
    let mut objects: Vec<TypedName> = locs.iter().map(|l| tn(l, "location")).collect();
    objects.extend(sc.items.iter().map(|i| tn(i.id.as_str(), "item")));
    for l in &s.locations {
        objects.extend(l.containers.iter().map(|c| tn(c.id.as_str(), "container")));
    }

    let mut init = vec![at("at-matcher", &[&locs[s.matcher.facing]])];
    for i in 0..locs.len().saturating_sub(1) {
        init.push(at("adjacent", &[&locs[i], &locs[i + 1]]));
        init.push(at("adjacent", &[&locs[i + 1], &locs[i]]));
    }
    for l in &s.locations {
        for it in &l.surface_items {
            init.push(at("on", &[it.as_str(), &locs[l.index]]));
        }
    }
    for l in &s.locations {
        for c in &l.containers {
            init.push(at("container-at", &[c.id.as_str(), &locs[l.index]]));
            for it in &c.contents {
                init.push(at("in", &[it.as_str(), c.id.as_str()]));
            }
            if c.is_open {
                init.push(at("open", &[c.id.as_str()]));
            }
        }
    }
    init.push(at("hand-empty", &[]));
    if variant == AskVariant::WithAsk && s.ambiguous {
        init.push(at("ambiguous", &[]));
    }
    Problem {
        name: problem_name(sc, variant),
        domain: domain_name(variant).into(),
        objects,
        init,
        goal: vec![at("holding", &[sc.target.as_str()])],
    }
}

/// Grounds the scenario directly from the in-memory ASTs.
pub fn scenario_task(sc: &Scenario, variant: AskVariant) -> GroundedTask {
    ground(&domain_ast(variant), &problem_ast(sc, variant))
}

/// Validates the scenario (structure and family predicates) and renders
/// `(domain text, problem text)`.
pub fn emit_scenario(sc: &Scenario, variant: AskVariant) -> Result<(String, String), EmitError> {
    validate_structure(sc)?;
    check_family_predicates(sc)?;
    Ok((
        print_domain(&domain_ast(variant)),
        print_problem(&problem_ast(sc, variant)),
    ))
}
