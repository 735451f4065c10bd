//! Exhaustive grounding over typed object tuples.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Atom, Domain, Problem, TypedName};
use crate::task::{FactSet, GroundAction, GroundedTask};

fn fact_name(predicate: &str, args: &[&str]) -> String {
    let mut s = String::from("(");
    s.push_str(predicate);
    for a in args {
        s.push(' ');
        s.push_str(a);
    }
    s.push(')');
    s
}

/// Cartesian product of per-parameter candidate lists, in lexicographic
/// order of the candidates' positions.
fn tuples<'a>(choices: &[Vec<&'a str>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = alloc::vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for &o in c {
                let mut t = prefix.clone();
                t.push(o);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn candidates<'a>(domain: &Domain, problem: &'a Problem, params: &[TypedName]) -> Vec<Vec<&'a str>> {
    params
        .iter()
        .map(|p| {
            problem
                .objects
                .iter()
                .filter(|o| domain.is_subtype(&o.ty, &p.ty))
                .map(|o| o.name.as_str())
                .collect()
        })
        .collect()
}

/// Grounds `problem` against `domain`. Facts are ordered by predicate
/// declaration, then object tuples in `:objects` order; actions by schema,
/// then parameter tuples. Both inputs must come from the parser (or be
/// equally well-typed).
pub fn ground(domain: &Domain, problem: &Problem) -> GroundedTask {
    let mut facts = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for p in &domain.predicates {
        for t in tuples(&candidates(domain, problem, &p.params)) {
            let n = fact_name(&p.name, &t);
            index.insert(n.clone(), facts.len());
            facts.push(n);
        }
    }
    let universe = facts.len();
    let lookup = |a: &Atom| -> usize {
        let args: Vec<&str> = a.args.iter().map(String::as_str).collect();
        index[&fact_name(&a.predicate, &args)]
    };
    let init = FactSet::from_indices(universe, problem.init.iter().map(lookup));
    let mut goal: Vec<usize> = problem.goal.iter().map(lookup).collect();
    goal.sort_unstable();
    goal.dedup();

    let mut actions = Vec::new();
    for schema in &domain.actions {
        for t in tuples(&candidates(domain, problem, &schema.params)) {
            let bind = |a: &Atom| -> usize {
                let args: Vec<&str> = a
                    .args
                    .iter()
                    .map(|v| {
                        let k = schema
                            .params
                            .iter()
                            .position(|p| &p.name == v)
                            .expect("parser checks variables are parameters");
                        t[k]
                    })
                    .collect();
                index[&fact_name(&a.predicate, &args)]
            };
            let mut ga = GroundAction {
                name: {
                    let mut n = schema.name.clone();
                    for a in &t {
                        n.push(' ');
                        n.push_str(a);
                    }
                    n
                },
                schema: schema.name.clone(),
                args: t.iter().map(|s| String::from(*s)).collect(),
                pre_pos: Vec::new(),
                pre_neg: Vec::new(),
                add: Vec::new(),
                del: Vec::new(),
                cost: 1,
            };
            for l in &schema.precondition {
                let f = bind(&l.atom);
                if l.positive {
                    ga.pre_pos.push(f)
                } else {
                    ga.pre_neg.push(f)
                }
            }
            for l in &schema.effect {
                let f = bind(&l.atom);
                if l.positive {
                    ga.add.push(f)
                } else {
                    ga.del.push(f)
                }
            }
            for v in [&mut ga.pre_pos, &mut ga.pre_neg, &mut ga.add, &mut ga.del] {
                v.sort_unstable();
                v.dedup();
            }
            // add wins over delete
            let add = ga.add.clone();
            ga.del.retain(|f| !add.contains(f));
            actions.push(ga);
        }
    }
    GroundedTask {
        facts,
        init,
        goal,
        actions,
    }
}
