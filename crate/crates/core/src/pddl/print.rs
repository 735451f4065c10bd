//! Canonical pretty-printer. `parse(print(x)) == x` for every AST the
//! parser produces.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::ast::*;

fn typed(list: &[TypedName]) -> String {
    // group consecutive names of the same type: `a b - t c - u`
    let mut out = String::new();
    let mut i = 0;
    while i < list.len() {
        let ty = &list[i].ty;
        let mut j = i;
        while j < list.len() && list[j].ty == *ty {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&list[j].name);
            j += 1;
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
    out
}

fn atom(a: &Atom) -> String {
    let mut s = String::from("(");
    s.push_str(&a.predicate);
    for x in &a.args {
        s.push(' ');
        s.push_str(x);
    }
    s.push(')');
    s
}

fn literal(l: &Literal) -> String {
    if l.positive {
        atom(&l.atom)
    } else {
        alloc::format!("(not {})", atom(&l.atom))
    }
}

fn conjunction(lits: &[String]) -> String {
    match lits.len() {
        0 => String::from("()"),
        1 => lits[0].clone(),
        _ => alloc::format!("(and {})", lits.join(" ")),
    }
}

pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        let tl: Vec<TypedName> = d
            .types
            .iter()
            .map(|t| TypedName {
                name: t.name.clone(),
                ty: t.parent.clone(),
            })
            .collect();
        let _ = writeln!(out, "  (:types {})", typed(&tl));
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates");
        for p in &d.predicates {
            if p.params.is_empty() {
                let _ = write!(out, "\n    ({})", p.name);
            } else {
                let _ = write!(out, "\n    ({} {})", p.name, typed(&p.params));
            }
        }
        out.push_str(")\n");
    }
    for a in &d.actions {
        let _ = writeln!(out, "  (:action {}", a.name);
        let _ = writeln!(out, "    :parameters ({})", typed(&a.params));
        if !a.precondition.is_empty() {
            let pre: Vec<String> = a.precondition.iter().map(literal).collect();
            let _ = writeln!(out, "    :precondition {}", conjunction(&pre));
        }
        let eff: Vec<String> = a.effect.iter().map(literal).collect();
        let _ = writeln!(out, "    :effect {})", conjunction(&eff));
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    if !p.objects.is_empty() {
        let _ = writeln!(out, "  (:objects {})", typed(&p.objects));
    }
    out.push_str("  (:init");
    for a in &p.init {
        let _ = write!(out, "\n    {}", atom(a));
    }
    out.push_str(")\n");
    let goal: Vec<String> = p.goal.iter().map(atom).collect();
    let _ = writeln!(out, "  (:goal {}))", conjunction(&goal));
    out
}
