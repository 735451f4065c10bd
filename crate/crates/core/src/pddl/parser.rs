use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::sexp::{read_one, Sexp};
use super::{PddlError, Pos};

const SUPPORTED_REQUIREMENTS: [&str; 3] = [":strips", ":typing", ":negative-preconditions"];

const UNSUPPORTED_CONNECTIVES: [&str; 10] = [
    "or", "imply", "exists", "forall", "when", "=", "increase", "decrease", "either", "assign",
];

fn syntax(pos: Pos, expected: &str, found: &Sexp) -> PddlError {
    PddlError::Syntax {
        pos,
        expected: alloc::vec![expected.to_string()],
        found: found.describe(),
    }
}

fn eof(pos: Pos, expected: &str) -> PddlError {
    PddlError::Syntax {
        pos,
        expected: alloc::vec![expected.to_string()],
        found: "end of list".into(),
    }
}

fn semantic(pos: Pos, message: String) -> PddlError {
    PddlError::Semantic { pos, message }
}

fn unsupported(pos: Pos, feature: &str) -> PddlError {
    PddlError::Unsupported {
        pos,
        feature: feature.into(),
    }
}

fn list<'a>(s: &'a Sexp, expected: &str) -> Result<(Pos, &'a [Sexp]), PddlError> {
    match s {
        Sexp::List { items, pos } => Ok((*pos, items)),
        other => Err(syntax(other.pos(), expected, other)),
    }
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn name(s: &Sexp, what: &str) -> Result<String, PddlError> {
    match s.sym() {
        Some(t) if is_name(t) => Ok(t.to_string()),
        Some(t) if UNSUPPORTED_CONNECTIVES.contains(&t) => Err(unsupported(s.pos(), t)),
        _ => Err(syntax(s.pos(), what, s)),
    }
}

fn var(s: &Sexp) -> Result<String, PddlError> {
    match s.sym() {
        Some(t) if t.starts_with('?') && is_name(&t[1..]) => Ok(t.to_string()),
        _ => Err(syntax(s.pos(), "a variable `?name`", s)),
    }
}

fn keyword<'a>(items: &'a [Sexp], at: usize, open: Pos, kw: &str) -> Result<&'a Sexp, PddlError> {
    let s = items.get(at).ok_or_else(|| eof(open, &format!("`{kw}`")))?;
    if s.sym() == Some(kw) {
        Ok(s)
    } else {
        Err(syntax(s.pos(), &format!("`{kw}`"), s))
    }
}

/// `x1 x2 - t1 y1 - t2 z` ; untyped trailing names get `object`.
fn typed_list(
    items: &[Sexp],
    elem: impl Fn(&Sexp) -> Result<String, PddlError>,
) -> Result<Vec<(TypedName, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = &items[i];
        if s.sym() == Some("-") {
            if pending.is_empty() {
                return Err(syntax(s.pos(), "a name before `-`", s));
            }
            let ty_s = items
                .get(i + 1)
                .ok_or_else(|| eof(s.pos(), "a type name after `-`"))?;
            if let Sexp::List { items: inner, pos } = ty_s {
                if inner.first().and_then(Sexp::sym) == Some("either") {
                    return Err(unsupported(*pos, "either"));
                }
            }
            let ty = name(ty_s, "a type name")?;
            for (n, p) in pending.drain(..) {
                out.push((TypedName { name: n, ty: ty.clone() }, p));
            }
            i += 2;
        } else {
            pending.push((elem(s)?, s.pos()));
            i += 1;
        }
    }
    for (n, p) in pending {
        out.push((
            TypedName {
                name: n,
                ty: "object".into(),
            },
            p,
        ));
    }
    Ok(out)
}

fn atom(s: &Sexp, allow_vars: bool) -> Result<(Atom, Pos), PddlError> {
    let (pos, items) = list(s, "an atom `(predicate ...)`")?;
    let head = items.first().ok_or_else(|| eof(pos, "a predicate name"))?;
    let predicate = name(head, "a predicate name")?;
    let mut args = Vec::new();
    for a in &items[1..] {
        match a.sym() {
            Some(t) if allow_vars && t.starts_with('?') => args.push(var(a)?),
            Some(_) => args.push(name(a, "an object name")?),
            None => return Err(syntax(a.pos(), "a term", a)),
        }
    }
    Ok((Atom { predicate, args }, pos))
}

fn literal(s: &Sexp, allow_vars: bool) -> Result<(Literal, Pos), PddlError> {
    let (pos, items) = list(s, "a literal")?;
    match items.first().and_then(Sexp::sym) {
        Some("not") => {
            if items.len() != 2 {
                return Err(syntax(pos, "`(not <atom>)`", s));
            }
            let (a, _) = atom(&items[1], allow_vars)?;
            Ok((Literal::neg(a), pos))
        }
        Some(kw) if UNSUPPORTED_CONNECTIVES.contains(&kw) || kw == "and" => {
            Err(unsupported(pos, if kw == "and" { "nested and" } else { kw }))
        }
        _ => {
            let (a, _) = atom(s, allow_vars)?;
            Ok((Literal::pos(a), pos))
        }
    }
}

/// `(and l1 l2 ...)`, `()` or a single literal.
fn condition(s: &Sexp, allow_vars: bool) -> Result<Vec<(Literal, Pos)>, PddlError> {
    let (_, items) = list(s, "a condition")?;
    match items.first().and_then(Sexp::sym) {
        None if items.is_empty() => Ok(Vec::new()),
        Some("and") => items[1..].iter().map(|x| literal(x, allow_vars)).collect(),
        _ => Ok(alloc::vec![literal(s, allow_vars)?]),
    }
}

fn check_atom_against(
    domain: &Domain,
    a: &Atom,
    pos: Pos,
    arg_type: impl Fn(&str) -> Option<String>,
    what: &str,
) -> Result<(), PddlError> {
    let decl = domain
        .predicate(&a.predicate)
        .ok_or_else(|| semantic(pos, format!("undeclared predicate `{}`", a.predicate)))?;
    if decl.params.len() != a.args.len() {
        return Err(semantic(
            pos,
            format!(
                "predicate `{}` takes {} argument(s), got {}",
                a.predicate,
                decl.params.len(),
                a.args.len()
            ),
        ));
    }
    for (arg, p) in a.args.iter().zip(&decl.params) {
        let ty = arg_type(arg)
            .ok_or_else(|| semantic(pos, format!("undeclared {what} `{arg}`")))?;
        if !domain.is_subtype(&ty, &p.ty) {
            return Err(semantic(
                pos,
                format!(
                    "`{arg}` has type `{ty}` but `{}` expects `{}`",
                    a.predicate, p.ty
                ),
            ));
        }
    }
    Ok(())
}

fn parse_action(items: &[Sexp], open: Pos, domain: &Domain) -> Result<ActionSchema, PddlError> {
    let name_s = items.get(1).ok_or_else(|| eof(open, "an action name"))?;
    let aname = name(name_s, "an action name")?;
    let mut params = None;
    let mut pre = Vec::new();
    let mut eff = None;
    let mut i = 2;
    while i < items.len() {
        let key = &items[i];
        let val = items
            .get(i + 1)
            .ok_or_else(|| eof(key.pos(), "a value after the keyword"))?;
        match key.sym() {
            Some(":parameters") => {
                let (_, ps) = list(val, "a parameter list")?;
                params = Some(typed_list(ps, var)?);
            }
            Some(":precondition") => pre = condition(val, true)?,
            Some(":effect") => eff = Some(condition(val, true)?),
            Some(k @ (":duration" | ":condition")) => return Err(unsupported(key.pos(), k)),
            _ => {
                return Err(syntax(
                    key.pos(),
                    "`:parameters`, `:precondition` or `:effect`",
                    key,
                ))
            }
        }
        i += 2;
    }
    let params = params.ok_or_else(|| eof(open, "`:parameters`"))?;
    let eff = eff.ok_or_else(|| eof(open, "`:effect`"))?;

    let mut seen = BTreeSet::new();
    for (p, pos) in &params {
        if !seen.insert(p.name.clone()) {
            return Err(semantic(*pos, format!("duplicate parameter `{}`", p.name)));
        }
        if !domain.has_type(&p.ty) {
            return Err(semantic(*pos, format!("undeclared type `{}`", p.ty)));
        }
    }
    let param_type = |v: &str| {
        params
            .iter()
            .find(|(p, _)| p.name == v)
            .map(|(p, _)| p.ty.clone())
    };
    let negative_ok = domain
        .requirements
        .iter()
        .any(|r| r == ":negative-preconditions");
    for (l, pos) in pre.iter().chain(&eff) {
        if let Some(a) = l.atom.args.iter().find(|a| !a.starts_with('?')) {
            return Err(unsupported(*pos, &format!("constant `{a}` in action body")));
        }
        check_atom_against(domain, &l.atom, *pos, param_type, "variable")?;
    }
    if let Some((_, pos)) = pre.iter().find(|(l, _)| !l.positive) {
        if !negative_ok {
            return Err(semantic(
                *pos,
                "negative precondition requires `:negative-preconditions`".into(),
            ));
        }
    }
    Ok(ActionSchema {
        name: aname,
        params: params.into_iter().map(|(p, _)| p).collect(),
        precondition: pre.into_iter().map(|(l, _)| l).collect(),
        effect: eff.into_iter().map(|(l, _)| l).collect(),
    })
}

/// Parses a domain in the supported subset.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = read_one(text)?;
    let (open, items) = list(&root, "`(define ...)`")?;
    keyword(items, 0, open, "define")?;
    let header = items.get(1).ok_or_else(|| eof(open, "`(domain <name>)`"))?;
    let (hpos, h) = list(header, "`(domain <name>)`")?;
    keyword(h, 0, hpos, "domain")?;
    let dname = name(h.get(1).ok_or_else(|| eof(hpos, "a domain name"))?, "a domain name")?;

    let mut domain = Domain {
        name: dname,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut raw_actions = Vec::new();
    for sec in &items[2..] {
        let (spos, s) = list(sec, "a domain section")?;
        let head = s.first().ok_or_else(|| eof(spos, "a section keyword"))?;
        match head.sym() {
            Some(":requirements") => {
                for r in &s[1..] {
                    let t = r.sym().ok_or_else(|| syntax(r.pos(), "a requirement flag", r))?;
                    if !t.starts_with(':') {
                        return Err(syntax(r.pos(), "a requirement flag", r));
                    }
                    if !SUPPORTED_REQUIREMENTS.contains(&t) {
                        return Err(unsupported(r.pos(), t));
                    }
                    domain.requirements.push(t.to_string());
                }
            }
            Some(":types") => {
                for (t, pos) in typed_list(&s[1..], |x| name(x, "a type name"))? {
                    if t.name == "object" || domain.has_type(&t.name) {
                        return Err(semantic(pos, format!("duplicate type `{}`", t.name)));
                    }
                    domain.types.push(TypeDecl {
                        name: t.name,
                        parent: t.ty,
                    });
                }
            }
            Some(":predicates") => {
                for p in &s[1..] {
                    let (ppos, pitems) = list(p, "a predicate declaration")?;
                    let head = pitems.first().ok_or_else(|| eof(ppos, "a predicate name"))?;
                    let pname = name(head, "a predicate name")?;
                    if domain.predicate(&pname).is_some() {
                        return Err(semantic(ppos, format!("duplicate predicate `{pname}`")));
                    }
                    let params = typed_list(&pitems[1..], var)?;
                    domain.predicates.push(PredicateDecl {
                        name: pname,
                        params: params.into_iter().map(|(p, _)| p).collect(),
                    });
                }
            }
            Some(":action") => raw_actions.push((spos, s)),
            Some(
                k @ (":constants" | ":functions" | ":durative-action" | ":derived" | ":axiom"
                | ":constraints"),
            ) => return Err(unsupported(head.pos(), k)),
            _ => {
                return Err(syntax(
                    head.pos(),
                    "`:requirements`, `:types`, `:predicates` or `:action`",
                    head,
                ))
            }
        }
    }
    // type hierarchy: parents declared, no cycles
    for t in &domain.types {
        if !domain.has_type(&t.parent) {
            return Err(semantic(open, format!("undeclared parent type `{}`", t.parent)));
        }
        if domain.is_subtype(&t.parent, &t.name) {
            return Err(semantic(open, format!("cyclic type `{}`", t.name)));
        }
    }
    for p in &domain.predicates {
        if let Some(bad) = p.params.iter().find(|x| !domain.has_type(&x.ty)) {
            return Err(semantic(
                open,
                format!("predicate `{}` uses undeclared type `{}`", p.name, bad.ty),
            ));
        }
    }
    for (pos, s) in raw_actions {
        let a = parse_action(s, pos, &domain)?;
        if domain.action(&a.name).is_some() {
            return Err(semantic(pos, format!("duplicate action `{}`", a.name)));
        }
        domain.actions.push(a);
    }
    Ok(domain)
}

/// Parses a problem and type-checks it against `domain`.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = read_one(text)?;
    let (open, items) = list(&root, "`(define ...)`")?;
    keyword(items, 0, open, "define")?;
    let header = items.get(1).ok_or_else(|| eof(open, "`(problem <name>)`"))?;
    let (hpos, h) = list(header, "`(problem <name>)`")?;
    keyword(h, 0, hpos, "problem")?;
    let pname = name(h.get(1).ok_or_else(|| eof(hpos, "a problem name"))?, "a problem name")?;

    let mut dname = None;
    let mut objects: Vec<(TypedName, Pos)> = Vec::new();
    let mut init = None;
    let mut goal = None;
    for sec in &items[2..] {
        let (spos, s) = list(sec, "a problem section")?;
        let head = s.first().ok_or_else(|| eof(spos, "a section keyword"))?;
        match head.sym() {
            Some(":domain") => {
                let n = s.get(1).ok_or_else(|| eof(spos, "a domain name"))?;
                let n = name(n, "a domain name")?;
                if n != domain.name {
                    return Err(semantic(
                        spos,
                        format!("problem is for domain `{n}`, not `{}`", domain.name),
                    ));
                }
                dname = Some(n);
            }
            Some(":objects") => objects = typed_list(&s[1..], |x| name(x, "an object name"))?,
            Some(":init") => {
                let mut atoms = Vec::new();
                for a in &s[1..] {
                    let (lit, pos) = literal(a, false)?;
                    if !lit.positive {
                        return Err(unsupported(pos, "negative initial facts"));
                    }
                    atoms.push((lit.atom, pos));
                }
                init = Some(atoms);
            }
            Some(":goal") => {
                let g = s.get(1).ok_or_else(|| eof(spos, "a goal condition"))?;
                let lits = condition(g, false)?;
                let mut atoms = Vec::new();
                for (l, pos) in lits {
                    if !l.positive {
                        return Err(unsupported(pos, "negative goals"));
                    }
                    atoms.push((l.atom, pos));
                }
                goal = Some(atoms);
            }
            Some(k @ (":metric" | ":constraints" | ":requirements")) => {
                return Err(unsupported(head.pos(), k))
            }
            _ => {
                return Err(syntax(
                    head.pos(),
                    "`:domain`, `:objects`, `:init` or `:goal`",
                    head,
                ))
            }
        }
    }
    dname.ok_or_else(|| eof(open, "`(:domain <name>)`"))?;
    let init = init.ok_or_else(|| eof(open, "`(:init ...)`"))?;
    let goal = goal.ok_or_else(|| eof(open, "`(:goal ...)`"))?;

    let mut seen = BTreeSet::new();
    for (o, pos) in &objects {
        if !seen.insert(o.name.clone()) {
            return Err(semantic(*pos, format!("duplicate object `{}`", o.name)));
        }
        if !domain.has_type(&o.ty) {
            return Err(semantic(*pos, format!("undeclared type `{}`", o.ty)));
        }
    }
    let obj_type = |n: &str| {
        objects
            .iter()
            .find(|(o, _)| o.name == n)
            .map(|(o, _)| o.ty.clone())
    };
    for (a, pos) in init.iter().chain(&goal) {
        check_atom_against(domain, a, *pos, obj_type, "object")?;
    }
    Ok(Problem {
        name: pname,
        domain: domain.name.clone(),
        objects: objects.into_iter().map(|(o, _)| o).collect(),
        init: init.into_iter().map(|(a, _)| a).collect(),
        goal: goal.into_iter().map(|(a, _)| a).collect(),
    })
}
