//! PDDL subset: `:strips`, `:typing` and `:negative-preconditions`.
//!
//! Grammar (EBNF), whitespace and `;` comments allowed between tokens:
//!
//! ```text
//! domain      = "(" "define" "(" "domain" name ")"
//!               [ "(" ":requirements" { requirement } ")" ]
//!               [ "(" ":types" typed-list(name) ")" ]
//!               [ "(" ":predicates" { "(" name typed-list(var) ")" } ")" ]
//!               { action } ")" ;
//! action      = "(" ":action" name
//!               ":parameters" "(" typed-list(var) ")"
//!               [ ":precondition" condition ]
//!               ":effect" condition ")" ;
//! problem     = "(" "define" "(" "problem" name ")"
//!               "(" ":domain" name ")"
//!               [ "(" ":objects" typed-list(name) ")" ]
//!               "(" ":init" { atom } ")"
//!               "(" ":goal" condition ")" ")" ;
//! condition   = "(" "and" { literal } ")" | "(" ")" | literal ;
//! literal     = atom | "(" "not" atom ")" ;
//! atom        = "(" name { term } ")" ;
//! term        = var | name ;
//! typed-list(x) = { x } | x { x } "-" name typed-list(x) ;
//! requirement = ":strips" | ":typing" | ":negative-preconditions" ;
//! var         = "?" name ;
//! name        = letter { letter | digit | "-" | "_" } ;
//! ```
//!
//! Goals must be positive. Anything else (`or`, quantifiers, conditional
//! effects, `either` types, constants, numeric fluents, durative actions)
//! is rejected with [`PddlError::Unsupported`].

mod ast;
mod emit;
mod ground;
mod parser;
mod print;
mod sexp;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use ast::{ActionSchema, Atom, Domain, Literal, PredicateDecl, Problem, TypeDecl, TypedName};
pub use emit::{domain_ast, domain_name, emit_scenario, location_object, problem_ast, scenario_task, EmitError};
pub use ground::ground;
pub use parser::{parse_domain, parse_problem};
pub use print::{print_domain, print_problem};

/// Source position: byte offset plus 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub const START: Pos = Pos {
        offset: 0,
        line: 1,
        col: 1,
    };
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PddlError {
    #[error("{pos}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: unsupported PDDL feature `{feature}`")]
    Unsupported { pos: Pos, feature: String },
    #[error("{pos}: {message}")]
    Semantic { pos: Pos, message: String },
}

impl PddlError {
    pub fn pos(&self) -> Pos {
        match self {
            PddlError::Syntax { pos, .. }
            | PddlError::Unsupported { pos, .. }
            | PddlError::Semantic { pos, .. } => *pos,
        }
    }
}

/// Domain file name for a family/variant pair.
pub fn domain_file_name(stem: &str, variant: crate::AskVariant) -> String {
    alloc::format!("{stem}_{}.domain.pddl", variant.sign())
}

pub fn problem_file_name(stem: &str, variant: crate::AskVariant) -> String {
    alloc::format!("{stem}_{}.problem.pddl", variant.sign())
}
