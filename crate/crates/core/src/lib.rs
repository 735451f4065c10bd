//! Director/Matcher perspective-taking environment and the planning pipeline
//! built on top of it.
//!
//! The crate is `no_std` (with `alloc`): everything here is a pure function
//! over immutable values. File formats, the CLI and the HTTP backend live in
//! the `dirtask` companion crate.
//!
//! Pipeline, bottom-up:
//!
//! * [`scenario`]: the world (a row of locations, containers, two agents with
//!   line-of-sight visibility) and the reference pack of seven families.
//! * [`pddl`]: a STRIPS/typing PDDL subset parser, grounder and emitter.
//! * [`search`]: A* with `h_max`, instrumented to record a reasoning tree.
//! * [`extract`]: G/E/L trajectory extraction from reasoning trees.
//! * [`forge`]: prompt packs and thought-action example validation.
//! * [`agent`]: the ReAct Matcher loop, policies and the Director responder.
//! * [`eval`]: experiment plans, aggregation and table rendering.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod agent;
pub mod bridge;
pub mod eval;
pub mod extract;
pub mod forge;
pub mod hash;
pub mod pddl;
pub mod scenario;
pub mod search;
pub mod task;

pub use scenario::{Action, AskVariant, Family, Question, Role, Rules, Scenario, WorldState};
pub use search::{astar, hmax, ReasoningTree};
pub use task::{FactSet, GroundedTask};
