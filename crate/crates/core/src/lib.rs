//! Rule-based reasoning over uncertain facts.
//!
//! `mvlog` evaluates Datalog programs, optionally with existential rule heads,
//! under infinite-valued Łukasiewicz semantics. Facts carry exact rational
//! degrees of truth; a program's consequences are read off its minimal model,
//! computed by grounding the program with the oblivious chase and solving an
//! exact linear program over the resulting ground rules.
//!
//! ```
//! use mvlog::{parse, Engine, Instance, Outcome, TruthDegree, GroundAtom};
//!
//! let (program, database) = parse(
//!     "0.8 :: label(i1, whale).
//!      0.7 :: polar(i1).
//!      orca(X) :- label(X, whale), polar(X).",
//! )?;
//! let instance = Instance::new(program, database, TruthDegree::one())?;
//! let Outcome::Model(model) = Engine::default().solve(&instance)? else {
//!     panic!("satisfiable");
//! };
//! let orca = GroundAtom::with_constants("orca", &["i1"]);
//! assert_eq!(model.assignment.get(&orca).to_string(), "1/2");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod chase;
pub mod degree;
pub mod engine;
pub mod lp;
pub mod parser;
pub mod semantics;
pub mod syntax;
pub mod termination;

#[cfg(doctest)]
mod book;

pub use chase::{oblivious_chase, ChaseResult, NullRegistry};
pub use degree::{rat, Rational, TruthDegree};
pub use engine::{Engine, EngineError, EngineOptions, GroundModel, ModelKind, Outcome, QueryResult};
pub use parser::{format, parse, ParseError};
pub use semantics::{body_truth, crispify, k_satisfies, relax_rewrite, rule_gap};
pub use syntax::{
    Atom, FuzzyDatabase, GroundAtom, GroundRule, GroundTerm, Instance, NullId, Program, Rule,
    Term, TruthAssignment,
};
