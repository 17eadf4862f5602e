//! Data model, parser, and emitter for the planning-language subset.

pub mod ast;
pub mod emit;
pub mod lexer;
pub mod parser;

pub use ast::{
    name, object_type, ActionSchema, Atom, Domain, GroundAtom, InvalidName, Metric, ModelError,
    Name, Param, PredicateSig, Problem, Requirements, Term, TypeForest, MAX_ARITY,
};
pub use emit::{emit_domain, emit_problem};
pub use parser::{parse_domain, parse_problem, ParseError};
