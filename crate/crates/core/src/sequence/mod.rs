//! Pulse-sequence language: AST, parser, printer, builtins and compilation.

mod ast;
mod builtin;
mod compile;
mod parser;

pub use ast::{Axis, Delay, Event, Sequence, SoftPulseParams, Target};
pub use builtin::{builtin, builtin_target, oracle_matrix, BUILTIN_NAMES};
pub use compile::{
    check_equivalence, compile, compile_detailed, lower, Compiled, CompiledEvent, Mode,
};
pub use parser::{parse, ParseError};
