//! Multi-lane spatial logic: syntax, parser and a direct model checker.

mod ast;
mod critical;
mod eval;
mod global;
mod parser;

pub use ast::Formula;
pub use critical::{critical_times, rational_sqrt, CriticalTimes, Quadratic, Root};
pub use eval::{chop_candidates, eval, eval_with_extra};
pub use global::{global_check_direct, DirectCheck, Verdict};
pub use parser::parse_formula;
