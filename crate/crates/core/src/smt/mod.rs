//! SMT-LIB 2 emission, solver processes, and witness replay.

mod algebraic;
mod emit;
mod sexpr;
mod solver;
mod witness;

pub use algebraic::{simplest_between, Algebraic, Poly};
pub use emit::{emit_smtlib, rational_literal, rcf_to_smtlib, term_to_smtlib};
pub use sexpr::{parse_sexprs, Sexpr};
pub use solver::{
    find_in_path, parse_output, run_solver, solver_available, SolverConfig, SolverResult, SolverRun, Value, SOLVER_ENV,
};
pub use witness::{decision_vars, extract_witness, solve_rational, Outcome, Witness};
