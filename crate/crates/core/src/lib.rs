//! Weighted pushdown reachability over flow algebras.
//!
//! Saturation produces a P-automaton together with a system of constraints
//! on its transition weights; the least solution of that system gives the
//! join-over-all-paths weight of every accepted configuration.

pub mod algebra;
pub mod automaton;
pub mod encode;
pub mod oracle;
pub mod pds;
pub mod saturation;
pub mod solver;
pub mod text;

pub use algebra::FlowAlgebra;
pub use automaton::{Direction, PAutomaton, Run, Transition};
pub use pds::{Configuration, PushdownSystem, Rule, StateId, Symbol};
pub use saturation::{post_star, pre_star, saturate, Constraint, Factor, SaturationResult};
pub use solver::{solve_least, Solution, SolverConfig};
