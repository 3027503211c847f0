//! Atomic System F (Fat): a two-phase type checker built on first-order and
//! Fat-unification, predicative encodings of sums and products, a decision
//! procedure for equivalence of numerical functions, and the term
//! constructions used in the undecidability arguments.

pub mod syntax;
pub mod reduction;
pub mod fou;
pub mod fat_unify;
pub mod typecheck;
pub mod encodings;
pub mod equivalence;
