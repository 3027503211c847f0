//! Contextual equivalence of numerical functions, the constructions that
//! reduce inhabitation to equivalence, first-order translations into types,
//! and a bounded inhabitation search.

use thiserror::Error;

use crate::reduction::ReductionError;
use crate::syntax::ParseError;

mod logic;
mod numeric;
mod search;
mod separation;

pub use logic::{
    assumption_form, monadic_to_type, parse_formula, translate_dyadic, translate_sequent, type_to_monadic,
    AssumptionForm, Formula, MONADIC_PREDICATE,
};
pub use numeric::{
    eq_nat_numerical, eval_numeric, extpoly_difference, extpoly_equal, extract_extpoly, extract_extpoly_with,
    nat_separation, numeral_context, numeric_type, ExtPoly, ExtractConfig, Region,
};
pub use search::{bounded_search, bounded_search_in, enumerate_inhabitants};
pub use separation::{
    enumerate_contexts, replace_star, separating_context, separating_pair, separating_pair_nat, star_type,
    top_type, SeparatingPair,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("term is not typable at {0}")]
    NotTypable(String),
    #[error("fuel exhausted after {0} reduction steps")]
    FuelExhausted(u64),
    #[error("not a Church numeral: {0}")]
    NotANumeral(String),
    #[error("no verified extended polynomial of degree at most {0} per variable")]
    DegreeBoundExceeded(u32),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("witness rejected: {0}")]
    WitnessRejected(String),
    #[error("separating context failed its own check: {0}")]
    SeparationFailed(String),
    #[error("ill-formed formula: {0}")]
    IllFormedFormula(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<ReductionError> for EquivalenceError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::FuelExhausted(n) => EquivalenceError::FuelExhausted(n),
            ReductionError::NotANumeral(s) | ReductionError::NotABoolean(s) => EquivalenceError::NotANumeral(s),
        }
    }
}
