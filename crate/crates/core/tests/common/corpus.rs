//! Fixed corpora shared by the integration and acceptance suites.

#![allow(dead_code)]

use fatcheck::syntax::{parse_type, Type};

/// Twenty target types for the destructor encodings.
pub const TARGET_TYPES: [&str; 20] = [
    "C",
    "#",
    "A",
    "C -> C",
    "C -> D",
    "A -> B",
    "(C -> C) -> C",
    "C -> D -> E",
    "forall Y. Y",
    "forall Y. Y -> Y",
    "forall Y. C -> Y",
    "forall Y Z. Y -> Z -> Y",
    "C -> forall Y. Y",
    "(forall Y. Y) -> C",
    "forall Y. (Y -> Y) -> Y -> Y",
    "forall Y. (C -> Y) -> Y",
    "(C -> D) -> forall Y. Y -> D",
    "# -> #",
    "forall Y. # -> Y -> Y",
    "C -> (forall Y. Y -> C) -> C",
];

pub fn target_types() -> Vec<Type> {
    TARGET_TYPES.iter().map(|s| parse_type(s).unwrap()).collect()
}

/// Numerical functions `(name, arity, term)`, all of type `Nat^k ⇒ Nat`.
pub const NUMERIC_TERMS: [(&str, usize, &str); 23] = [
    ("identity", 1, "\\n. n"),
    ("successor", 1, "\\n f x. f (n f x)"),
    ("successor_inner", 1, "\\n f x. n f (f x)"),
    ("zero", 1, "\\n f x. x"),
    ("three", 1, "\\n f x. f (f (f x))"),
    ("double", 1, "\\n f x. n f (n f x)"),
    ("square", 1, "\\n f. n (n f)"),
    ("iszero", 1, "\\n f x. n (\\y. x) (f x)"),
    ("plus_two", 1, "\\n f x. f (f (n f x))"),
    ("cube", 1, "\\n f. n (n (n f))"),
    ("square_plus_one", 1, "\\n f x. f (n (n f) x)"),
    ("odd_double", 1, "\\n f x. f (n f (n f x))"),
    ("one_or_two", 1, "\\n f x. n (\\y. f x) (f (f x))"),
    ("addition", 2, "\\m n f x. m f (n f x)"),
    ("multiplication", 2, "\\m n f. m (n f)"),
    ("multiplication_swapped", 2, "\\x y f z. y (x f) z"),
    ("first", 2, "\\m n. m"),
    ("second", 2, "\\m n f x. n f x"),
    ("mult_plus_first", 2, "\\m n f x. m (n f) (m f x)"),
    ("guarded_second", 2, "\\m n f x. m (\\y. x) (n f x)"),
    ("addition_plus_one", 2, "\\m n f x. f (m f (n f x))"),
    ("square_times", 2, "\\m n f. m (m (n f))"),
    ("both_zero", 2, "\\m n f x. m (\\y. x) (n (\\y. x) (f x))"),
];

pub fn numeric_terms() -> Vec<(&'static str, usize, fatcheck::syntax::Term)> {
    NUMERIC_TERMS
        .iter()
        .map(|(n, k, s)| (*n, *k, fatcheck::syntax::parse_any_term(s).unwrap()))
        .collect()
}
