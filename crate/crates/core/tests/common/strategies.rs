//! proptest strategies for types and terms.

#![allow(dead_code)]

use fatcheck::syntax::{Term, Type};
use proptest::prelude::*;

const TYVARS: [&str; 4] = ["X", "Y", "Z", "A"];
const VARS: [&str; 4] = ["x", "y", "z", "f"];

pub fn arb_tyvar() -> impl Strategy<Value = String> {
    prop::sample::select(&TYVARS[..]).prop_map(str::to_string)
}

pub fn arb_type() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![4 => arb_tyvar().prop_map(Type::Var), 1 => Just(Type::Club)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            (arb_tyvar(), inner).prop_map(|(x, b)| Type::forall(x, b)),
        ]
    })
}

/// Types without ♣.
pub fn arb_plain_type() -> impl Strategy<Value = Type> {
    arb_tyvar().prop_map(Type::Var).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Type::arrow(a, b)),
            (arb_tyvar(), inner).prop_map(|(x, b)| Type::forall(x, b)),
        ]
    })
}

fn arb_var() -> impl Strategy<Value = String> {
    prop::sample::select(&VARS[..]).prop_map(str::to_string)
}

pub fn arb_curry_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![5 => arb_var().prop_map(Term::Var), 1 => Just(Term::Star)];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (arb_var(), inner.clone()).prop_map(|(x, b)| Term::abs(x, b)),
            (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a)),
        ]
    })
}

pub fn arb_church_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![5 => arb_var().prop_map(Term::Var), 1 => Just(Term::Star)];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (arb_var(), inner.clone()).prop_map(|(x, b)| Term::abs(x, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (arb_tyvar(), inner.clone()).prop_map(|(x, b)| Term::ty_abs(x, b)),
            (inner, arb_type()).prop_map(|(t, a)| Term::ty_app(t, a)),
        ]
    })
}
