//! Types, terms, typing contexts and simple types, with parsing, printing,
//! capture-avoiding substitution, alpha-equivalence and type erasure.
//!
//! The concrete syntax is ASCII: `forall X Y. A`, `A -> B`, `#` for the type
//! constant, `\x y. t`, `/\X. t`, `t [A]` and `*` for the term constant.  A
//! few Unicode spellings (`∀ λ Λ → ⇒ ♣ ★`) are accepted as aliases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Abstract syntax
// ---------------------------------------------------------------------------

/// A second-order type.  `Club` is the constant of the Fat♣ extension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Var(String),
    Arrow(Box<Type>, Box<Type>),
    Forall(String, Box<Type>),
    Club,
}

/// A lambda term.  Terms without `TyAbs`/`TyApp` are Curry-style.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Abs(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    TyAbs(String, Box<Term>),
    TyApp(Box<Term>, Type),
    Star,
}

/// Simple types over the single ground type `o`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimpleType {
    Base,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

/// Finite map from term variables to types.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypingContext(pub BTreeMap<String, Type>);

/// Which term grammar the parser accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Curry,
    Church,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

/// `base` itself if unused, otherwise `base` followed by the fewest primes
/// that make it unused.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = base.to_string();
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// A fresh name that is never `base` itself.
pub fn fresh_variant(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{base}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    s != "forall" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

impl Type {
    pub fn var(name: impl Into<String>) -> Type {
        Type::Var(name.into())
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn forall(x: impl Into<String>, body: Type) -> Type {
        Type::Forall(x.into(), Box::new(body))
    }

    /// `forall x1 ... xn. body`, innermost last.
    pub fn foralls<S: AsRef<str>>(vars: &[S], body: Type) -> Type {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Type::forall(v.as_ref(), acc))
    }

    /// Right-nested arrows `a1 -> ... -> an -> target`.
    pub fn arrows(args: Vec<Type>, target: Type) -> Type {
        args.into_iter()
            .rev()
            .fold(target, |acc, a| Type::arrow(a, acc))
    }

    /// The maximal quantifier prefix and the body under it.
    pub fn split_prefix(&self) -> (Vec<String>, &Type) {
        let mut vars = Vec::new();
        let mut t = self;
        while let Type::Forall(x, body) = t {
            vars.push(x.clone());
            t = body;
        }
        (vars, t)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Type::Var(_) | Type::Club)
    }

    pub fn contains_club(&self) -> bool {
        match self {
            Type::Club => true,
            Type::Var(_) => false,
            Type::Arrow(a, b) => a.contains_club() || b.contains_club(),
            Type::Forall(_, b) => b.contains_club(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Type::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Type::Club => {}
            Type::Arrow(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Type::Forall(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring in the type, free or bound.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Type::Var(x) => {
                out.insert(x.clone());
            }
            Type::Club => {}
            Type::Arrow(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Type::Forall(x, body) => {
                out.insert(x.clone());
                body.collect_names(out);
            }
        }
    }

    /// Capture-avoiding `self[c/x]`.
    pub fn subst(&self, x: &str, c: &Type) -> Type {
        let mut m = BTreeMap::new();
        m.insert(x.to_string(), c.clone());
        self.subst_many(&m)
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn subst_many(&self, m: &BTreeMap<String, Type>) -> Type {
        if m.is_empty() {
            return self.clone();
        }
        match self {
            Type::Var(y) => m.get(y).cloned().unwrap_or_else(|| self.clone()),
            Type::Club => Type::Club,
            Type::Arrow(a, b) => Type::arrow(a.subst_many(m), b.subst_many(m)),
            Type::Forall(y, body) => {
                let fv_body = body.free_vars();
                let relevant: BTreeMap<String, Type> = m
                    .iter()
                    .filter(|(k, _)| *k != y && fv_body.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if relevant.is_empty() {
                    return self.clone();
                }
                let range_fv: BTreeSet<String> =
                    relevant.values().flat_map(|v| v.free_vars()).collect();
                if range_fv.contains(y) {
                    let mut avoid = range_fv;
                    avoid.extend(fv_body);
                    avoid.extend(relevant.keys().cloned());
                    let y2 = fresh_variant(y, &avoid);
                    let renamed = body.subst(y, &Type::Var(y2.clone()));
                    Type::forall(y2, renamed.subst_many(&relevant))
                } else {
                    Type::forall(y.clone(), body.subst_many(&relevant))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Type) -> bool {
        self.to_db() == other.to_db()
    }

    /// Nameless view used for alpha-equivalence.
    pub fn to_db(&self) -> DbType {
        self.to_db_in(&mut Vec::new())
    }

    fn to_db_in(&self, env: &mut Vec<String>) -> DbType {
        match self {
            Type::Var(x) => match env.iter().rev().position(|b| b == x) {
                Some(i) => DbType::Bound(i),
                None => DbType::Free(x.clone()),
            },
            Type::Club => DbType::Club,
            Type::Arrow(a, b) => DbType::Arrow(Box::new(a.to_db_in(env)), Box::new(b.to_db_in(env))),
            Type::Forall(x, body) => {
                env.push(x.clone());
                let inner = body.to_db_in(env);
                env.pop();
                DbType::Forall(Box::new(inner))
            }
        }
    }

    /// Erasure to simple types: quantifiers disappear, atoms become `o`.
    pub fn erase(&self) -> SimpleType {
        erase_types(self)
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) | Type::Club => 1,
            Type::Arrow(a, b) => 1 + a.size() + b.size(),
            Type::Forall(_, b) => 1 + b.size(),
        }
    }
}

/// Nameless (de Bruijn) types; `Bound(0)` is the innermost binder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DbType {
    Free(String),
    Bound(usize),
    Arrow(Box<DbType>, Box<DbType>),
    Forall(Box<DbType>),
    Club,
}

/// `|X| = |#| = o`, `|A -> B| = |A| -> |B|`, `|forall X. A| = |A|`.
pub fn erase_types(a: &Type) -> SimpleType {
    match a {
        Type::Var(_) | Type::Club => SimpleType::Base,
        Type::Arrow(x, y) => SimpleType::Arrow(Box::new(erase_types(x)), Box::new(erase_types(y))),
        Type::Forall(_, body) => erase_types(body),
    }
}

pub fn alpha_eq(a: &Type, b: &Type) -> bool {
    a.alpha_eq(b)
}

pub fn substitute(a: &Type, x: &str, c: &Type) -> Type {
    a.subst(x, c)
}

impl SimpleType {
    pub fn arrow(a: SimpleType, b: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(a), Box::new(b))
    }
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn abs(x: impl Into<String>, body: Term) -> Term {
        Term::Abs(x.into(), Box::new(body))
    }

    pub fn abss<S: AsRef<str>>(vars: &[S], body: Term) -> Term {
        vars.iter().rev().fold(body, |acc, v| Term::abs(v.as_ref(), acc))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Left-nested application `f a1 ... an`.
    pub fn apps(f: Term, args: Vec<Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn ty_abs(x: impl Into<String>, body: Term) -> Term {
        Term::TyAbs(x.into(), Box::new(body))
    }

    pub fn ty_app(t: Term, a: Type) -> Term {
        Term::TyApp(Box::new(t), a)
    }

    pub fn is_curry(&self) -> bool {
        match self {
            Term::Var(_) | Term::Star => true,
            Term::Abs(_, b) => b.is_curry(),
            Term::App(f, a) => f.is_curry() && a.is_curry(),
            Term::TyAbs(..) | Term::TyApp(..) => false,
        }
    }

    /// Drop every type abstraction and type application.
    pub fn erase(&self) -> Term {
        match self {
            Term::Var(_) | Term::Star => self.clone(),
            Term::Abs(x, b) => Term::abs(x.clone(), b.erase()),
            Term::App(f, a) => Term::app(f.erase(), a.erase()),
            Term::TyAbs(_, b) => b.erase(),
            Term::TyApp(t, _) => t.erase(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Star => 1,
            Term::Abs(_, b) | Term::TyAbs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::TyApp(t, _) => 1 + t.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Star => {}
            Term::Abs(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::TyAbs(_, b) => b.collect_free(bound, out),
            Term::TyApp(t, _) => t.collect_free(bound, out),
        }
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => x == y,
            Term::Star => false,
            Term::Abs(y, b) => y != x && b.occurs_free(x),
            Term::App(f, a) => f.occurs_free(x) || a.occurs_free(x),
            Term::TyAbs(_, b) => b.occurs_free(x),
            Term::TyApp(t, _) => t.occurs_free(x),
        }
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_types(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_types(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) | Term::Star => {}
            Term::Abs(_, b) => b.collect_free_types(bound, out),
            Term::App(f, a) => {
                f.collect_free_types(bound, out);
                a.collect_free_types(bound, out);
            }
            Term::TyAbs(x, b) => {
                bound.push(x.clone());
                b.collect_free_types(bound, out);
                bound.pop();
            }
            Term::TyApp(t, a) => {
                t.collect_free_types(bound, out);
                for v in a.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
        }
    }

    /// Every term-variable name, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Star => {}
            Term::Abs(x, b) => {
                out.insert(x.clone());
                b.collect_vars(out);
            }
            Term::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
            Term::TyAbs(_, b) | Term::TyApp(b, _) => b.collect_vars(out),
        }
    }

    /// Every type-variable name, free or bound.
    pub fn all_type_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_type_names(&mut out);
        out
    }

    fn collect_type_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) | Term::Star => {}
            Term::Abs(_, b) => b.collect_type_names(out),
            Term::App(f, a) => {
                f.collect_type_names(out);
                a.collect_type_names(out);
            }
            Term::TyAbs(x, b) => {
                out.insert(x.clone());
                b.collect_type_names(out);
            }
            Term::TyApp(t, a) => {
                t.collect_type_names(out);
                out.extend(a.all_names());
            }
        }
    }

    /// Capture-avoiding `self[u/x]`.
    pub fn subst(&self, x: &str, u: &Term) -> Term {
        let fv = u.free_vars();
        let ftv = u.free_type_vars();
        self.subst_with(x, u, &fv, &ftv)
    }

    fn subst_with(&self, x: &str, u: &Term, fv: &BTreeSet<String>, ftv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(y) => {
                if y == x {
                    u.clone()
                } else {
                    self.clone()
                }
            }
            Term::Star => Term::Star,
            Term::App(f, a) => Term::app(f.subst_with(x, u, fv, ftv), a.subst_with(x, u, fv, ftv)),
            Term::Abs(y, b) => {
                if y == x || !b.occurs_free(x) {
                    return self.clone();
                }
                if fv.contains(y) {
                    let mut avoid = fv.clone();
                    avoid.extend(b.all_vars());
                    avoid.insert(x.to_string());
                    let y2 = fresh_variant(y, &avoid);
                    let renamed = b.subst(y, &Term::Var(y2.clone()));
                    Term::abs(y2, renamed.subst_with(x, u, fv, ftv))
                } else {
                    Term::abs(y.clone(), b.subst_with(x, u, fv, ftv))
                }
            }
            Term::TyAbs(y, b) => {
                if !b.occurs_free(x) {
                    return self.clone();
                }
                if ftv.contains(y) {
                    let mut avoid = ftv.clone();
                    avoid.extend(b.all_type_names());
                    let y2 = fresh_variant(y, &avoid);
                    let renamed = b.subst_type(y, &Type::Var(y2.clone()));
                    Term::ty_abs(y2, renamed.subst_with(x, u, fv, ftv))
                } else {
                    Term::ty_abs(y.clone(), b.subst_with(x, u, fv, ftv))
                }
            }
            Term::TyApp(t, a) => Term::ty_app(t.subst_with(x, u, fv, ftv), a.clone()),
        }
    }

    /// Capture-avoiding substitution of a type for a type variable.
    pub fn subst_type(&self, x: &str, c: &Type) -> Term {
        let fv = c.free_vars();
        self.subst_type_with(x, c, &fv)
    }

    fn subst_type_with(&self, x: &str, c: &Type, fv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(_) | Term::Star => self.clone(),
            Term::Abs(y, b) => Term::abs(y.clone(), b.subst_type_with(x, c, fv)),
            Term::App(f, a) => Term::app(f.subst_type_with(x, c, fv), a.subst_type_with(x, c, fv)),
            Term::TyApp(t, a) => Term::ty_app(t.subst_type_with(x, c, fv), a.subst(x, c)),
            Term::TyAbs(y, b) => {
                if y == x {
                    return self.clone();
                }
                if fv.contains(y) {
                    let mut avoid = fv.clone();
                    avoid.extend(b.all_type_names());
                    avoid.insert(x.to_string());
                    let y2 = fresh_variant(y, &avoid);
                    let renamed = b.subst_type(y, &Type::Var(y2.clone()));
                    Term::ty_abs(y2, renamed.subst_type_with(x, c, fv))
                } else {
                    Term::ty_abs(y.clone(), b.subst_type_with(x, c, fv))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.to_db() == other.to_db()
    }

    pub fn to_db(&self) -> DbTerm {
        self.to_db_in(&mut Vec::new(), &mut Vec::new())
    }

    fn to_db_in(&self, env: &mut Vec<String>, tenv: &mut Vec<String>) -> DbTerm {
        match self {
            Term::Var(x) => match env.iter().rev().position(|b| b == x) {
                Some(i) => DbTerm::Bound(i),
                None => DbTerm::Free(x.clone()),
            },
            Term::Star => DbTerm::Star,
            Term::Abs(x, b) => {
                env.push(x.clone());
                let inner = b.to_db_in(env, tenv);
                env.pop();
                DbTerm::Abs(Box::new(inner))
            }
            Term::App(f, a) => DbTerm::App(Box::new(f.to_db_in(env, tenv)), Box::new(a.to_db_in(env, tenv))),
            Term::TyAbs(x, b) => {
                tenv.push(x.clone());
                let inner = b.to_db_in(env, tenv);
                tenv.pop();
                DbTerm::TyAbs(Box::new(inner))
            }
            Term::TyApp(t, a) => {
                let mut scratch = tenv.clone();
                DbTerm::TyApp(Box::new(t.to_db_in(env, tenv)), a.to_db_in(&mut scratch))
            }
        }
    }
}

/// Nameless terms; term and type binders are counted separately.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DbTerm {
    Free(String),
    Bound(usize),
    Abs(Box<DbTerm>),
    App(Box<DbTerm>, Box<DbTerm>),
    TyAbs(Box<DbTerm>),
    TyApp(Box<DbTerm>, DbType),
    Star,
}

pub fn alpha_eq_terms(a: &Term, b: &Term) -> bool {
    a.alpha_eq(b)
}

// ---------------------------------------------------------------------------
// Barendregt renaming
// ---------------------------------------------------------------------------

/// Give every type binder a name distinct from all free names and from every
/// other binder.  `used` is extended with the names handed out.
pub fn barendregt_rename_type_in(a: &Type, used: &mut BTreeSet<String>) -> Type {
    fn go(a: &Type, env: &BTreeMap<String, String>, used: &mut BTreeSet<String>) -> Type {
        match a {
            Type::Var(x) => Type::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Type::Club => Type::Club,
            Type::Arrow(l, r) => Type::arrow(go(l, env, used), go(r, env, used)),
            Type::Forall(x, body) => {
                let name = fresh_name(x, used);
                used.insert(name.clone());
                let mut env2 = env.clone();
                env2.insert(x.clone(), name.clone());
                Type::forall(name, go(body, &env2, used))
            }
        }
    }
    used.extend(a.free_vars());
    go(a, &BTreeMap::new(), used)
}

pub fn barendregt_rename_type(a: &Type) -> Type {
    barendregt_rename_type_in(a, &mut BTreeSet::new())
}

/// Rename all term and type binders of `t` apart from each other and from the
/// free names of `t`.
pub fn barendregt_rename(t: &Term) -> Term {
    let mut used = t.free_vars();
    let mut tused = t.free_type_vars();
    barendregt_rename_in(t, &mut used, &mut tused)
}

/// As [`barendregt_rename`], threading the sets of names already in use.
pub fn barendregt_rename_in(t: &Term, used: &mut BTreeSet<String>, tused: &mut BTreeSet<String>) -> Term {
    fn go(
        t: &Term,
        env: &BTreeMap<String, String>,
        tenv: &BTreeMap<String, String>,
        used: &mut BTreeSet<String>,
        tused: &mut BTreeSet<String>,
    ) -> Term {
        match t {
            Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::Star => Term::Star,
            Term::Abs(x, b) => {
                let name = fresh_name(x, used);
                used.insert(name.clone());
                let mut env2 = env.clone();
                env2.insert(x.clone(), name.clone());
                Term::abs(name, go(b, &env2, tenv, used, tused))
            }
            Term::App(f, a) => Term::app(go(f, env, tenv, used, tused), go(a, env, tenv, used, tused)),
            Term::TyAbs(x, b) => {
                let name = fresh_name(x, tused);
                tused.insert(name.clone());
                let mut tenv2 = tenv.clone();
                tenv2.insert(x.clone(), name.clone());
                Term::ty_abs(name, go(b, env, &tenv2, used, tused))
            }
            Term::TyApp(inner, a) => {
                let a = a.subst_many(
                    &tenv
                        .iter()
                        .map(|(k, v)| (k.clone(), Type::Var(v.clone())))
                        .collect(),
                );
                let a = barendregt_rename_type_in(&a, tused);
                Term::ty_app(go(inner, env, tenv, used, tused), a)
            }
        }
    }
    used.extend(t.free_vars());
    tused.extend(t.free_type_vars());
    go(t, &BTreeMap::new(), &BTreeMap::new(), used, tused)
}

// ---------------------------------------------------------------------------
// Typing contexts
// ---------------------------------------------------------------------------

impl TypingContext {
    pub fn new() -> Self {
        TypingContext(BTreeMap::new())
    }

    pub fn with(mut self, x: impl Into<String>, a: Type) -> Self {
        self.0.insert(x.into(), a);
        self
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: impl Into<String>, a: Type) {
        self.0.insert(x.into(), a);
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        self.0.values().flat_map(|a| a.free_vars()).collect()
    }

    pub fn erase(&self) -> BTreeMap<String, SimpleType> {
        self.0.iter().map(|(k, v)| (k.clone(), v.erase())).collect()
    }

    /// Parse `{"x": "forall X. X -> X", ...}`.
    pub fn from_json_str(text: &str) -> Result<Self, ContextError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| ContextError::Json(e.to_string()))?;
        let mut ctx = TypingContext::new();
        for (k, v) in raw {
            if !is_identifier(&k) {
                return Err(ContextError::BadVariable(k));
            }
            let a = parse_type(&v).map_err(|e| ContextError::Type(k.clone(), e))?;
            ctx.insert(k, a);
        }
        Ok(ctx)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.to_string())))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("context is not a JSON object of strings: {0}")]
    Json(String),
    #[error("`{0}` is not a valid term variable")]
    BadVariable(String),
    #[error("type of `{0}`: {1}")]
    Type(String, ParseError),
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Forall,
    Hash,
    Star,
    Lambda,
    BigLambda,
    Dot,
    Arrow,
    FatArrow,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|p| p.1);
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '#' | '♣' => out.push((Tok::Hash, pos)),
            '*' | '★' => out.push((Tok::Star, pos)),
            'λ' => out.push((Tok::Lambda, pos)),
            'Λ' => out.push((Tok::BigLambda, pos)),
            '∀' => out.push((Tok::Forall, pos)),
            '→' => out.push((Tok::Arrow, pos)),
            '⇒' => out.push((Tok::FatArrow, pos)),
            '.' => out.push((Tok::Dot, pos)),
            ',' => out.push((Tok::Comma, pos)),
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '[' => out.push((Tok::LBracket, pos)),
            ']' => out.push((Tok::RBracket, pos)),
            '\\' => out.push((Tok::Lambda, pos)),
            '/' if next == Some('\\') => {
                out.push((Tok::BigLambda, pos));
                i += 1;
            }
            '-' if next == Some('>') => {
                out.push((Tok::Arrow, pos));
                i += 1;
            }
            '=' if next == Some('>') => {
                out.push((Tok::FatArrow, pos));
                i += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() {
                    let d = chars[i].1;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let end = chars.get(i).map(|p| p.0).unwrap_or(text.len());
                let word = &text[chars[start].0..end];
                if word == "forall" {
                    out.push((Tok::Forall, pos));
                } else {
                    out.push((Tok::Ident(word.to_string()), pos));
                }
                continue;
            }
            other => return Err(ParseError::new(pos, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(out)
}

pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.offset(), msg)
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    pub(crate) fn parse_type(&mut self) -> Result<Type, ParseError> {
        if self.peek() == Some(&Tok::Forall) {
            self.bump();
            let mut vars = vec![self.ident()?];
            while let Some(Tok::Ident(_)) = self.peek() {
                vars.push(self.ident()?);
            }
            self.expect(Tok::Dot, "`.` after quantified variables")?;
            let body = self.parse_type()?;
            return Ok(Type::foralls(&vars, body));
        }
        let left = self.parse_type_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let right = self.parse_type()?;
            Ok(Type::arrow(left, right))
        } else {
            Ok(left)
        }
    }

    fn parse_type_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Type::Var(self.ident()?)),
            Some(Tok::Hash) => {
                self.bump();
                Ok(Type::Club)
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.parse_type()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error("expected a type")),
        }
    }

    fn parse_term(&mut self, style: Style) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Lambda) => {
                self.bump();
                let mut vars = vec![self.ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    vars.push(self.ident()?);
                }
                self.expect(Tok::Dot, "`.` after abstracted variables")?;
                let body = self.parse_term(style)?;
                Ok(Term::abss(&vars, body))
            }
            Some(Tok::BigLambda) => {
                if style == Style::Curry {
                    return Err(self.error("type abstraction is not allowed in a Curry-style term"));
                }
                self.bump();
                let mut vars = vec![self.ident()?];
                while let Some(Tok::Ident(_)) = self.peek() {
                    vars.push(self.ident()?);
                }
                self.expect(Tok::Dot, "`.` after type variables")?;
                let body = self.parse_term(style)?;
                Ok(vars.iter().rev().fold(body, |acc, v| Term::ty_abs(v.clone(), acc)))
            }
            _ => self.parse_spine(style),
        }
    }

    fn parse_spine(&mut self, style: Style) -> Result<Term, ParseError> {
        let mut head = self.parse_term_atom(style)?;
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) | Some(Tok::Star) | Some(Tok::LParen) => {
                    let arg = self.parse_term_atom(style)?;
                    head = Term::app(head, arg);
                }
                Some(Tok::Lambda) | Some(Tok::BigLambda) => {
                    let arg = self.parse_term(style)?;
                    head = Term::app(head, arg);
                    break;
                }
                Some(Tok::LBracket) => {
                    if style == Style::Curry {
                        return Err(self.error("type application is not allowed in a Curry-style term"));
                    }
                    self.bump();
                    let a = self.parse_type()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    head = Term::ty_app(head, a);
                }
                _ => break,
            }
        }
        Ok(head)
    }

    fn parse_term_atom(&mut self, style: Style) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Term::Var(self.ident()?)),
            Some(Tok::Star) => {
                self.bump();
                Ok(Term::Star)
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.parse_term(style)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.parse_type()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_term(text: &str, style: Style) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.parse_term(style)?;
    p.finish()?;
    Ok(t)
}

/// Parse either style: Church constructs are accepted.
pub fn parse_any_term(text: &str) -> Result<Term, ParseError> {
    parse_term(text, Style::Church)
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Var(x) => write!(f, "{x}"),
            Type::Club => write!(f, "#"),
            Type::Arrow(a, b) => {
                match **a {
                    Type::Arrow(..) | Type::Forall(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " -> {b}")
            }
            Type::Forall(..) => {
                let (vars, body) = self.split_prefix();
                write!(f, "forall {}. {body}", vars.join(" "))
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Arrow(a, b) => match **a {
                SimpleType::Arrow(..) => write!(f, "({a}) -> {b}"),
                SimpleType::Base => write!(f, "{a} -> {b}"),
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Abs(..) => {
                let mut vars = Vec::new();
                let mut t = self;
                while let Term::Abs(x, b) = t {
                    vars.push(x.as_str());
                    t = b;
                }
                write!(f, "\\{}. {t}", vars.join(" "))
            }
            Term::TyAbs(x, b) => write!(f, "/\\{x}. {b}"),
            _ => fmt_spine(self, f),
        }
    }
}

fn fmt_spine(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Star => write!(f, "*"),
        Term::App(fun, arg) => {
            fmt_head(fun, f)?;
            write!(f, " ")?;
            match **arg {
                Term::Var(_) | Term::Star => write!(f, "{arg}"),
                _ => write!(f, "({arg})"),
            }
        }
        Term::TyApp(fun, a) => {
            fmt_head(fun, f)?;
            write!(f, " [{a}]")
        }
        Term::Abs(..) | Term::TyAbs(..) => write!(f, "({t})"),
    }
}

fn fmt_head(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Abs(..) | Term::TyAbs(..) => write!(f, "({t})"),
        _ => fmt_spine(t, f),
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k} : {v}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    fn curry(s: &str) -> Term {
        parse_term(s, Style::Curry).unwrap()
    }

    #[test]
    fn parses_identity_type() {
        assert_eq!(
            ty("forall X. X -> X"),
            Type::forall("X", Type::arrow(Type::var("X"), Type::var("X")))
        );
        assert_eq!(ty("#"), Type::Club);
    }

    #[test]
    fn parses_nat() {
        let nat = ty("forall X. (X->X) -> X -> X");
        let x = Type::var("X");
        let expected = Type::forall(
            "X",
            Type::arrow(Type::arrow(x.clone(), x.clone()), Type::arrow(x.clone(), x)),
        );
        assert_eq!(nat, expected);
    }

    #[test]
    fn multi_binder_forall_desugars() {
        assert_eq!(ty("forall X Y. X"), ty("forall X. forall Y. X"));
    }

    #[test]
    fn parses_church_two_and_self_application() {
        let two = curry("\\f x. f (f x)");
        let expected = Term::abs(
            "f",
            Term::abs("x", Term::app(Term::var("f"), Term::app(Term::var("f"), Term::var("x")))),
        );
        assert_eq!(two, expected);
        assert_eq!(
            curry("\\x. x x"),
            Term::abs("x", Term::app(Term::var("x"), Term::var("x")))
        );
    }

    #[test]
    fn church_constructs() {
        let t = parse_term("/\\X. \\x. x", Style::Church).unwrap();
        assert_eq!(t, Term::ty_abs("X", Term::abs("x", Term::var("x"))));
        assert!(parse_term("/\\X. \\x. x", Style::Curry).is_err());
        assert!(parse_term("x [X]", Style::Curry).is_err());
        let app = parse_term("x [X] y", Style::Church).unwrap();
        assert_eq!(
            app,
            Term::app(Term::ty_app(Term::var("x"), Type::var("X")), Term::var("y"))
        );
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_type("X -> ").unwrap_err();
        assert_eq!(err.position, 5);
        let err = parse_term("\\x x", Style::Curry).unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn erasure_examples() {
        let o = SimpleType::Base;
        let oo = SimpleType::arrow(o.clone(), o.clone());
        assert_eq!(erase_types(&ty("forall X. X -> X")), oo);
        assert_eq!(
            erase_types(&ty("forall X. (X->X) -> X -> X")),
            SimpleType::arrow(oo.clone(), oo.clone())
        );
        assert_eq!(erase_types(&ty("X -> forall Y. Y")), oo);
        assert_eq!(erase_types(&Type::Club), o);
    }

    #[test]
    fn alpha_equivalence_examples() {
        assert!(alpha_eq(&ty("forall X. X"), &ty("forall Y. Y")));
        assert!(!alpha_eq(&ty("forall X. X -> Y"), &ty("forall Y. Y -> Y")));
        assert!(curry("\\x. x").alpha_eq(&curry("\\y. y")));
        assert!(!curry("\\x. y").alpha_eq(&curry("\\y. y")));
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(substitute(&ty("X -> X"), "X", &ty("Y")), ty("Y -> Y"));
        let s = substitute(&ty("forall Y. X -> Y"), "X", &ty("Y"));
        assert!(alpha_eq(&s, &ty("forall Z. Y -> Z")));
        assert!(!alpha_eq(&s, &ty("forall Z. Z -> Z")));
        assert_eq!(substitute(&ty("forall X. X"), "X", &ty("Y")), ty("forall X. X"));
    }

    #[test]
    fn term_substitution_avoids_capture() {
        let t = curry("\\y. x y");
        let s = t.subst("x", &curry("y"));
        assert!(s.alpha_eq(&curry("\\z. y z")));
        let church = parse_term("/\\Y. x [Y]", Style::Church).unwrap();
        let u = parse_term("z [Y]", Style::Church).unwrap();
        let s = church.subst("x", &u);
        let expected = parse_term("/\\W. z [Y] [W]", Style::Church).unwrap();
        assert!(s.alpha_eq(&expected));
    }

    #[test]
    fn barendregt_examples() {
        let t = barendregt_rename(&curry("\\x. \\x. x"));
        assert_eq!(t.to_string(), "\\x x'. x'");
        let a = barendregt_rename_type(&ty("forall X. (forall X. X) -> X"));
        assert_eq!(a.to_string(), "forall X. (forall X'. X') -> X");
        assert_eq!(barendregt_rename(&curry("\\x. x")), curry("\\x. x"));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "forall X. X -> X",
            "(forall X. X) -> Y",
            "((A -> B) -> C) -> D",
            "forall X Y. (X -> Y) -> #",
        ] {
            assert_eq!(ty(s).to_string(), s);
        }
        for s in ["\\x y. x y", "f (\\x. x) y", "(\\x. x) (\\y. y)", "f (g x) *"] {
            assert_eq!(curry(s).to_string(), s);
        }
        let c = parse_term("/\\X. \\x. x [X] (y [X -> X])", Style::Church).unwrap();
        assert_eq!(parse_term(&c.to_string(), Style::Church).unwrap(), c);
    }

    #[test]
    fn context_from_json() {
        let ctx = TypingContext::from_json_str(r#"{"x": "forall X. X -> X", "y": "Y"}"#).unwrap();
        assert_eq!(ctx.get("y"), Some(&Type::var("Y")));
        assert!(TypingContext::from_json_str(r#"{"x": "->"}"#).is_err());
    }
}
