//! Deterministic generators for judgments used across the test suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fatcheck::fou::{stlc_infer, FoTerm};
use fatcheck::syntax::{Term, Type, TypingContext};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All closed Curry terms of exactly `size` nodes, without ★.
pub fn closed_terms(size: usize) -> Vec<Term> {
    terms_in(size, &mut Vec::new())
}

fn terms_in(size: usize, scope: &mut Vec<String>) -> Vec<Term> {
    let mut out = Vec::new();
    if size == 0 {
        return out;
    }
    if size == 1 {
        for x in scope.iter() {
            out.push(Term::var(x.clone()));
        }
        return out;
    }
    let x = format!("x{}", scope.len() + 1);
    scope.push(x.clone());
    for body in terms_in(size - 1, scope) {
        out.push(Term::abs(x.clone(), body));
    }
    scope.pop();
    for left in 1..size - 1 {
        let right = size - 1 - left;
        let fs = terms_in(left, scope);
        if fs.is_empty() {
            continue;
        }
        let args = terms_in(right, scope);
        for f in &fs {
            if matches!(f, Term::Abs(..)) {
                continue;
            }
            for a in &args {
                out.push(Term::app(f.clone(), a.clone()));
            }
        }
    }
    out
}

/// Closed terms of size at most `max`, in order of size.
pub fn closed_terms_upto(max: usize) -> Vec<Term> {
    (1..=max).flat_map(closed_terms).collect()
}

pub fn fo_to_type(t: &FoTerm) -> Type {
    match t {
        FoTerm::Var(v) | FoTerm::Const(v) => Type::Var(v.to_uppercase()),
        FoTerm::Arrow(a, b) => Type::arrow(fo_to_type(a), fo_to_type(b)),
    }
}

/// The principal simple type of a closed term, over variables `A`, `B`, ...
pub fn principal(t: &Term) -> Option<Type> {
    stlc_infer(&Default::default(), t).ok().map(|f| fo_to_type(&f))
}

/// Insert quantifier prefixes of length at most `max_prefix` at random
/// arrow positions of `ty`, quantifying variables that occur below.
pub fn decorate(ty: &Type, rng: &mut ChaCha8Rng, max_prefix: usize, p: f64) -> Type {
    let inner = match ty {
        Type::Arrow(a, b) => Type::arrow(decorate(a, rng, max_prefix, p), decorate(b, rng, max_prefix, p)),
        other => other.clone(),
    };
    if max_prefix == 0 || !rng.gen_bool(p) {
        return inner;
    }
    let mut vars: Vec<String> = inner.free_vars().into_iter().collect();
    vars.shuffle(rng);
    let n = rng.gen_range(1..=max_prefix).min(vars.len());
    Type::foralls(&vars[..n], inner)
}

/// Replace one free variable by another, to produce near-miss judgments.
pub fn perturb(ty: &Type, rng: &mut ChaCha8Rng) -> Type {
    let vars: Vec<String> = ty.free_vars().into_iter().collect();
    let target = if vars.len() >= 2 && rng.gen_bool(0.5) {
        vars[rng.gen_range(0..vars.len())].clone()
    } else {
        "Q".to_string()
    };
    match vars.choose(rng) {
        Some(v) => ty.subst(v, &Type::Var(target)),
        None => ty.clone(),
    }
}

/// `(Γ, t, A)` with `Γ` empty.
pub type Judgment = (TypingContext, Term, Type);

/// Judgments over simply typable closed terms of size at most `max_size`:
/// decorations of the principal type, some of them perturbed, then closed
/// by an outer prefix when `close` is set.
pub fn judgments(seed: u64, max_size: usize, count: usize, max_prefix: usize) -> Vec<Judgment> {
    let mut r = rng(seed);
    let terms: Vec<(Term, Type)> = closed_terms_upto(max_size)
        .into_iter()
        .filter_map(|t| principal(&t).map(|a| (t, a)))
        .collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 50 {
        attempts += 1;
        let (t, a) = terms.choose(&mut r).unwrap().clone();
        let mut ty = decorate(&a, &mut r, max_prefix, 0.4);
        if r.gen_bool(0.3) {
            ty = perturb(&ty, &mut r);
        }
        let key = format!("{t} : {ty}");
        if seen.insert(key) {
            out.push((TypingContext::new(), t, ty));
        }
    }
    out
}

/// Open judgments: small neutral shapes whose free variables get decorated
/// simple types.
pub fn open_judgments(seed: u64, count: usize) -> Vec<Judgment> {
    const SHAPES: [&str; 10] = [
        "f x",
        "f (f x)",
        "f x x",
        "g f x",
        "\\y. f y",
        "f (\\y. y)",
        "g (f x)",
        "f g",
        "f * x",
        "g x *",
    ];
    let mut r = rng(seed);
    let mut out = Vec::new();
    for round in 0..count {
        let t = fatcheck::syntax::parse_any_term(SHAPES[round % SHAPES.len()]).unwrap();
        let free: Vec<String> = t.free_vars().into_iter().collect();
        let closed = Term::abss(&free, t.clone());
        let Ok(st) = stlc_infer(&Default::default(), &closed) else { continue };
        let mut ty = fo_to_type(&st);
        let mut ctx = TypingContext::new();
        for x in &free {
            let Type::Arrow(d, c) = ty else { break };
            ctx.insert(x.clone(), decorate(&d, &mut r, 2, 0.5));
            ty = *c;
        }
        let mut a = decorate(&ty, &mut r, 2, 0.5);
        if r.gen_bool(0.4) {
            a = perturb(&a, &mut r);
        }
        out.push((ctx, t, a));
    }
    out
}
