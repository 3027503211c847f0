mod common;

use std::collections::BTreeSet;

use common::gen::{closed_terms_upto, decorate, judgments, open_judgments, principal, rng, Judgment};
use common::oracle::{oracle_decide, OracleVerdict};
use fatcheck::fat_unify::{
    fat_unify_with, normalize_problem, phase1_cycle_check, reconstruct, simplify, simplify_with_limit, solve_simple_with, verify_unifier,
    SolveConfig, SolveOutcome,
};
use fatcheck::fou::stlc_typecheck;
use fatcheck::syntax::{barendregt_rename, barendregt_rename_type_in, parse_type, Term, Type, TypingContext};
use fatcheck::typecheck::{check, check_derivation, derivation_proves, gen_problem, Verdict};

/// One leftmost-outermost β-step, if any.
fn beta_step(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => {
            if let Term::Abs(x, b) = &**f {
                return Some(b.subst(x, a));
            }
            if let Some(f2) = beta_step(f) {
                return Some(Term::app(f2, (**a).clone()));
            }
            beta_step(a).map(|a2| Term::app((**f).clone(), a2))
        }
        Term::Abs(x, b) => beta_step(b).map(|b2| Term::abs(x.clone(), b2)),
        _ => None,
    }
}

fn corpus() -> Vec<Judgment> {
    (0..4).flat_map(|s| judgments(100 + s, 7, 120, 2)).collect()
}

#[test]
fn accepts_carry_valid_certificates_and_erase_soundly() {
    let mut accepted = 0;
    for (ctx, t, a) in corpus() {
        if let Verdict::Accept(d) = check(&ctx, &t, &a) {
            accepted += 1;
            assert!(check_derivation(&d), "{t} : {a}");
            assert!(derivation_proves(&d, &ctx, &t, &a), "{t} : {a}");
            assert!(stlc_typecheck(&ctx.erase(), &t, &a.erase()), "{t} : {a}");
        }
    }
    assert!(accepted >= 100, "{accepted}");
}

/// Redexes `(λx. b) u` among small typable terms, with decorated principal types.
fn redex_judgments() -> Vec<Judgment> {
    let base: Vec<Term> = closed_terms_upto(6).into_iter().filter(|t| principal(t).is_some()).collect();
    let abstractions: Vec<&Term> = base.iter().filter(|t| matches!(t, Term::Abs(..))).collect();
    let mut r = rng(77);
    let mut out = Vec::new();
    for (i, f) in abstractions.iter().enumerate() {
        for u in base.iter().skip(i % 3).step_by(4) {
            let t = Term::app((*f).clone(), u.clone());
            if let Some(a) = principal(&t) {
                for _ in 0..2 {
                    out.push((TypingContext::new(), t.clone(), decorate(&a, &mut r, 2, 0.4)));
                }
            }
        }
    }
    out
}

#[test]
fn beta_reduction_preserves_acceptance() {
    let mut checked = 0;
    for (ctx, t, a) in redex_judgments() {
        if checked >= 300 {
            break;
        }
        if !check(&ctx, &t, &a).is_accept() {
            continue;
        }
        let mut cur = t.clone();
        while let Some(next) = beta_step(&cur) {
            assert!(check(&ctx, &next, &a).is_accept(), "{t} : {a}, reduct {next}");
            cur = next;
            checked += 1;
        }
    }
    assert!(checked >= 100, "{checked}");
}

fn renamed_problem(ctx: &TypingContext, t: &Term, a: &Type) -> fatcheck::fat_unify::UnifProblem {
    let mut used: BTreeSet<String> = ctx.0.values().flat_map(|ty| ty.all_names()).collect();
    used.extend(a.all_names());
    let mut renamed = TypingContext::new();
    for (x, ty) in &ctx.0 {
        renamed.insert(x.clone(), barendregt_rename_type_in(ty, &mut used));
    }
    let a2 = barendregt_rename_type_in(a, &mut used);
    gen_problem(&renamed, &barendregt_rename(&t.erase()), &a2)
}

/// The configuration the checker uses for generated problems.
const CHECKER: SolveConfig = SolveConfig { allow_pins: false, node_limit: 500_000 };

fn solve(p: &fatcheck::fat_unify::UnifProblem) -> SolveOutcome {
    fat_unify_with(p, CHECKER, &mut |_| true).0
}

#[test]
fn returned_unifiers_verify() {
    let mut unifiers = 0;
    for (ctx, t, a) in corpus() {
        if !stlc_typecheck(&ctx.erase(), &t, &a.erase()) {
            continue;
        }
        let p = renamed_problem(&ctx, &t, &a);
        if let SolveOutcome::Unifier(s) = solve(&p) {
            unifiers += 1;
            assert!(verify_unifier(&p, &s), "{t} : {a}");
        }
    }
    assert!(unifiers >= 100);
}

/// Phase 1 rejects only judgments whose erasure is not simply typable, and
/// on such problems arrow elimination bounded by twice the number of arrows,
/// followed by the simple solver, finds no unifier either.
#[test]
fn phase1_rejections_have_no_unifier() {
    let terms: Vec<Term> = closed_terms_upto(7).into_iter().filter(|t| principal(t).is_none()).collect();
    let types = ["forall X. X -> X", "forall X. X", "(forall X. X -> X) -> forall X. X -> X", "A -> B"];
    let mut rejected = 0;
    for t in &terms {
        for a in types {
            let a = parse_type(a).unwrap();
            let p = renamed_problem(&TypingContext::new(), t, &a);
            if p.equations.len() > 12 || phase1_cycle_check(&normalize_problem(&p)).is_ok() {
                continue;
            }
            rejected += 1;
            assert!(!stlc_typecheck(&Default::default(), t, &a.erase()), "{t} : {a}");
            let arrows = p.to_json().to_string().matches("\"arrow\"").count();
            let Ok(simplified) = simplify_with_limit(&p, 2 * arrows) else { continue };
            let config = SolveConfig { allow_pins: true, node_limit: 200_000 };
            let (outcome, _) = solve_simple_with(&simplified.problem, config, &mut |s| {
                verify_unifier(&p, &reconstruct(&p, &simplified, &s))
            });
            assert!(!outcome.is_unifier(), "{t} : {a}");
        }
    }
    assert!(rejected >= 10, "{rejected}");
}

/// Derivable judgments yield solvable problems (the derivation is a planted
/// unifier), and arrow elimination keeps solvability in both directions.  The
/// oracle decides the original problem by brute force, so no size cut-off on
/// metavariables is needed.
#[test]
fn unifiability_matches_oracle_on_small_problems() {
    let mut derivable = 0;
    let mut small = 0;
    let small_corpus = open_judgments(3, 300).into_iter().chain(judgments(9, 4, 150, 2));
    for (ctx, t, a) in corpus().into_iter().chain(small_corpus) {
        let verdict = oracle_decide(&ctx, &t, &a);
        if verdict == OracleVerdict::OutOfBudget {
            continue;
        }
        let p = renamed_problem(&ctx, &t, &a);
        if verdict == OracleVerdict::Derivable {
            derivable += 1;
            assert!(solve(&p).is_unifier(), "{t} : {a}");
        }
        if p.meta_vars.len() <= 4 {
            small += 1;
        }
        let solvable = match simplify(&p) {
            Err(_) => false,
            Ok(simplified) => {
                let (outcome, _) = solve_simple_with(&simplified.problem, CHECKER, &mut |s| {
                    verify_unifier(&p, &reconstruct(&p, &simplified, &s))
                });
                outcome.is_unifier()
            }
        };
        let stlc = stlc_typecheck(&ctx.erase(), &t, &a.erase());
        assert_eq!(solvable && stlc, verdict == OracleVerdict::Derivable, "{t} : {a}");
    }
    assert!(derivable >= 100 && small >= 10, "{derivable} {small}");
}
