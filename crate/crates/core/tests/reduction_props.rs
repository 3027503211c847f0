mod common;

use common::gen::{closed_terms_upto, judgments, principal};
use fatcheck::fou::{fo_unify, FoProblem, FoTerm};
use fatcheck::reduction::{beta_normalize, beta_normalize_innermost, church_numeral, read_numeral, Fuel};
use fatcheck::syntax::Term;
use fatcheck::typecheck::check;
use proptest::prelude::*;

/// Closed simply typable terms, and typable applications of pairs of them.
fn typable_corpus() -> Vec<Term> {
    let base: Vec<Term> = closed_terms_upto(7).into_iter().filter(|t| principal(t).is_some()).collect();
    let mut out = base.clone();
    for (i, f) in base.iter().enumerate().step_by(3) {
        for a in base.iter().skip(i % 5).step_by(5) {
            let t = Term::app(f.clone(), a.clone());
            if principal(&t).is_some() {
                out.push(t);
            }
        }
    }
    out
}

#[test]
fn outermost_and_innermost_agree() {
    let corpus = typable_corpus();
    assert!(corpus.len() > 300, "{}", corpus.len());
    let redexes = corpus.iter().filter(|t| matches!(t, Term::App(f, _) if matches!(**f, Term::Abs(..)))).count();
    assert!(redexes > 50);
    for t in &corpus {
        let a = beta_normalize(t, Fuel::default()).unwrap();
        let b = beta_normalize_innermost(t, Fuel::default()).unwrap();
        assert!(a.alpha_eq(&b), "{t}: {a} vs {b}");
    }
}

#[test]
fn numerals_read_back() {
    for n in 0..200 {
        assert_eq!(read_numeral(&church_numeral(n)).unwrap(), n);
    }
}

#[test]
fn accepted_terms_normalize_within_budget() {
    let fuel = Fuel::new(10_000_000);
    let mut accepted = 0;
    for (ctx, t, a) in judgments(5, 7, 150, 2) {
        if check(&ctx, &t, &a).is_accept() {
            accepted += 1;
            beta_normalize(&t, fuel).unwrap();
        }
    }
    assert!(accepted > 30);
}

fn arb_fo() -> impl Strategy<Value = FoTerm> {
    let leaf = prop_oneof![
        3 => prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(FoTerm::var),
        1 => prop::sample::select(vec!["K", "L"]).prop_map(FoTerm::constant),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| (inner.clone(), inner).prop_map(|(l, r)| FoTerm::arrow(l, r)))
}

proptest! {
    #[test]
    fn fo_unifiers_are_idempotent_and_solve(eqs in prop::collection::vec((arb_fo(), arb_fo()), 1..5)) {
        let mut p = FoProblem::new();
        for (l, r) in eqs {
            p.push(l, r);
        }
        if let Ok(s) = fo_unify(&p) {
            prop_assert!(s.is_idempotent());
            prop_assert!(s.solves(&p));
        }
    }

    #[test]
    fn planted_fo_problems_are_solved(
        eqs in prop::collection::vec((arb_fo(), arb_fo()), 1..4),
        sigma in prop::collection::vec(arb_fo(), 4),
    ) {
        // Close `sigma` over ground terms so that it unifies every equation it is applied to.
        let ground: Vec<FoTerm> = sigma
            .iter()
            .map(|t| {
                let mut g = FoProblem::new();
                for v in t.vars() {
                    g.push(FoTerm::var(v), FoTerm::constant("K"));
                }
                let s = fo_unify(&g).unwrap();
                t.apply(&s)
            })
            .collect();
        let mut planted = FoProblem::new();
        for (i, v) in ["a", "b", "c", "d"].iter().enumerate() {
            planted.push(FoTerm::var(*v), ground[i].clone());
        }
        let s0 = fo_unify(&planted).unwrap();
        let mut p = FoProblem::new();
        for (l, r) in &eqs {
            let l2 = l.apply(&s0);
            p.push(l.clone(), l2.clone());
            p.push(r.clone(), r.apply(&s0));
        }
        prop_assert!(fo_unify(&p).is_ok());
    }
}
