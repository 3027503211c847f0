mod common;

use common::corpus::numeric_terms;
use common::gen::rng;
use common::strategies::arb_plain_type;
use fatcheck::equivalence::{
    bounded_search, bounded_search_in, eval_numeric, extpoly_difference, extpoly_equal, extract_extpoly,
    monadic_to_type, parse_formula, translate_sequent, type_to_monadic, ExtPoly,
};
use fatcheck::reduction::Fuel;
use fatcheck::syntax::TypingContext;
use fatcheck::typecheck::check;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

fn random_tuple(r: &mut impl Rng, k: usize) -> Vec<u64> {
    (0..k).map(|_| r.gen_range(0..6)).collect()
}

fn extracted() -> Vec<(&'static str, usize, fatcheck::syntax::Term, ExtPoly)> {
    numeric_terms()
        .into_iter()
        .map(|(n, k, t)| {
            let p = extract_extpoly(&t, k).unwrap_or_else(|e| panic!("{n}: {e}"));
            (n, k, t, p)
        })
        .collect()
}

#[test]
fn extraction_matches_evaluation() {
    let mut r = rng(2024);
    for (name, k, t, p) in extracted() {
        for _ in 0..100 {
            let args = random_tuple(&mut r, k);
            let direct = eval_numeric(&t, &args, Fuel::default()).unwrap();
            assert_eq!(p.eval(&args), BigUint::from(direct), "{name} at {args:?}");
        }
    }
}

#[test]
fn equality_and_difference_are_consistent() {
    let all = extracted();
    let mut r = rng(99);
    let mut equal_pairs = 0;
    for (i, (n1, k1, t1, p1)) in all.iter().enumerate() {
        for (n2, k2, t2, p2) in &all[i + 1..] {
            if k1 != k2 {
                continue;
            }
            if extpoly_equal(p1, p2) {
                equal_pairs += 1;
                assert!(extpoly_difference(p1, p2).is_none());
                for _ in 0..100 {
                    let args = random_tuple(&mut r, *k1);
                    let a = eval_numeric(t1, &args, Fuel::default()).unwrap();
                    let b = eval_numeric(t2, &args, Fuel::default()).unwrap();
                    assert_eq!(a, b, "{n1} vs {n2} at {args:?}");
                }
            } else {
                let args = extpoly_difference(p1, p2).unwrap_or_else(|| panic!("{n1} vs {n2}: no tuple"));
                let a = eval_numeric(t1, &args, Fuel::default()).unwrap();
                let b = eval_numeric(t2, &args, Fuel::default()).unwrap();
                assert_ne!(a, b, "{n1} vs {n2} at {args:?}");
            }
        }
    }
    assert!(equal_pairs >= 1);
}

fn sequent_search(hyps: &[&str], goal: &str, depth: u32) -> Option<(fatcheck::syntax::Term, TypingContext, fatcheck::syntax::Type)> {
    let hyps: Vec<_> = hyps.iter().map(|h| parse_formula(h).unwrap()).collect();
    let (ctx, ty) = translate_sequent(&hyps, &parse_formula(goal).unwrap()).unwrap();
    bounded_search_in(&ctx, &ty, depth).map(|t| (t, ctx, ty))
}

#[test]
fn derivable_sequents_translate_to_inhabited_types() {
    let cases: [(&[&str], &str); 7] = [
        (&["r(a, b)"], "r(a, b)"),
        (&["forall a. r(a, a)"], "r(c, c)"),
        (&["forall a b. r(a, b) => r(b, a)"], "r(b, a) => r(a, b)"),
        (&["forall a b. r(a, b) => r(b, a)"], "forall c d. r(c, d) => r(d, c)"),
        (&[], "forall a. r(a, a) => r(a, a)"),
        (&["forall x y. r(x, y) => q(x, y)"], "r(a, b) => q(a, b)"),
        (&["forall a. (forall b. r(a, b) => bot) => bot", "forall a b. r(a, b) => bot"], "r(c, c) => bot"),
    ];
    for (hyps, goal) in cases {
        let (t, ctx, ty) = sequent_search(hyps, goal, 14).unwrap_or_else(|| panic!("no inhabitant for {goal}"));
        assert!(check(&ctx, &t, &ty).is_accept(), "{t} : {ty}");
    }
}

/// Instantiating a quantifier at a variable that occurs free only in the
/// assumptions needs `U(X)` hypotheses the translated context does not
/// provide.  These sequents are provable, yet bounded search finds nothing.
#[test]
fn assumption_variables_lack_u_hypotheses() {
    let cases: [(&[&str], &str); 2] = [
        (&["forall a b. r(a, b) => r(b, a)", "r(c, d)"], "r(d, c)"),
        (&["r(a, b)", "forall x y. r(x, y) => q(x, y)"], "q(a, b)"),
    ];
    for (hyps, goal) in cases {
        assert!(sequent_search(hyps, goal, 10).is_none(), "{goal}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_is_sound_deterministic_and_monotone(a in arb_plain_type(), depth in 1u32..5) {
        let found = bounded_search(&a, depth);
        prop_assert_eq!(found.clone(), bounded_search(&a, depth));
        if let Some(t) = found {
            prop_assert!(check(&TypingContext::new(), &t, &a).is_accept(), "{} : {}", t, a);
            prop_assert!(bounded_search(&a, depth + 1).is_some());
        }
    }

    #[test]
    fn monadic_round_trip(a in arb_plain_type()) {
        let phi = type_to_monadic(&a).unwrap();
        prop_assert_eq!(monadic_to_type(&phi).unwrap(), a.clone());
        let reparsed = parse_formula(&phi.to_string()).unwrap();
        prop_assert_eq!(type_to_monadic(&monadic_to_type(&reparsed).unwrap()).unwrap(), phi);
    }
}
