//! Sums and products in second-order λ-calculus.
//!
//! The impredicative destructors instantiate with arbitrary types.  The
//! predicative ones go through instantiation-overflow contexts, which only
//! ever instantiate with type variables (or ♣).

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{fresh_name, Term, Type};

/// A term with one hole, represented by a reserved free variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermContext {
    pub hole: String,
    pub body: Term,
}

/// Name of the hole variable; not a valid identifier, so it cannot clash.
pub const HOLE: &str = "[ ]";

impl TermContext {
    pub fn hole() -> TermContext {
        TermContext {
            hole: HOLE.to_string(),
            body: Term::var(HOLE),
        }
    }

    /// `K[t]`, renaming binders of `K` away from the free variables of `t`.
    pub fn fill(&self, t: &Term) -> Term {
        self.body.subst(&self.hole, t)
    }
}

impl fmt::Display for TermContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

fn names_of(types: &[&Type]) -> BTreeSet<String> {
    types.iter().flat_map(|t| t.all_names()).collect()
}

/// `A +~ B = ∀X. (A ⇒ X) ⇒ (B ⇒ X) ⇒ X`
pub fn sum_type(a: &Type, b: &Type) -> Type {
    let x = fresh_name("X", &names_of(&[a, b]));
    let xv = Type::var(x.clone());
    Type::forall(
        x,
        Type::arrows(
            vec![Type::arrow(a.clone(), xv.clone()), Type::arrow(b.clone(), xv.clone())],
            xv,
        ),
    )
}

/// `A ×~ B = ∀X. (A ⇒ B ⇒ X) ⇒ X`
pub fn prod_type(a: &Type, b: &Type) -> Type {
    let x = fresh_name("X", &names_of(&[a, b]));
    let xv = Type::var(x.clone());
    Type::forall(x, Type::arrow(Type::arrows(vec![a.clone(), b.clone()], xv.clone()), xv))
}

fn term_avoid(ts: &[&Term]) -> BTreeSet<String> {
    ts.iter().flat_map(|t| t.all_vars()).collect()
}

fn type_avoid(ts: &[&Term], tys: &[&Type]) -> BTreeSet<String> {
    let mut out = names_of(tys);
    for t in ts {
        out.extend(t.all_type_names());
    }
    out
}

/// `ι_i(t) = ΛX. λf. λg. f t` (or `g t`).
pub fn inj(i: u8, t: &Term, a: &Type, b: &Type) -> Term {
    assert!(i == 1 || i == 2, "injection index must be 1 or 2");
    let avoid = term_avoid(&[t]);
    let f = fresh_name("f", &avoid);
    let g = fresh_name("g", &avoid);
    let x = fresh_name("X", &type_avoid(&[t], &[a, b]));
    let chosen = if i == 1 { &f } else { &g };
    let body = Term::app(Term::var(chosen.clone()), t.clone());
    Term::ty_abs(x, Term::abss(&[f, g], body))
}

/// `⟨t, u⟩ = ΛX. λf. f t u`
pub fn pair(t: &Term, u: &Term, a: &Type, b: &Type) -> Term {
    let f = fresh_name("f", &term_avoid(&[t, u]));
    let x = fresh_name("X", &type_avoid(&[t, u], &[a, b]));
    Term::ty_abs(x, Term::abs(f.clone(), Term::apps(Term::var(f), vec![t.clone(), u.clone()])))
}

/// `π_1(t) = t A (λx. λy. x)`, `π_2(t) = t B (λx. λy. y)`
pub fn proj(i: u8, t: &Term, a: &Type, b: &Type) -> Term {
    assert!(i == 1 || i == 2, "projection index must be 1 or 2");
    let witness = if i == 1 { a } else { b };
    let selector = if i == 1 {
        Term::abss(&["x", "y"], Term::var("x"))
    } else {
        Term::abss(&["x", "y"], Term::var("y"))
    };
    Term::app(Term::ty_app(t.clone(), witness.clone()), selector)
}

/// `Case_C(t, x.u, x.v) = t C (λx.u) (λx.v)`
pub fn case_impredicative(t: &Term, left: (&str, &Term), right: (&str, &Term), c: &Type) -> Term {
    Term::apps(
        Term::ty_app(t.clone(), c.clone()),
        vec![Term::abs(left.0, left.1.clone()), Term::abs(right.0, right.1.clone())],
    )
}

/// `IO⁺_C[ ] : A +~ B ⊢ (A ⇒ C) ⇒ (B ⇒ C) ⇒ C`
pub fn io_plus_context(a: &Type, b: &Type, c: &Type) -> TermContext {
    let avoid = names_of(&[a, b]);
    TermContext {
        hole: HOLE.to_string(),
        body: io_plus(c, &avoid),
    }
}

/// `IO×_C[ ] : A ×~ B ⊢ (A ⇒ B ⇒ C) ⇒ C`
pub fn io_times_context(a: &Type, b: &Type, c: &Type) -> TermContext {
    let avoid = names_of(&[a, b]);
    TermContext {
        hole: HOLE.to_string(),
        body: io_times(c, &avoid),
    }
}

fn fresh_binder(y: &str, avoid: &BTreeSet<String>) -> String {
    if avoid.contains(y) {
        fresh_name(y, avoid)
    } else {
        y.to_string()
    }
}

fn io_plus(c: &Type, avoid: &BTreeSet<String>) -> Term {
    let v = Term::var;
    match c {
        Type::Var(_) | Type::Club => Term::ty_app(v(HOLE), c.clone()),
        Type::Arrow(_, c2) => {
            let inner = io_plus(c2, avoid);
            let body = Term::apps(
                inner,
                vec![
                    Term::abs("z", Term::apps(v("f"), vec![v("z"), v("y")])),
                    Term::abs("z", Term::apps(v("g"), vec![v("z"), v("y")])),
                ],
            );
            Term::abss(&["f", "g", "y"], body)
        }
        Type::Forall(y, c1) => {
            // Rename the bound variable when it would capture a free name of A or B.
            let y2 = fresh_binder(y, avoid);
            let c1 = c1.subst(y, &Type::var(y2.clone()));
            let mut avoid2 = avoid.clone();
            avoid2.insert(y2.clone());
            let inner = io_plus(&c1, &avoid2);
            let yv = Type::var(y2.clone());
            let body = Term::apps(
                inner,
                vec![
                    Term::abs("z", Term::ty_app(Term::app(v("f"), v("z")), yv.clone())),
                    Term::abs("z", Term::ty_app(Term::app(v("g"), v("z")), yv)),
                ],
            );
            Term::abss(&["f", "g"], Term::ty_abs(y2, body))
        }
    }
}

fn io_times(c: &Type, avoid: &BTreeSet<String>) -> Term {
    let v = Term::var;
    match c {
        Type::Var(_) | Type::Club => Term::ty_app(v(HOLE), c.clone()),
        Type::Arrow(_, c2) => {
            let inner = io_times(c2, avoid);
            let body = Term::app(
                inner,
                Term::abss(&["z", "w"], Term::apps(v("f"), vec![v("z"), v("w"), v("y")])),
            );
            Term::abss(&["f", "y"], body)
        }
        Type::Forall(y, c1) => {
            let y2 = fresh_binder(y, avoid);
            let c1 = c1.subst(y, &Type::var(y2.clone()));
            let mut avoid2 = avoid.clone();
            avoid2.insert(y2.clone());
            let inner = io_times(&c1, &avoid2);
            let body = Term::app(
                inner,
                Term::abss(
                    &["z", "w"],
                    Term::ty_app(Term::apps(v("f"), vec![v("z"), v("w")]), Type::var(y2.clone())),
                ),
            );
            Term::abs("f", Term::ty_abs(y2, body))
        }
    }
}

/// `IO⁺_C[t] (λx.u) (λx.v)`
pub fn case_predicative(t: &Term, left: (&str, &Term), right: (&str, &Term), a: &Type, b: &Type, c: &Type) -> Term {
    Term::apps(
        io_plus_context(a, b, c).fill(t),
        vec![Term::abs(left.0, left.1.clone()), Term::abs(right.0, right.1.clone())],
    )
}

/// `IO×_C[t] (λx.λy.u)`
pub fn split_predicative(t: &Term, vars: (&str, &str), u: &Term, a: &Type, b: &Type, c: &Type) -> Term {
    Term::app(
        io_times_context(a, b, c).fill(t),
        Term::abss(&[vars.0, vars.1], u.clone()),
    )
}

/// Every type application in `t` whose witness is not a type variable or ♣.
pub fn non_atomic_witnesses(t: &Term) -> Vec<Type> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<Type>) {
        match t {
            Term::Var(_) | Term::Star => {}
            Term::Abs(_, b) | Term::TyAbs(_, b) => go(b, out),
            Term::App(f, a) => {
                go(f, out);
                go(a, out);
            }
            Term::TyApp(f, a) => {
                if !a.is_atomic() {
                    out.push(a.clone());
                }
                go(f, out);
            }
        }
    }
    go(t, &mut out);
    out
}

pub fn is_witness_atomic(t: &Term) -> bool {
    non_atomic_witnesses(t).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{beta_normalize, betaeta_equal, Fuel};
    use crate::syntax::parse_type;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn nf(t: &Term) -> Term {
        beta_normalize(&t.erase(), Fuel::default()).unwrap()
    }

    #[test]
    fn encoded_types() {
        assert!(sum_type(&ty("A"), &ty("B")).alpha_eq(&ty("forall X. (A -> X) -> (B -> X) -> X")));
        assert!(prod_type(&ty("A"), &ty("B")).alpha_eq(&ty("forall X. (A -> B -> X) -> X")));
        let s = sum_type(&ty("X"), &ty("B"));
        let (vars, _) = s.split_prefix();
        assert_ne!(vars[0], "X");
    }

    #[test]
    fn impredicative_beta_laws() {
        let (a, b) = (ty("A"), ty("B"));
        let p = pair(&v("a"), &v("b"), &a, &b);
        assert!(nf(&proj(1, &p, &a, &b)).alpha_eq(&v("a")));
        assert!(nf(&proj(2, &p, &a, &b)).alpha_eq(&v("b")));
        let i = inj(1, &v("a"), &a, &b);
        let c = case_impredicative(&i, ("x", &Term::app(v("u"), v("x"))), ("x", &v("x")), &ty("C"));
        assert!(nf(&c).alpha_eq(&Term::app(v("u"), v("a"))));
    }

    #[test]
    fn base_clause() {
        let k = io_plus_context(&ty("A"), &ty("B"), &ty("X"));
        assert_eq!(k.body, Term::ty_app(v(HOLE), ty("X")));
        assert_eq!(io_times_context(&ty("A"), &ty("B"), &ty("X")).body, k.body);
        // At a variable, the predicative Case is the impredicative one.
        let u = Term::app(v("f"), v("x"));
        assert_eq!(
            case_predicative(&v("y"), ("x", &u), ("x", &u), &ty("A"), &ty("B"), &ty("X")),
            case_impredicative(&v("y"), ("x", &u), ("x", &u), &ty("X"))
        );
    }

    #[test]
    fn arrow_and_forall_clauses() {
        let k = io_plus_context(&ty("A"), &ty("B"), &ty("X -> Y"));
        assert_eq!(k.to_string(), "\\f g y. [ ] [Y] (\\z. f z y) (\\z. g z y)");
        let q = io_plus_context(&ty("A"), &ty("B"), &ty("forall Y. Y"));
        assert_eq!(q.to_string(), "\\f g. /\\Y. [ ] [Y] (\\z. f z [Y]) (\\z. g z [Y])");
        let captured = io_plus_context(&ty("Y"), &ty("B"), &ty("forall Y. Y"));
        assert!(!captured.to_string().contains("/\\Y."));
        assert!(is_witness_atomic(&q.body));
    }

    #[test]
    fn predicative_beta_laws() {
        let (a, b) = (ty("A"), ty("B"));
        for c in ["X", "X -> Y", "forall Y. Y -> Y", "(X -> X) -> forall Z. Z"] {
            let c = ty(c);
            let i = inj(1, &v("a"), &a, &b);
            let case = case_predicative(&i, ("x", &Term::app(v("u"), v("x"))), ("x", &v("w")), &a, &b, &c);
            assert!(is_witness_atomic(&case));
            assert!(betaeta_equal(&case.erase(), &Term::app(v("u"), v("a")), Fuel::default()).unwrap());
            let p = pair(&v("a"), &v("b"), &a, &b);
            let split = split_predicative(&p, ("x", "y"), &v("x"), &a, &b, &a);
            assert!(betaeta_equal(&split.erase(), &v("a"), Fuel::default()).unwrap());
            let split_c = split_predicative(&p, ("x", "y"), &Term::apps(v("h"), vec![v("x"), v("y")]), &a, &b, &c);
            assert!(is_witness_atomic(&split_c));
            assert!(betaeta_equal(&split_c.erase(), &Term::apps(v("h"), vec![v("a"), v("b")]), Fuel::default()).unwrap());
        }
    }

    #[test]
    fn fill_avoids_capture() {
        let k = io_plus_context(&ty("A"), &ty("B"), &ty("X -> Y"));
        let filled = k.fill(&v("f"));
        let Term::Abs(outer, _) = &filled else { panic!() };
        assert_ne!(outer, "f");
        assert!(filled.free_vars().contains("f"));
    }
}
