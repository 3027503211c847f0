//! The pair `u_A`, `v_A` of terms of type `(A* +~ ⊤~) ⇒ Bool` that can be
//! told apart by a Bool-valued context exactly when `A` is inhabited in the
//! extension with `♣` and `★ : ♣`.

use super::search::enumerate_inhabitants;
use super::EquivalenceError;
use crate::encodings::{inj, io_plus_context, sum_type, TermContext};
use crate::reduction::{betaeta_equal, bool_type, church_false, church_true, Fuel};
use crate::syntax::{fresh_name, Term, Type, TypingContext};
use crate::typecheck::{check, Verdict};

/// `⊤~ = ∀X. X ⇒ X`
pub fn top_type() -> Type {
    Type::forall("X", Type::arrow(Type::var("X"), Type::var("X")))
}

fn replace_club(a: &Type, y: &Type) -> Type {
    match a {
        Type::Club => y.clone(),
        Type::Var(_) => a.clone(),
        Type::Arrow(b, c) => Type::arrow(replace_club(b, y), replace_club(c, y)),
        Type::Forall(x, b) => Type::forall(x.clone(), replace_club(b, y)),
    }
}

/// `A* = Y ⇒ A[Y/♣]` for a `Y` not occurring in `A`.
pub fn star_type(a: &Type) -> Type {
    let y = Type::var(fresh_name("Y", &a.all_names()));
    Type::arrow(y.clone(), replace_club(a, &y))
}

/// `t[y/★]`
pub fn replace_star(t: &Term, y: &str) -> Term {
    match t {
        Term::Star => Term::var(y),
        Term::Var(_) => t.clone(),
        Term::Abs(x, b) => Term::abs(x.clone(), replace_star(b, y)),
        Term::App(f, a) => Term::app(replace_star(f, y), replace_star(a, y)),
        Term::TyAbs(x, b) => Term::ty_abs(x.clone(), replace_star(b, y)),
        Term::TyApp(f, a) => Term::ty_app(replace_star(f, y), a.clone()),
    }
}

fn church(b: Term) -> Term {
    Term::ty_abs("X", b)
}

#[derive(Clone, Debug)]
pub struct SeparatingPair {
    pub a_star: Type,
    /// `A* +~ ⊤~`
    pub argument: Type,
    pub u: Term,
    pub v: Term,
}

impl SeparatingPair {
    /// `(A* +~ ⊤~) ⇒ Bool`
    pub fn ty(&self) -> Type {
        Type::arrow(self.argument.clone(), bool_type())
    }
}

/// `u_A = λx. f̄` and `v_A = λx. IO⁺_Bool[x] (λx. t̄) (λx. f̄)`.
pub fn separating_pair(a: &Type) -> SeparatingPair {
    let a_star = star_type(a);
    let top = top_type();
    let argument = sum_type(&a_star, &top);
    let tt = church(church_true());
    let ff = church(church_false());
    let u = Term::abs("x", ff.clone());
    let io = io_plus_context(&a_star, &top, &bool_type());
    let v = Term::abs(
        "x",
        Term::apps(io.fill(&Term::var("x")), vec![Term::abs("x", tt), Term::abs("x", ff)]),
    );
    SeparatingPair { a_star, argument, u, v }
}

/// The same pair, used with Nat-valued contexts.
pub fn separating_pair_nat(a: &Type) -> SeparatingPair {
    separating_pair(a)
}

/// `K = [ ] (ι₁(t*))` with `t* = λy. t[y/★]`, for a closed inhabitant `t` of
/// `A`.  The returned context is checked to send `u_A` to `f̄` and `v_A` to
/// `t̄`.
pub fn separating_context(a: &Type, witness: &Term) -> Result<TermContext, EquivalenceError> {
    let free = witness.free_vars();
    if !free.is_empty() {
        let names: Vec<String> = free.into_iter().collect();
        return Err(EquivalenceError::WitnessRejected(format!("free variables {}", names.join(", "))));
    }
    match check(&TypingContext::new(), witness, a) {
        Verdict::Accept(_) => {}
        Verdict::Reject(r) => return Err(EquivalenceError::WitnessRejected(format!("{witness} : {a} rejected ({r})"))),
        Verdict::Undecided => {
            return Err(EquivalenceError::WitnessRejected(format!("{witness} : {a} undecided within the search budget")))
        }
    }
    let pair = separating_pair(a);
    let y = fresh_name("y", &witness.all_vars());
    let t_star = Term::abs(y.clone(), replace_star(witness, &y));
    let hole = TermContext::hole();
    let k = TermContext {
        body: Term::app(hole.body.clone(), inj(1, &t_star, &pair.a_star, &top_type())),
        hole: hole.hole,
    };
    let fuel = Fuel::from_env();
    let ku = k.fill(&pair.u).erase();
    let kv = k.fill(&pair.v).erase();
    if !betaeta_equal(&ku, &church_false(), fuel).map_err(|e| EquivalenceError::SeparationFailed(e.to_string()))? {
        return Err(EquivalenceError::SeparationFailed(format!("K[u_A] = {ku} is not false")));
    }
    if !betaeta_equal(&kv, &church_true(), fuel).map_err(|e| EquivalenceError::SeparationFailed(e.to_string()))? {
        return Err(EquivalenceError::SeparationFailed(format!("K[v_A] = {kv} is not true")));
    }
    Ok(k)
}

/// Up to `limit` β-normal η-long contexts `K` with
/// `K[ ] : (A* +~ ⊤~) ⇒ Bool ⊢ Bool`, of search depth at most `depth`.
pub fn enumerate_contexts(a: &Type, depth: u32, limit: usize) -> Vec<TermContext> {
    let pair = separating_pair(a);
    let hole = fresh_name("k", &Default::default());
    let ctx = TypingContext::new().with(hole.clone(), pair.ty());
    enumerate_inhabitants(&ctx, &bool_type(), depth, limit)
        .into_iter()
        .map(|body| TermContext {
            hole: hole.clone(),
            body,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::beta_normalize;
    use crate::syntax::{parse_term, parse_type, Style};

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn star_type_replaces_club() {
        assert!(star_type(&ty("# -> #")).alpha_eq(&ty("Y -> Y -> Y")));
        assert!(star_type(&ty("Y -> #")).alpha_eq(&ty("Y' -> Y -> Y'")));
    }

    #[test]
    fn u_is_constant_false() {
        let p = separating_pair(&Type::Club);
        assert!(p.u.erase().alpha_eq(&parse_term("\\x. \\x y. y", Style::Curry).unwrap()));
    }

    #[test]
    fn club_witness_separates() {
        let a = Type::Club;
        let k = separating_context(&a, &Term::Star).unwrap();
        let p = separating_pair(&a);
        let ku = beta_normalize(&k.fill(&p.u).erase(), Fuel::default()).unwrap();
        assert!(ku.alpha_eq(&church_false()));
        assert_eq!(k.to_string(), "[ ] (/\\X'. \\f g. f (\\y. y))");
    }

    #[test]
    fn arrow_witness_separates() {
        let w = parse_term("\\z. z", Style::Curry).unwrap();
        assert!(separating_context(&ty("# -> #"), &w).is_ok());
    }

    #[test]
    fn bad_witness_rejected() {
        let w = parse_term("\\x. x x", Style::Curry).unwrap();
        assert!(matches!(
            separating_context(&ty("# -> #"), &w),
            Err(EquivalenceError::WitnessRejected(_))
        ));
    }

    #[test]
    fn contexts_for_empty_type_are_typed() {
        let ks = enumerate_contexts(&ty("forall X. X"), 6, 20);
        assert!(!ks.is_empty());
        let p = separating_pair(&ty("forall X. X"));
        let ctx = TypingContext::new().with(ks[0].hole.clone(), p.ty());
        for k in ks.iter().take(3) {
            assert!(check(&ctx, &k.body, &bool_type()).is_accept(), "{k}");
        }
    }
}
