//! β and η normalization for Curry- and Church-style terms, plus Church
//! numerals and booleans.

use thiserror::Error;

use crate::syntax::{Term, Type};

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Bound on the number of redex contractions one normalization may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub max_steps: u64,
}

impl Fuel {
    pub fn new(max_steps: u64) -> Fuel {
        Fuel {
            max_steps: max_steps.max(1),
        }
    }

    /// `FATCHECK_FUEL` if set to a positive integer, otherwise the default.
    pub fn from_env() -> Fuel {
        std::env::var("FATCHECK_FUEL")
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .filter(|&n| n > 0)
            .map(Fuel::new)
            .unwrap_or_default()
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::new(DEFAULT_FUEL)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("fuel exhausted after {0} reduction steps")]
    FuelExhausted(u64),
    #[error("not a Church numeral: {0}")]
    NotANumeral(String),
    #[error("not a Church boolean: {0}")]
    NotABoolean(String),
}

struct Meter {
    used: u64,
    max: u64,
}

impl Meter {
    fn new(fuel: Fuel) -> Meter {
        Meter {
            used: 0,
            max: fuel.max_steps,
        }
    }

    fn tick(&mut self) -> Result<(), ReductionError> {
        if self.used >= self.max {
            return Err(ReductionError::FuelExhausted(self.used));
        }
        self.used += 1;
        Ok(())
    }
}

enum Arg {
    Term(Term),
    Type(Type),
}

fn unwind(mut t: Term) -> (Term, Vec<Arg>) {
    let mut args = Vec::new();
    loop {
        match t {
            Term::App(f, a) => {
                args.push(Arg::Term(*a));
                t = *f;
            }
            Term::TyApp(f, a) => {
                args.push(Arg::Type(a));
                t = *f;
            }
            other => {
                args.reverse();
                return (other, args);
            }
        }
    }
}

fn rewind(head: Term, args: Vec<Arg>) -> Term {
    args.into_iter().fold(head, |acc, a| match a {
        Arg::Term(u) => Term::app(acc, u),
        Arg::Type(c) => Term::ty_app(acc, c),
    })
}

/// Weak head normal form by repeated head contraction.
fn whnf(mut t: Term, meter: &mut Meter) -> Result<Term, ReductionError> {
    loop {
        let (head, mut args) = unwind(t);
        if args.is_empty() {
            return Ok(head);
        }
        let contracted = match (head, args.remove(0)) {
            (Term::Abs(x, body), Arg::Term(u)) => {
                meter.tick()?;
                body.subst(&x, &u)
            }
            (Term::TyAbs(x, body), Arg::Type(c)) => {
                meter.tick()?;
                body.subst_type(&x, &c)
            }
            (h, first) => {
                args.insert(0, first);
                return Ok(rewind(h, args));
            }
        };
        t = rewind(contracted, args);
    }
}

fn normal_order(t: Term, meter: &mut Meter) -> Result<Term, ReductionError> {
    match whnf(t, meter)? {
        Term::Abs(x, b) => Ok(Term::abs(x, normal_order(*b, meter)?)),
        Term::TyAbs(x, b) => Ok(Term::ty_abs(x, normal_order(*b, meter)?)),
        w => {
            let (head, args) = unwind(w);
            let head = match head {
                h @ (Term::Var(_) | Term::Star) => h,
                h => normal_order(h, meter)?,
            };
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                out.push(match a {
                    Arg::Term(u) => Arg::Term(normal_order(u, meter)?),
                    ty => ty,
                });
            }
            Ok(rewind(head, out))
        }
    }
}

/// Leftmost-outermost β-normal form.
pub fn beta_normalize(t: &Term, fuel: Fuel) -> Result<Term, ReductionError> {
    normal_order(t.clone(), &mut Meter::new(fuel))
}

/// β-normal form by rightmost-innermost reduction: arguments before
/// functions, bodies before the redexes containing them.
pub fn beta_normalize_innermost(t: &Term, fuel: Fuel) -> Result<Term, ReductionError> {
    fn go(t: &Term, meter: &mut Meter) -> Result<Term, ReductionError> {
        match t {
            Term::Var(_) | Term::Star => Ok(t.clone()),
            Term::Abs(x, b) => Ok(Term::abs(x.clone(), go(b, meter)?)),
            Term::TyAbs(x, b) => Ok(Term::ty_abs(x.clone(), go(b, meter)?)),
            Term::App(f, a) => {
                let a = go(a, meter)?;
                let f = go(f, meter)?;
                match f {
                    Term::Abs(x, body) => {
                        meter.tick()?;
                        go(&body.subst(&x, &a), meter)
                    }
                    f => Ok(Term::app(f, a)),
                }
            }
            Term::TyApp(f, c) => match go(f, meter)? {
                Term::TyAbs(x, body) => {
                    meter.tick()?;
                    go(&body.subst_type(&x, c), meter)
                }
                f => Ok(Term::ty_app(f, c.clone())),
            },
        }
    }
    go(t, &mut Meter::new(fuel))
}

/// Exhaustive η-reduction, bottom-up.
pub fn eta_reduce(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Star => t.clone(),
        Term::App(f, a) => Term::app(eta_reduce(f), eta_reduce(a)),
        Term::TyApp(f, c) => Term::ty_app(eta_reduce(f), c.clone()),
        Term::Abs(x, b) => match eta_reduce(b) {
            Term::App(f, a) if matches!(&*a, Term::Var(y) if y == x) && !f.occurs_free(x) => *f,
            b => Term::abs(x.clone(), b),
        },
        Term::TyAbs(x, b) => match eta_reduce(b) {
            Term::TyApp(f, Type::Var(y)) if &y == x && !f.free_type_vars().contains(x) => *f,
            b => Term::ty_abs(x.clone(), b),
        },
    }
}

pub fn betaeta_normal_form(t: &Term, fuel: Fuel) -> Result<Term, ReductionError> {
    Ok(eta_reduce(&beta_normalize(t, fuel)?))
}

pub fn betaeta_equal(t: &Term, u: &Term, fuel: Fuel) -> Result<bool, ReductionError> {
    let a = betaeta_normal_form(t, fuel)?;
    let b = betaeta_normal_form(u, fuel)?;
    Ok(a.alpha_eq(&b))
}

pub fn is_beta_normal(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Star => true,
        Term::Abs(_, b) | Term::TyAbs(_, b) => is_beta_normal(b),
        Term::App(f, a) => !matches!(**f, Term::Abs(..)) && is_beta_normal(f) && is_beta_normal(a),
        Term::TyApp(f, _) => !matches!(**f, Term::TyAbs(..)) && is_beta_normal(f),
    }
}

// ---------------------------------------------------------------------------
// Church data
// ---------------------------------------------------------------------------

/// `λf x. f (... (f x))` with `n` applications.
pub fn church_numeral(n: u64) -> Term {
    let mut body = Term::var("x");
    for _ in 0..n {
        body = Term::app(Term::var("f"), body);
    }
    Term::abss(&["f", "x"], body)
}

/// Inverse of [`church_numeral`] on β-normal terms, up to α and type erasure.
pub fn read_numeral(t: &Term) -> Result<u64, ReductionError> {
    let erased = t.erase();
    let fail = || ReductionError::NotANumeral(t.to_string());
    let Term::Abs(f, inner) = &erased else {
        return Err(fail());
    };
    let Term::Abs(x, body) = &**inner else {
        return Err(fail());
    };
    if f == x {
        return Err(fail());
    }
    let mut n = 0;
    let mut cur = &**body;
    loop {
        match cur {
            Term::Var(v) if v == x => return Ok(n),
            Term::App(g, a) if matches!(&**g, Term::Var(v) if v == f) => {
                n += 1;
                cur = a;
            }
            _ => return Err(fail()),
        }
    }
}

pub fn church_true() -> Term {
    Term::abss(&["x", "y"], Term::var("x"))
}

pub fn church_false() -> Term {
    Term::abss(&["x", "y"], Term::var("y"))
}

pub fn church_bool(b: bool) -> Term {
    if b {
        church_true()
    } else {
        church_false()
    }
}

pub fn read_bool(t: &Term) -> Result<bool, ReductionError> {
    let erased = t.erase();
    if erased.alpha_eq(&church_true()) {
        Ok(true)
    } else if erased.alpha_eq(&church_false()) {
        Ok(false)
    } else {
        Err(ReductionError::NotABoolean(t.to_string()))
    }
}

/// `∀X. (X -> X) -> X -> X`
pub fn nat_type() -> Type {
    let x = Type::var("X");
    Type::forall(
        "X",
        Type::arrow(Type::arrow(x.clone(), x.clone()), Type::arrow(x.clone(), x)),
    )
}

/// `∀X. X -> X -> X`
pub fn bool_type() -> Type {
    let x = Type::var("X");
    Type::forall("X", Type::arrow(x.clone(), Type::arrow(x.clone(), x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, Style};

    fn t(s: &str) -> Term {
        parse_term(s, Style::Church).unwrap()
    }

    fn nf(s: &str) -> Term {
        beta_normalize(&t(s), Fuel::default()).unwrap()
    }

    #[test]
    fn identity_applied() {
        assert!(nf("(\\x. x) (\\y. y)").alpha_eq(&t("\\y. y")));
    }

    #[test]
    fn type_level_beta() {
        assert!(nf("(/\\X. \\x. x) [Y]").alpha_eq(&t("\\x. x")));
    }

    #[test]
    fn two_to_the_two() {
        let two = church_numeral(2);
        let e = beta_normalize(&Term::app(two.clone(), two), Fuel::default()).unwrap();
        assert_eq!(read_numeral(&e).unwrap(), 4);
    }

    #[test]
    fn eta_examples() {
        let f = Fuel::default();
        assert!(betaeta_normal_form(&t("\\x. (\\y. y) x"), f).unwrap().alpha_eq(&t("\\y. y")));
        assert!(betaeta_normal_form(&t("/\\X. g [X]"), f).unwrap().alpha_eq(&t("g")));
        assert!(betaeta_normal_form(&t("\\f x. f x"), f).unwrap().alpha_eq(&t("\\f. f")));
        assert!(betaeta_normal_form(&t("\\x. x x"), f).unwrap().alpha_eq(&t("\\x. x x")));
    }

    #[test]
    fn equality_examples() {
        let f = Fuel::default();
        assert!(betaeta_equal(&church_true(), &t("\\x y. x"), f).unwrap());
        assert!(!betaeta_equal(&church_numeral(2), &church_numeral(3), f).unwrap());
        let two = church_numeral(2);
        assert!(betaeta_equal(&Term::app(t("\\x. x"), two.clone()), &two, f).unwrap());
    }

    #[test]
    fn numerals() {
        assert!(church_numeral(0).alpha_eq(&t("\\f x. x")));
        assert_eq!(read_numeral(&t("\\f x. f (f x)")).unwrap(), 2);
        assert!(read_numeral(&t("\\x. x")).is_err());
        assert!(read_numeral(&t("\\f. f")).is_err());
        assert!(read_numeral(&t("\\x x. x")).is_err());
    }

    #[test]
    fn divergence_exhausts_fuel() {
        let omega = t("(\\x. x x) (\\x. x x)");
        assert_eq!(
            beta_normalize(&omega, Fuel::new(50)),
            Err(ReductionError::FuelExhausted(50))
        );
    }

    #[test]
    fn normal_order_avoids_divergent_argument() {
        let k = t("(\\x y. y) ((\\x. x x) (\\x. x x))");
        assert!(beta_normalize(&k, Fuel::new(100)).unwrap().alpha_eq(&t("\\y. y")));
        assert!(beta_normalize_innermost(&k, Fuel::new(100)).is_err());
    }

    #[test]
    fn head_redex_under_spine() {
        assert!(nf("z ((\\x. x) y) ((\\x. x) w)").alpha_eq(&t("z y w")));
        assert!(nf("((\\x. x) (\\y. y)) a b").alpha_eq(&t("a b")));
    }
}
