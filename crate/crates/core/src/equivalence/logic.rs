//! First-order formulas in the `⇒, ∀` fragment and their translations into
//! types: the dyadic encoding used for inhabitation, and the bijection
//! between types and monadic formulas over a single predicate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::EquivalenceError;
use crate::syntax::{ParseError, Parser, Tok, Type, TypingContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Bot,
    /// A relation symbol applied to one or two individual variables.
    Rel(String, Vec<String>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
}

/// The predicate name produced by [`type_to_monadic`].
pub const MONADIC_PREDICATE: &str = "p";

impl Formula {
    pub fn rel(p: impl Into<String>, args: &[&str]) -> Formula {
        Formula::Rel(p.into(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Bot => BTreeSet::new(),
            Formula::Rel(_, args) => args.iter().cloned().collect(),
            Formula::Imp(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Forall(x, b) => {
                let mut s = b.free_vars();
                s.remove(x);
                s
            }
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bot => {}
            Formula::Rel(_, args) => out.extend(args.iter().cloned()),
            Formula::Imp(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Formula::Forall(x, b) => {
                out.insert(x.clone());
                b.all_vars(out);
            }
        }
    }

    /// Relation symbols with their arities; fails if a symbol is used with
    /// two arities or an arity outside `1..=2`.
    pub fn symbols(&self) -> Result<BTreeMap<String, usize>, EquivalenceError> {
        let mut out = BTreeMap::new();
        self.collect_symbols(&mut out)?;
        Ok(out)
    }

    fn collect_symbols(&self, out: &mut BTreeMap<String, usize>) -> Result<(), EquivalenceError> {
        match self {
            Formula::Bot => Ok(()),
            Formula::Rel(p, args) => {
                if args.is_empty() || args.len() > 2 {
                    return Err(EquivalenceError::IllFormedFormula(format!(
                        "{p} has arity {}, expected 1 or 2",
                        args.len()
                    )));
                }
                match out.insert(p.clone(), args.len()) {
                    Some(n) if n != args.len() => Err(EquivalenceError::IllFormedFormula(format!(
                        "{p} is used with arities {n} and {}",
                        args.len()
                    ))),
                    _ => Ok(()),
                }
            }
            Formula::Imp(a, b) => {
                a.collect_symbols(out)?;
                b.collect_symbols(out)
            }
            Formula::Forall(_, b) => b.collect_symbols(out),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Formula::Bot | Formula::Rel(..))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bot => write!(f, "bot"),
            Formula::Rel(p, args) => write!(f, "{p}({})", args.join(", ")),
            Formula::Imp(a, b) => {
                if a.is_atomic() {
                    write!(f, "{a} => {b}")
                } else {
                    write!(f, "({a}) => {b}")
                }
            }
            Formula::Forall(x, b) => write!(f, "forall {x}. {b}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn formula(p: &mut Parser) -> Result<Formula, ParseError> {
    if p.peek() == Some(&Tok::Forall) {
        p.bump();
        let mut vars = vec![p.ident()?];
        while let Some(Tok::Ident(_)) = p.peek() {
            vars.push(p.ident()?);
        }
        p.expect(Tok::Dot, "`.` after quantified variables")?;
        let body = formula(p)?;
        return Ok(vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc)));
    }
    let left = formula_atom(p)?;
    if p.peek() == Some(&Tok::FatArrow) {
        p.bump();
        Ok(Formula::imp(left, formula(p)?))
    } else {
        Ok(left)
    }
}

fn formula_atom(p: &mut Parser) -> Result<Formula, ParseError> {
    match p.peek() {
        Some(Tok::LParen) => {
            p.bump();
            let f = formula(p)?;
            p.expect(Tok::RParen, "`)`")?;
            Ok(f)
        }
        Some(Tok::Ident(s)) if s == "bot" => {
            p.bump();
            Ok(Formula::Bot)
        }
        Some(Tok::Ident(_)) => {
            let name = p.ident()?;
            p.expect(Tok::LParen, "`(` after a relation symbol")?;
            let mut args = vec![p.ident()?];
            if p.peek() == Some(&Tok::Comma) {
                p.bump();
                args.push(p.ident()?);
            }
            p.expect(Tok::RParen, "`)` closing the arguments")?;
            Ok(Formula::Rel(name, args))
        }
        _ => Err(p.error("expected a formula")),
    }
}

/// `f ::= bot | IDENT(IDENT[, IDENT]) | f => f | forall IDENT. f`, with
/// `=>` associating to the right.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = formula(&mut p)?;
    p.finish()?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// Dyadic translation
// ---------------------------------------------------------------------------

const SPADE: &str = "spade";
const BULLET: &str = "bullet";
const CIRC1: &str = "circ1";
const CIRC2: &str = "circ2";
const STAR: &str = "star";

fn individual(v: &str) -> Type {
    Type::var(format!("X_{v}"))
}

fn component(p: &str, i: u8) -> Type {
    Type::var(format!("{p}_{i}"))
}

/// `A• = A ⇒ •`
fn bullet(a: &Type) -> Type {
    Type::arrow(a.clone(), Type::var(BULLET))
}

/// `p(A, B) = ((A• ⇒ p₁) ⇒ (B• ⇒ p₂) ⇒ p₃) ⇒ ⋆`
fn relation(p: &str, a: &Type, b: &Type) -> Type {
    let pab = Type::arrows(
        vec![
            Type::arrow(bullet(a), component(p, 1)),
            Type::arrow(bullet(b), component(p, 2)),
        ],
        component(p, 3),
    );
    Type::arrow(pab, Type::var(STAR))
}

/// The hypotheses `U(A)`: `(A• ⇒ pᵢ) ⇒ ∘₁` for each symbol and `i = 1, 2`,
/// then `A• ⇒ ∘₂`.
fn u_types(a: &Type, symbols: &BTreeMap<String, usize>) -> Vec<Type> {
    let mut out = Vec::new();
    for p in symbols.keys() {
        for i in 1..=2 {
            out.push(Type::arrow(Type::arrow(bullet(a), component(p, i)), Type::var(CIRC1)));
        }
    }
    out.push(Type::arrow(bullet(a), Type::var(CIRC2)));
    out
}

fn translate(phi: &Formula, symbols: &BTreeMap<String, usize>) -> Type {
    match phi {
        Formula::Bot => Type::var(SPADE),
        Formula::Rel(p, args) => {
            let a = individual(&args[0]);
            let b = args.get(1).map(|v| individual(v)).unwrap_or_else(|| a.clone());
            relation(p, &a, &b)
        }
        Formula::Imp(a, b) => Type::arrow(translate(a, symbols), translate(b, symbols)),
        Formula::Forall(v, body) => {
            let x = individual(v);
            Type::forall(format!("X_{v}"), Type::arrows(u_types(&x, symbols), translate(body, symbols)))
        }
    }
}

/// Symbols of all the formulas, with a check that no generated variable
/// name coincides with another.
fn signature(formulas: &[&Formula]) -> Result<BTreeMap<String, usize>, EquivalenceError> {
    let mut symbols = BTreeMap::new();
    let mut vars = BTreeSet::new();
    for f in formulas {
        f.collect_symbols(&mut symbols)?;
        f.all_vars(&mut vars);
    }
    let mut reserved: BTreeSet<String> = [SPADE, BULLET, CIRC1, CIRC2, STAR].iter().map(|s| s.to_string()).collect();
    for p in symbols.keys() {
        for i in 1..=3 {
            if !reserved.insert(format!("{p}_{i}")) {
                return Err(EquivalenceError::IllFormedFormula(format!("symbol {p} clashes with a reserved name")));
            }
        }
    }
    for v in &vars {
        if reserved.contains(&format!("X_{v}")) {
            return Err(EquivalenceError::IllFormedFormula(format!(
                "variable {v} clashes with a relation component"
            )));
        }
    }
    Ok(symbols)
}

/// The three admissible shapes of assumptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssumptionForm {
    /// An atom other than `⊥`.
    Atomic,
    /// `∀α⃗. φ₁ ⇒ … ⇒ φₙ ⇒ ψ` closed, atomic parts, variables of `ψ` among
    /// those of the `φᵢ`.
    Horn,
    /// `∀α. (∀β. p(α, β) ⇒ ⊥) ⇒ ⊥`
    Serial,
}

pub fn assumption_form(phi: &Formula) -> Option<AssumptionForm> {
    if let Formula::Rel(..) = phi {
        return Some(AssumptionForm::Atomic);
    }
    if let Formula::Forall(a, body) = phi {
        if let Formula::Imp(inner, bot) = &**body {
            if let (Formula::Forall(b, r), Formula::Bot) = (&**inner, &**bot) {
                if let Formula::Imp(atom, bot2) = &**r {
                    if let (Formula::Rel(_, args), Formula::Bot) = (&**atom, &**bot2) {
                        if a != b && args.len() == 2 && &args[0] == a && &args[1] == b {
                            return Some(AssumptionForm::Serial);
                        }
                    }
                }
            }
        }
    }
    if !phi.free_vars().is_empty() {
        return None;
    }
    let mut body = phi;
    while let Formula::Forall(_, b) = body {
        body = b;
    }
    let mut premises = Vec::new();
    while let Formula::Imp(a, b) = body {
        premises.push(&**a);
        body = b;
    }
    if !body.is_atomic() || premises.iter().any(|p| !p.is_atomic()) {
        return None;
    }
    let mut covered = BTreeSet::new();
    for p in &premises {
        covered.extend(p.free_vars());
    }
    if body.free_vars().is_subset(&covered) {
        Some(AssumptionForm::Horn)
    } else {
        None
    }
}

/// `φ̄`, over the relation symbols of `φ` and the assumptions.  Every
/// assumption must have one of the [`AssumptionForm`] shapes.
pub fn translate_dyadic(phi: &Formula, assumptions: &[Formula]) -> Result<Type, EquivalenceError> {
    for a in assumptions {
        if assumption_form(a).is_none() {
            return Err(EquivalenceError::IllFormedFormula(format!("{a} is not an admissible assumption")));
        }
    }
    let mut all: Vec<&Formula> = assumptions.iter().collect();
    all.push(phi);
    let symbols = signature(&all)?;
    Ok(translate(phi, &symbols))
}

/// The judgment for a sequent `φ₁, …, φₙ ⊢ φ`: `xᵢ : φ̄ᵢ`, then `yⱼ` ranging
/// over `U(X_α)` for each variable `α` free in `φ` but in no `φᵢ`.
pub fn translate_sequent(
    assumptions: &[Formula],
    goal: &Formula,
) -> Result<(TypingContext, Type), EquivalenceError> {
    let mut all: Vec<&Formula> = assumptions.iter().collect();
    all.push(goal);
    let symbols = signature(&all)?;
    let mut ctx = TypingContext::new();
    let mut bound_in_assumptions = BTreeSet::new();
    for (i, a) in assumptions.iter().enumerate() {
        ctx.insert(format!("x{}", i + 1), translate(a, &symbols));
        bound_in_assumptions.extend(a.free_vars());
    }
    let mut j = 0;
    for v in goal.free_vars().difference(&bound_in_assumptions) {
        for u in u_types(&individual(v), &symbols) {
            j += 1;
            ctx.insert(format!("y{j}"), u);
        }
    }
    Ok((ctx, translate(goal, &symbols)))
}

// ---------------------------------------------------------------------------
// Monadic bijection
// ---------------------------------------------------------------------------

/// `p(α) ↦ α`, `⇒ ↦ ⇒`, `∀α ↦ ∀α`.  The formula must use a single unary
/// predicate and no `⊥`.
pub fn monadic_to_type(phi: &Formula) -> Result<Type, EquivalenceError> {
    let symbols = phi.symbols()?;
    if symbols.len() > 1 || symbols.values().any(|&n| n != 1) {
        return Err(EquivalenceError::IllFormedFormula(
            "a monadic formula uses exactly one unary predicate".into(),
        ));
    }
    fn go(phi: &Formula) -> Result<Type, EquivalenceError> {
        match phi {
            Formula::Bot => Err(EquivalenceError::IllFormedFormula("bot is not monadic".into())),
            Formula::Rel(_, args) => Ok(Type::var(args[0].clone())),
            Formula::Imp(a, b) => Ok(Type::arrow(go(a)?, go(b)?)),
            Formula::Forall(x, b) => Ok(Type::forall(x.clone(), go(b)?)),
        }
    }
    go(phi)
}

/// Inverse of [`monadic_to_type`], using [`MONADIC_PREDICATE`].
pub fn type_to_monadic(a: &Type) -> Result<Formula, EquivalenceError> {
    match a {
        Type::Var(x) => Ok(Formula::rel(MONADIC_PREDICATE, &[x])),
        Type::Club => Err(EquivalenceError::IllFormedFormula("# has no monadic counterpart".into())),
        Type::Arrow(b, c) => Ok(Formula::imp(type_to_monadic(b)?, type_to_monadic(c)?)),
        Type::Forall(x, b) => Ok(Formula::forall(x.clone(), type_to_monadic(b)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let phi = f("forall a. (forall b. r(a, b) => bot) => bot");
        assert_eq!(phi.to_string(), "forall a. (forall b. r(a, b) => bot) => bot");
        assert_eq!(f("p(x) => q(x, y) => bot"), Formula::imp(Formula::rel("p", &["x"]), Formula::imp(Formula::rel("q", &["x", "y"]), Formula::Bot)));
        assert!(parse_formula("p(x, y, z)").is_err());
        assert!(parse_formula("p").is_err());
    }

    #[test]
    fn bottom() {
        assert_eq!(translate_dyadic(&Formula::Bot, &[]).unwrap(), Type::var("spade"));
    }

    #[test]
    fn binary_atom() {
        let got = translate_dyadic(&f("r(a, b)"), &[]).unwrap();
        let want = parse_type("(((X_a -> bullet) -> r_1) -> ((X_b -> bullet) -> r_2) -> r_3) -> star").unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn implication_is_pointwise() {
        let a = translate_dyadic(&f("r(a, b)"), &[]).unwrap();
        let got = translate_dyadic(&f("r(a, b) => bot"), &[]).unwrap();
        assert_eq!(got, Type::arrow(a, Type::var("spade")));
    }

    #[test]
    fn quantifier_adds_u_hypotheses() {
        let got = translate_dyadic(&f("forall a. r(a, a)"), &[]).unwrap();
        let Type::Forall(x, body) = got else { panic!() };
        assert_eq!(x, "X_a");
        let (args, _) = {
            let mut args = Vec::new();
            let mut t = &*body;
            while let Type::Arrow(a, b) = t {
                args.push(a.clone());
                t = b;
            }
            (args, t.clone())
        };
        // Two hypotheses per symbol, one more for ∘₂, then the atom's own arrow.
        assert_eq!(args.len(), 4);
        assert_eq!(*args[2], parse_type("(X_a -> bullet) -> circ2").unwrap());
    }

    #[test]
    fn assumption_shapes() {
        assert_eq!(assumption_form(&f("r(a, b)")), Some(AssumptionForm::Atomic));
        assert_eq!(assumption_form(&f("forall a b. r(a, b) => r(b, a)")), Some(AssumptionForm::Horn));
        assert_eq!(assumption_form(&f("forall a. (forall b. r(a, b) => bot) => bot")), Some(AssumptionForm::Serial));
        assert_eq!(assumption_form(&f("forall a b. r(a, a) => r(b, a)")), None);
        assert!(translate_dyadic(&Formula::Bot, &[f("r(a, b) => bot")]).is_err());
    }

    #[test]
    fn sequent_context() {
        let (ctx, _) = translate_sequent(&[f("forall a. r(a, a)")], &f("r(c, c)")).unwrap();
        assert_eq!(ctx.0.len(), 4);
        assert!(ctx.get("y3").is_some());
    }

    #[test]
    fn clashes_are_rejected() {
        assert!(translate_dyadic(&f("X_a(b) => r(a_1)"), &[]).is_err());
        assert!(translate_dyadic(&f("r(a) => r(a, b)"), &[]).is_err());
    }

    #[test]
    fn monadic_bijection() {
        let phi = f("forall a. p(a) => p(a)");
        let a = parse_type("forall a. a -> a").unwrap();
        assert_eq!(monadic_to_type(&phi).unwrap(), a);
        assert_eq!(type_to_monadic(&a).unwrap(), phi);
        assert_eq!(monadic_to_type(&f("p(X2)")).unwrap(), Type::var("X2"));
        assert!(type_to_monadic(&Type::Club).is_err());
        assert!(monadic_to_type(&f("p(a) => q(a)")).is_err());
    }
}
