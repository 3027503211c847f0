//! First-order unification over arrow trees, and the simply typed check
//! built on it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{SimpleType, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FoTerm {
    Var(String),
    Const(String),
    Arrow(Box<FoTerm>, Box<FoTerm>),
}

impl FoTerm {
    pub fn var(x: impl Into<String>) -> FoTerm {
        FoTerm::Var(x.into())
    }

    pub fn constant(c: impl Into<String>) -> FoTerm {
        FoTerm::Const(c.into())
    }

    pub fn arrow(a: FoTerm, b: FoTerm) -> FoTerm {
        FoTerm::Arrow(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            FoTerm::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            FoTerm::Const(_) => {}
            FoTerm::Arrow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn apply(&self, s: &FoSubstitution) -> FoTerm {
        match self {
            FoTerm::Var(x) => s.0.get(x).cloned().unwrap_or_else(|| self.clone()),
            FoTerm::Const(_) => self.clone(),
            FoTerm::Arrow(a, b) => FoTerm::arrow(a.apply(s), b.apply(s)),
        }
    }

    /// Rename variables to `a`, `b`, ... in order of first occurrence.
    pub fn canonical(&self) -> FoTerm {
        let names: BTreeMap<String, FoTerm> = self
            .vars()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, FoTerm::Var(canonical_name(i))))
            .collect();
        self.apply(&FoSubstitution(names))
    }

    pub fn from_simple(a: &SimpleType) -> FoTerm {
        match a {
            SimpleType::Base => FoTerm::constant(BASE),
            SimpleType::Arrow(x, y) => FoTerm::arrow(FoTerm::from_simple(x), FoTerm::from_simple(y)),
        }
    }
}

fn canonical_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

pub const BASE: &str = "o";

impl fmt::Display for FoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoTerm::Var(x) | FoTerm::Const(x) => write!(f, "{x}"),
            FoTerm::Arrow(a, b) => match **a {
                FoTerm::Arrow(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoProblem {
    pub equations: Vec<(FoTerm, FoTerm)>,
}

impl FoProblem {
    pub fn new() -> Self {
        FoProblem::default()
    }

    pub fn push(&mut self, a: FoTerm, b: FoTerm) {
        self.equations.push((a, b));
    }
}

/// Idempotent substitution: no variable of the domain occurs in the range.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoSubstitution(pub BTreeMap<String, FoTerm>);

impl FoSubstitution {
    pub fn get(&self, x: &str) -> Option<&FoTerm> {
        self.0.get(x)
    }

    pub fn resolve(&self, x: &str) -> FoTerm {
        self.0.get(x).cloned().unwrap_or_else(|| FoTerm::var(x))
    }

    pub fn is_idempotent(&self) -> bool {
        self.0
            .values()
            .all(|t| t.vars().iter().all(|v| !self.0.contains_key(v)))
    }

    pub fn solves(&self, p: &FoProblem) -> bool {
        p.equations.iter().all(|(a, b)| a.apply(self) == b.apply(self))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FoFailure {
    #[error("occurs check: `{0}` would contain itself")]
    Cycle(String),
    #[error("cannot unify `{0}` with `{1}`")]
    Clash(FoTerm, FoTerm),
}

#[derive(Clone, Debug)]
enum Node {
    Var(usize),
    Const(String),
    Arrow(Box<Node>, Box<Node>),
}

struct Solver {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    binding: Vec<Option<Node>>,
}

impl Solver {
    fn new() -> Self {
        Solver {
            names: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            binding: Vec::new(),
        }
    }

    fn intern(&mut self, t: &FoTerm) -> Node {
        match t {
            FoTerm::Var(x) => {
                let i = match self.index.get(x) {
                    Some(&i) => i,
                    None => {
                        let i = self.names.len();
                        self.names.push(x.clone());
                        self.index.insert(x.clone(), i);
                        self.parent.push(i);
                        self.binding.push(None);
                        i
                    }
                };
                Node::Var(i)
            }
            FoTerm::Const(c) => Node::Const(c.clone()),
            FoTerm::Arrow(a, b) => Node::Arrow(Box::new(self.intern(a)), Box::new(self.intern(b))),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn occurs(&mut self, root: usize, t: &Node, seen: &mut Vec<usize>) -> bool {
        match t {
            Node::Const(_) => false,
            Node::Arrow(a, b) => self.occurs(root, a, seen) || self.occurs(root, b, seen),
            Node::Var(v) => {
                let r = self.find(*v);
                if r == root {
                    return true;
                }
                if seen.contains(&r) {
                    return false;
                }
                seen.push(r);
                match self.binding[r].clone() {
                    Some(b) => self.occurs(root, &b, seen),
                    None => false,
                }
            }
        }
    }

    fn export(&mut self, t: &Node) -> FoTerm {
        match t {
            Node::Var(v) => {
                let r = self.find(*v);
                FoTerm::Var(self.names[r].clone())
            }
            Node::Const(c) => FoTerm::Const(c.clone()),
            Node::Arrow(a, b) => FoTerm::arrow(self.export(a), self.export(b)),
        }
    }

    fn check_binding(&mut self, root: usize) -> Result<(), FoFailure> {
        if let Some(b) = self.binding[root].clone() {
            if self.occurs(root, &b, &mut Vec::new()) {
                return Err(FoFailure::Cycle(self.names[root].clone()));
            }
        }
        Ok(())
    }

    fn unify(&mut self, s: &Node, t: &Node) -> Result<(), FoFailure> {
        match (s, t) {
            (Node::Var(a), Node::Var(b)) => {
                let ra = self.find(*a);
                let rb = self.find(*b);
                if ra == rb {
                    return Ok(());
                }
                let ba = self.binding[ra].take();
                let bb = self.binding[rb].take();
                self.parent[ra] = rb;
                match (ba, bb) {
                    (None, None) => Ok(()),
                    (Some(x), None) | (None, Some(x)) => {
                        self.binding[rb] = Some(x);
                        self.check_binding(rb)
                    }
                    (Some(x), Some(y)) => {
                        self.binding[rb] = Some(y.clone());
                        self.check_binding(rb)?;
                        self.unify(&x, &y)
                    }
                }
            }
            (Node::Var(a), other) | (other, Node::Var(a)) => {
                let r = self.find(*a);
                match self.binding[r].clone() {
                    Some(b) => self.unify(&b, other),
                    None => {
                        if self.occurs(r, other, &mut Vec::new()) {
                            return Err(FoFailure::Cycle(self.names[r].clone()));
                        }
                        self.binding[r] = Some(other.clone());
                        Ok(())
                    }
                }
            }
            (Node::Const(a), Node::Const(b)) if a == b => Ok(()),
            (Node::Arrow(a1, b1), Node::Arrow(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            (x, y) => {
                let (x, y) = (x.clone(), y.clone());
                Err(FoFailure::Clash(self.export(&x), self.export(&y)))
            }
        }
    }

    fn resolve(&mut self, i: usize, stack: &mut Vec<usize>, memo: &mut HashMap<usize, FoTerm>) -> Result<FoTerm, FoFailure> {
        let r = self.find(i);
        if let Some(t) = memo.get(&r) {
            return Ok(t.clone());
        }
        if stack.contains(&r) {
            return Err(FoFailure::Cycle(self.names[r].clone()));
        }
        let out = match self.binding[r].clone() {
            None => FoTerm::Var(self.names[r].clone()),
            Some(b) => {
                stack.push(r);
                let t = self.resolve_node(&b, stack, memo)?;
                stack.pop();
                t
            }
        };
        memo.insert(r, out.clone());
        Ok(out)
    }

    fn resolve_node(&mut self, t: &Node, stack: &mut Vec<usize>, memo: &mut HashMap<usize, FoTerm>) -> Result<FoTerm, FoFailure> {
        match t {
            Node::Var(v) => self.resolve(*v, stack, memo),
            Node::Const(c) => Ok(FoTerm::Const(c.clone())),
            Node::Arrow(a, b) => Ok(FoTerm::arrow(
                self.resolve_node(a, stack, memo)?,
                self.resolve_node(b, stack, memo)?,
            )),
        }
    }
}

/// Most general unifier, `Cycle` when the occurs check fires, `Clash` on a
/// constructor mismatch.
pub fn fo_unify(p: &FoProblem) -> Result<FoSubstitution, FoFailure> {
    let mut s = Solver::new();
    for (a, b) in &p.equations {
        let a = s.intern(a);
        let b = s.intern(b);
        s.unify(&a, &b)?;
    }
    let mut memo = HashMap::new();
    let mut out = BTreeMap::new();
    for i in 0..s.names.len() {
        let t = s.resolve(i, &mut Vec::new(), &mut memo)?;
        if t != FoTerm::Var(s.names[i].clone()) {
            out.insert(s.names[i].clone(), t);
        }
    }
    Ok(FoSubstitution(out))
}

// ---------------------------------------------------------------------------
// Simply typed λ-calculus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StlcError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Unify(#[from] FoFailure),
}

/// The constraint set of a term: one fresh variable per subterm occurrence.
/// Returns the problem and the variable standing for the whole term.
pub fn stlc_constraints(ctx: &BTreeMap<String, SimpleType>, t: &Term) -> Result<(FoProblem, FoTerm), StlcError> {
    struct Gen<'a> {
        ctx: &'a BTreeMap<String, SimpleType>,
        next: usize,
        problem: FoProblem,
    }
    impl Gen<'_> {
        fn fresh(&mut self) -> FoTerm {
            self.next += 1;
            FoTerm::Var(format!("_s{}", self.next))
        }
        fn go(&mut self, t: &Term, env: &mut Vec<(String, FoTerm)>) -> Result<FoTerm, StlcError> {
            let me = self.fresh();
            match t {
                Term::Var(x) => {
                    let ty = match env.iter().rev().find(|(y, _)| y == x) {
                        Some((_, v)) => v.clone(),
                        None => match self.ctx.get(x) {
                            Some(a) => FoTerm::from_simple(a),
                            None => return Err(StlcError::Unbound(x.clone())),
                        },
                    };
                    self.problem.push(me.clone(), ty);
                }
                Term::Star => self.problem.push(me.clone(), FoTerm::constant(BASE)),
                Term::Abs(x, b) => {
                    let vx = self.fresh();
                    env.push((x.clone(), vx.clone()));
                    let vb = self.go(b, env)?;
                    env.pop();
                    self.problem.push(me.clone(), FoTerm::arrow(vx, vb));
                }
                Term::App(f, a) => {
                    let vf = self.go(f, env)?;
                    let va = self.go(a, env)?;
                    self.problem.push(vf, FoTerm::arrow(va, me.clone()));
                }
                Term::TyAbs(_, b) => {
                    let vb = self.go(b, env)?;
                    self.problem.push(me.clone(), vb);
                }
                Term::TyApp(f, _) => {
                    let vf = self.go(f, env)?;
                    self.problem.push(me.clone(), vf);
                }
            }
            Ok(me)
        }
    }
    let mut g = Gen {
        ctx,
        next: 0,
        problem: FoProblem::new(),
    };
    let root = g.go(t, &mut Vec::new())?;
    Ok((g.problem, root))
}

/// Is `|Γ| ⊢ t : A` derivable in the simply typed λ-calculus?
pub fn stlc_typecheck(ctx: &BTreeMap<String, SimpleType>, t: &Term, a: &SimpleType) -> bool {
    match stlc_constraints(ctx, t) {
        Ok((mut p, root)) => {
            p.push(root, FoTerm::from_simple(a));
            fo_unify(&p).is_ok()
        }
        Err(_) => false,
    }
}

/// Principal simple type, with variables renamed `a`, `b`, ...
pub fn stlc_infer(ctx: &BTreeMap<String, SimpleType>, t: &Term) -> Result<FoTerm, StlcError> {
    let (p, root) = stlc_constraints(ctx, t)?;
    let s = fo_unify(&p)?;
    Ok(root.apply(&s).canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type, Style};

    fn v(x: &str) -> FoTerm {
        FoTerm::var(x)
    }

    fn arr(a: FoTerm, b: FoTerm) -> FoTerm {
        FoTerm::arrow(a, b)
    }

    fn problem(eqs: Vec<(FoTerm, FoTerm)>) -> FoProblem {
        FoProblem { equations: eqs }
    }

    #[test]
    fn solves_simple_binding() {
        let p = problem(vec![(v("a"), arr(v("b"), v("c")))]);
        let s = fo_unify(&p).unwrap();
        assert_eq!(s.resolve("a"), arr(v("b"), v("c")));
        assert!(s.solves(&p) && s.is_idempotent());
    }

    #[test]
    fn occurs_check_fires() {
        let p = problem(vec![(v("a"), arr(v("a"), v("b")))]);
        assert!(matches!(fo_unify(&p), Err(FoFailure::Cycle(_))));
    }

    #[test]
    fn indirect_cycles_are_caught() {
        let p = problem(vec![(v("a"), arr(v("b"), v("c"))), (v("b"), v("a"))]);
        assert!(matches!(fo_unify(&p), Err(FoFailure::Cycle(_))));
        let p = problem(vec![
            (v("a"), arr(v("x"), v("y"))),
            (v("b"), arr(v("a"), v("z"))),
            (v("a"), v("b")),
        ]);
        assert!(matches!(fo_unify(&p), Err(FoFailure::Cycle(_))));
    }

    #[test]
    fn constructor_clash() {
        let o = FoTerm::constant("o");
        let p = problem(vec![(o.clone(), arr(o.clone(), o))]);
        assert!(matches!(fo_unify(&p), Err(FoFailure::Clash(..))));
    }

    #[test]
    fn substitution_is_fully_resolved() {
        let p = problem(vec![
            (v("a"), arr(v("b"), v("c"))),
            (v("b"), arr(v("c"), v("d"))),
            (v("d"), v("e")),
        ]);
        let s = fo_unify(&p).unwrap();
        assert!(s.is_idempotent());
        assert!(s.solves(&p));
    }

    fn simple(s: &str) -> SimpleType {
        parse_type(s).unwrap().erase()
    }

    fn curry(s: &str) -> Term {
        parse_term(s, Style::Curry).unwrap()
    }

    #[test]
    fn stlc_examples() {
        let empty = BTreeMap::new();
        assert!(stlc_typecheck(&empty, &curry("\\x. x"), &simple("o -> o")));
        assert!(!stlc_typecheck(&empty, &curry("\\x. x x"), &simple("o -> o")));
        assert!(stlc_typecheck(&empty, &curry("\\f x. f (f x)"), &simple("(o -> o) -> o -> o")));
        assert!(!stlc_typecheck(&empty, &curry("\\f x. f (f x)"), &simple("o -> o")));
        assert!(!stlc_typecheck(&empty, &curry("y"), &simple("o")));
    }

    #[test]
    fn infer_examples() {
        let empty = BTreeMap::new();
        assert_eq!(stlc_infer(&empty, &curry("\\x. x")).unwrap().to_string(), "a -> a");
        assert!(matches!(
            stlc_infer(&empty, &curry("\\x. x x")),
            Err(StlcError::Unify(FoFailure::Cycle(_)))
        ));
        assert_eq!(
            stlc_infer(&empty, &curry("\\f x. f x")).unwrap().to_string(),
            "(a -> b) -> a -> b"
        );
    }
}
