//! Bounded proof search for inhabitants in η-long β-normal form.
//!
//! A goal is first decomposed by introductions (`Λ` for `∀`, `λ` for `⇒`)
//! down to an atom `P`; then some variable in scope, or `★` when `P = ♣`, is
//! applied to a spine of atomic type arguments and term arguments so that its
//! target becomes `P`.  Type arguments are drawn from the type variables in
//! scope, `♣` when the problem mentions it, and one fresh variable.
//!
//! Depth counts rule applications along a branch: a non-empty block of
//! introductions costs one, and so does each head application.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::syntax::{fresh_name, fresh_variant, Term, Type, TypingContext};

#[derive(Clone)]
struct Env {
    vars: Vec<(String, Type)>,
    tyvars: BTreeSet<String>,
    names: BTreeSet<String>,
    /// The type variables and the set of hypothesis types, printed once per
    /// change of scope.
    scope_key: Rc<str>,
}

impl Env {
    fn rekey(&mut self) {
        let types: BTreeSet<String> = self.vars.iter().map(|(_, t)| t.to_string()).collect();
        let tyvars: Vec<&str> = self.tyvars.iter().map(|s| s.as_str()).collect();
        self.scope_key = format!("{}|{}", tyvars.join(","), types.into_iter().collect::<Vec<_>>().join(";")).into();
    }
}

#[derive(Clone)]
enum Item {
    Ty(Type),
    Arg(Type),
}

struct Searcher {
    club: bool,
    counter: usize,
    /// Largest depth at which a goal is known to have no inhabitant, keyed by
    /// the goal and the scope (hypothesis names do not matter).
    failed: HashMap<(String, Rc<str>), u32>,
}

/// Whether the final target of `b` is the variable `y` bound outside `b`.
fn targets(b: &Type, y: &str) -> bool {
    match b {
        Type::Var(v) => v == y,
        Type::Club => false,
        Type::Arrow(_, e) => targets(e, y),
        Type::Forall(z, e) => z != y && targets(e, y),
    }
}

fn spines(c: &Type, p: &Type, pool: &[Type], fresh: &Type, acc: &mut Vec<Item>, out: &mut Vec<Vec<Item>>) {
    match c {
        Type::Forall(y, body) => {
            let options: Vec<Type> = if targets(body, y) {
                vec![p.clone()]
            } else if !body.free_vars().contains(y) {
                vec![fresh.clone()]
            } else {
                pool.to_vec()
            };
            for w in options {
                acc.push(Item::Ty(w.clone()));
                spines(&body.subst(y, &w), p, pool, fresh, acc, out);
                acc.pop();
            }
        }
        Type::Arrow(d, e) => {
            acc.push(Item::Arg((**d).clone()));
            spines(e, p, pool, fresh, acc, out);
            acc.pop();
        }
        atom => {
            if atom == p {
                out.push(acc.clone());
            }
        }
    }
}

enum Intro {
    Ty(String),
    Var(String),
}

impl Searcher {
    fn fresh_var(&mut self, env: &Env) -> String {
        loop {
            self.counter += 1;
            let x = format!("x{}", self.counter);
            if !env.names.contains(&x) {
                return x;
            }
        }
    }

    fn solve(&mut self, env: &Env, goal: &Type, depth: u32, limit: usize) -> Vec<Term> {
        if depth == 0 || limit == 0 {
            return vec![];
        }
        let key = (goal.to_string(), env.scope_key.clone());
        if self.failed.get(&key).is_some_and(|&d| d >= depth) {
            return vec![];
        }
        let found = self.solve_uncached(env, goal, depth, limit);
        if found.is_empty() {
            let d = self.failed.entry(key).or_insert(0);
            *d = (*d).max(depth);
        }
        found
    }

    fn solve_uncached(&mut self, env: &Env, goal: &Type, depth: u32, limit: usize) -> Vec<Term> {
        let mut env = env.clone();
        let mut intros = Vec::new();
        let mut goal = goal.clone();
        loop {
            match goal {
                Type::Forall(x, body) => {
                    let mut avoid = env.tyvars.clone();
                    for (_, t) in &env.vars {
                        avoid.extend(t.free_vars());
                    }
                    let (x2, body) = if avoid.contains(&x) {
                        let mut wide = avoid.clone();
                        wide.extend(body.all_names());
                        let x2 = fresh_variant(&x, &wide);
                        let renamed = body.subst(&x, &Type::Var(x2.clone()));
                        (x2, renamed)
                    } else {
                        (x, *body)
                    };
                    env.tyvars.insert(x2.clone());
                    intros.push(Intro::Ty(x2));
                    goal = body;
                }
                Type::Arrow(d, body) => {
                    let x = self.fresh_var(&env);
                    env.names.insert(x.clone());
                    env.vars.push((x.clone(), *d));
                    intros.push(Intro::Var(x));
                    goal = *body;
                }
                _ => break,
            }
        }
        if !intros.is_empty() {
            env.rekey();
        }
        let remaining = if intros.is_empty() { depth } else { depth - 1 };
        if remaining == 0 {
            return vec![];
        }
        let bodies = self.heads(&env, &goal, remaining, limit);
        bodies
            .into_iter()
            .map(|b| {
                intros.iter().rev().fold(b, |acc, i| match i {
                    Intro::Ty(x) => Term::ty_abs(x.clone(), acc),
                    Intro::Var(x) => Term::abs(x.clone(), acc),
                })
            })
            .collect()
    }

    fn heads(&mut self, env: &Env, p: &Type, depth: u32, limit: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if *p == Type::Club {
            out.push(Term::Star);
        }
        let mut names: BTreeSet<String> = env.tyvars.clone();
        for (_, t) in &env.vars {
            names.extend(t.all_names());
        }
        let fresh = Type::Var(fresh_name("W", &names));
        let mut pool: Vec<Type> = env.tyvars.iter().map(|v| Type::Var(v.clone())).collect();
        if self.club {
            pool.push(Type::Club);
        }
        pool.push(fresh.clone());
        for (x, c) in env.vars.iter().rev() {
            if out.len() >= limit {
                break;
            }
            let mut found = Vec::new();
            spines(c, p, &pool, &fresh, &mut Vec::new(), &mut found);
            for spine in found {
                if out.len() >= limit {
                    break;
                }
                let want = limit - out.len();
                for t in self.fill_spine(env, Term::var(x.clone()), &spine, depth - 1, want) {
                    out.push(t);
                }
            }
        }
        out.truncate(limit);
        out
    }

    /// All ways of completing the spine, up to `limit`.
    fn fill_spine(&mut self, env: &Env, head: Term, spine: &[Item], depth: u32, limit: usize) -> Vec<Term> {
        let Some((first, rest)) = spine.split_first() else {
            return vec![head];
        };
        match first {
            Item::Ty(w) => self.fill_spine(env, Term::ty_app(head, w.clone()), rest, depth, limit),
            Item::Arg(goal) => {
                let mut out = Vec::new();
                for a in self.solve(env, goal, depth, limit) {
                    if out.len() >= limit {
                        break;
                    }
                    let want = limit - out.len();
                    out.extend(self.fill_spine(env, Term::app(head.clone(), a), rest, depth, want));
                }
                out
            }
        }
    }
}

fn start(ctx: &TypingContext, a: &Type) -> (Searcher, Env) {
    let mut tyvars = ctx.free_type_vars();
    tyvars.extend(a.free_vars());
    let club = a.contains_club() || ctx.0.values().any(|t| t.contains_club());
    let mut env = Env {
        vars: ctx.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        tyvars,
        names: ctx.0.keys().cloned().collect(),
        scope_key: Rc::from(""),
    };
    env.rekey();
    (
        Searcher {
            club,
            counter: 0,
            failed: HashMap::new(),
        },
        env,
    )
}

/// The first inhabitant of `A` found at the least depth `≤ depth`.
pub fn bounded_search(a: &Type, depth: u32) -> Option<Term> {
    bounded_search_in(&TypingContext::new(), a, depth)
}

pub fn bounded_search_in(ctx: &TypingContext, a: &Type, depth: u32) -> Option<Term> {
    let (mut s, env) = start(ctx, a);
    (1..=depth).find_map(|d| {
        s.counter = 0;
        s.solve(&env, a, d, 1).into_iter().next()
    })
}

/// Up to `limit` inhabitants of `A` in `ctx` of depth `≤ depth`, in search
/// order.
pub fn enumerate_inhabitants(ctx: &TypingContext, a: &Type, depth: u32, limit: usize) -> Vec<Term> {
    let (mut s, env) = start(ctx, a);
    s.solve(&env, a, depth, limit)
}
