//! Brute-force reference decider for `Γ ⊢ t : A` in Curry-style Fat.
//!
//! Works directly on the declarative rules.  Goal quantifiers are stripped
//! with fresh eigenvariables, abstractions must meet an arrow, and a neutral
//! term `h u1 ... un` walks the type of `h`, trying every atomic witness from
//! a finite pool at each elimination of a quantifier.  The pool holds the
//! free variables of the context and goal, the constant ♣ and one fresh
//! variable.  No unification is involved.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fatcheck::syntax::{fresh_name, Term, Type, TypingContext};

pub struct Oracle {
    /// Remaining spine/witness steps before the oracle gives up.
    pub budget: u64,
    counter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Derivable,
    NotDerivable,
    OutOfBudget,
}

struct OutOfBudget;

impl Oracle {
    pub fn new(budget: u64) -> Oracle {
        Oracle { budget, counter: 0 }
    }

    pub fn decide(&mut self, ctx: &TypingContext, t: &Term, a: &Type) -> OracleVerdict {
        let env: Vec<(String, Type)> = ctx.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        match self.check(&env, &t.erase(), a) {
            Ok(true) => OracleVerdict::Derivable,
            Ok(false) => OracleVerdict::NotDerivable,
            Err(OutOfBudget) => OracleVerdict::OutOfBudget,
        }
    }

    fn tick(&mut self) -> Result<(), OutOfBudget> {
        if self.budget == 0 {
            return Err(OutOfBudget);
        }
        self.budget -= 1;
        Ok(())
    }

    fn env_ftv(env: &[(String, Type)]) -> BTreeSet<String> {
        env.iter().flat_map(|(_, t)| t.free_vars()).collect()
    }

    fn fresh(&mut self, avoid: &BTreeSet<String>) -> String {
        loop {
            self.counter += 1;
            let n = format!("E{}", self.counter);
            if !avoid.contains(&n) {
                return n;
            }
        }
    }

    fn lookup<'e>(env: &'e [(String, Type)], x: &str) -> Option<&'e Type> {
        env.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    fn check(&mut self, env: &[(String, Type)], t: &Term, goal: &Type) -> Result<bool, OutOfBudget> {
        self.tick()?;
        // ∀-introduction is invertible: strip with fresh eigenvariables.
        let mut goal = goal.clone();
        while let Type::Forall(x, body) = &goal {
            let mut avoid = Self::env_ftv(env);
            avoid.extend(goal.all_names());
            let y = self.fresh(&avoid);
            goal = body.subst(x, &Type::Var(y));
        }
        match t {
            Term::Star => Ok(goal == Type::Club),
            Term::Abs(x, u) => match &goal {
                Type::Arrow(dom, cod) => {
                    let mut env2 = env.to_vec();
                    env2.push((x.clone(), (**dom).clone()));
                    self.check(&env2, u, cod)
                }
                _ => Ok(false),
            },
            _ => {
                let mut args = Vec::new();
                let mut head = t;
                while let Term::App(f, a) = head {
                    args.push((**a).clone());
                    head = f;
                }
                args.reverse();
                let Term::Var(h) = head else {
                    return Ok(false);
                };
                let Some(ht) = Self::lookup(env, h).cloned() else {
                    return Ok(false);
                };
                let mut pool: BTreeSet<String> = Self::env_ftv(env);
                pool.extend(goal.free_vars());
                let mut avoid = pool.clone();
                for (_, ty) in env {
                    avoid.extend(ty.all_names());
                }
                avoid.extend(goal.all_names());
                let w = fresh_name("W", &avoid);
                let mut witnesses: Vec<Type> = pool.into_iter().map(Type::Var).collect();
                witnesses.push(Type::Var(w));
                witnesses.push(Type::Club);
                self.spine(env, &ht, &args, &goal, &witnesses)
            }
        }
    }

    fn spine(
        &mut self,
        env: &[(String, Type)],
        ty: &Type,
        args: &[Term],
        goal: &Type,
        witnesses: &[Type],
    ) -> Result<bool, OutOfBudget> {
        self.tick()?;
        match ty {
            Type::Forall(x, body) => {
                if args.is_empty() && ty.alpha_eq(goal) {
                    return Ok(true);
                }
                for w in witnesses {
                    let inst = body.subst(x, w);
                    if self.spine(env, &inst, args, goal, witnesses)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            _ if args.is_empty() => Ok(ty.alpha_eq(goal)),
            Type::Arrow(dom, cod) => {
                if !self.check(env, &args[0], dom)? {
                    return Ok(false);
                }
                self.spine(env, cod, &args[1..], goal, witnesses)
            }
            _ => Ok(false),
        }
    }
}

/// Convenience wrapper with a generous budget.
pub fn oracle_decide(ctx: &TypingContext, t: &Term, a: &Type) -> OracleVerdict {
    Oracle::new(5_000_000).decide(ctx, t, a)
}

pub fn rename_map(names: &[(&str, &str)]) -> BTreeMap<String, Type> {
    names.iter().map(|(a, b)| (a.to_string(), Type::Var(b.to_string()))).collect()
}
