//! Type checking and typability for Curry-style Fat.
//!
//! A judgment `Γ ⊢ t : A` is first checked after erasing quantifiers (a
//! simply typed shadow), then translated into a Fat-unification problem whose
//! unifiers correspond to synthetic derivations.  Accepted judgments carry a
//! derivation that [`check_derivation`] validates on its own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::fat_unify::{
    fat_unify_with, Constraint, Equation, NoSolution, QType, SeqExpr, SolveConfig, SolveOutcome, SolveStats,
    StarExpr, UnifProblem, UnifSubstitution, CLUB,
};
use crate::fou::stlc_typecheck;
use crate::syntax::{barendregt_rename, barendregt_rename_type_in, fresh_name, Term, Type, TypingContext};

// ---------------------------------------------------------------------------
// Allocation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// An occurrence of `x`, instantiated through `alpha`.
    Var { x: String, alpha: String },
    /// `λx.u`; `binder` is `∀a_x.F_x(a_x, ...)`.
    Abs { x: String, binder: QType },
    /// `t u`, with result scheme `F_tu` over `a_tu` instantiated through `alpha`.
    App { a: String, alpha: String, f: String },
    Star,
}

/// Variables allocated for one subterm occurrence.  The type of the subterm
/// is `∀S(b). S(G(b, ...))`, where `g` is that scheme application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeAlloc {
    pub term: Term,
    pub b: String,
    pub g: StarExpr,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// `a_x`, `F_x` and the trailing arguments every `F_x` application carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinderAlloc {
    pub a: String,
    pub f: String,
    pub tail: Vec<SeqExpr>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarAllocation {
    /// Subterm occurrences in preorder; index 0 is the whole term.
    pub nodes: Vec<NodeAlloc>,
    /// Term variables, bound or free.
    pub binders: BTreeMap<String, BinderAlloc>,
    /// Term variables free in the term.
    pub free: BTreeSet<String>,
}

struct Gen {
    counter: usize,
    eqs: Vec<Equation>,
    constraints: Vec<Constraint>,
    alloc: VarAllocation,
}

impl Gen {
    fn new() -> Gen {
        Gen {
            counter: 0,
            eqs: Vec::new(),
            constraints: Vec::new(),
            alloc: VarAllocation::default(),
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }

    fn scheme_app(name: &str, first: SeqExpr, ctx: &[String]) -> StarExpr {
        let mut args = vec![first];
        args.extend(ctx.iter().map(|b| SeqExpr::Var(b.clone())));
        StarExpr::Meta(name.to_string(), args)
    }

    fn binder_for(&mut self, x: &str) -> BinderAlloc {
        if let Some(b) = self.alloc.binders.get(x) {
            return b.clone();
        }
        let b = BinderAlloc {
            a: self.fresh("a"),
            f: self.fresh("F"),
            tail: Vec::new(),
        };
        self.alloc.free.insert(x.to_string());
        self.alloc.binders.insert(x.to_string(), b.clone());
        b
    }

    /// `ctx` lists the `b` variables of the enclosing occurrences, innermost
    /// first.
    fn node(&mut self, t: &Term, ctx: &[String]) -> usize {
        let id = self.alloc.nodes.len();
        let b = self.fresh("b");
        let g_name = self.fresh("G");
        let g = Self::scheme_app(&g_name, SeqExpr::Var(b.clone()), ctx);
        self.alloc.nodes.push(NodeAlloc {
            term: t.clone(),
            b: b.clone(),
            g: g.clone(),
            kind: NodeKind::Star,
            children: Vec::new(),
        });
        let mut inner = vec![b.clone()];
        inner.extend(ctx.iter().cloned());
        let (kind, children) = match t {
            Term::Var(x) => {
                let binder = self.binder_for(x);
                let alpha = self.fresh("al");
                let mut proj_args = vec![b.clone()];
                proj_args.extend(ctx.iter().cloned());
                let mut f_args = vec![SeqExpr::Proj(alpha.clone(), proj_args)];
                f_args.extend(binder.tail.iter().cloned());
                self.eqs.push((StarExpr::Meta(binder.f.clone(), f_args), g));
                self.constraints.push(Constraint::ArityLink(alpha.clone(), binder.a.clone()));
                (NodeKind::Var { x: x.clone(), alpha }, Vec::new())
            }
            Term::Abs(x, body) => {
                let a = self.fresh("a");
                let f = self.fresh("F");
                let tail: Vec<SeqExpr> = inner.iter().map(|s| SeqExpr::Var(s.clone())).collect();
                let shadowed = self.alloc.binders.insert(
                    x.clone(),
                    BinderAlloc {
                        a: a.clone(),
                        f: f.clone(),
                        tail,
                    },
                );
                let child = self.node(body, &inner);
                match shadowed {
                    Some(prev) => {
                        self.alloc.binders.insert(x.clone(), prev);
                    }
                    None => {}
                }
                let binder = QType::new(a.clone(), Self::scheme_app(&f, SeqExpr::Var(a.clone()), &inner));
                let body_q = QType::new(self.alloc.nodes[child].b.clone(), self.alloc.nodes[child].g.clone());
                self.eqs.push((g, StarExpr::arrow(binder.clone(), body_q)));
                (NodeKind::Abs { x: x.clone(), binder }, vec![child])
            }
            Term::App(fun, arg) => {
                let tf = self.node(fun, &inner);
                let ta = self.node(arg, &inner);
                let a = self.fresh("a");
                let alpha = self.fresh("al");
                let f = self.fresh("F");
                let result = {
                    let mut args = vec![SeqExpr::Var(a.clone())];
                    args.extend(inner.iter().map(|s| SeqExpr::Var(s.clone())));
                    StarExpr::Meta(f.clone(), args)
                };
                let arg_q = QType::new(self.alloc.nodes[ta].b.clone(), self.alloc.nodes[ta].g.clone());
                let fun_g = self.alloc.nodes[tf].g.clone();
                self.eqs
                    .push((fun_g, StarExpr::arrow(arg_q, QType::new(a.clone(), result))));
                let mut inst_args = vec![SeqExpr::Proj(alpha.clone(), inner.clone())];
                inst_args.extend(inner.iter().map(|s| SeqExpr::Var(s.clone())));
                self.eqs.push((StarExpr::Meta(f.clone(), inst_args), g));
                self.constraints.push(Constraint::ArityLink(alpha.clone(), a.clone()));
                self.constraints
                    .push(Constraint::LengthPin(self.alloc.nodes[tf].b.clone(), 0));
                (NodeKind::App { a, alpha, f }, vec![tf, ta])
            }
            Term::Star => {
                self.eqs.push((g, StarExpr::TVar(CLUB.to_string())));
                (NodeKind::Star, Vec::new())
            }
            Term::TyAbs(..) | Term::TyApp(..) => unreachable!("Curry terms only"),
        };
        self.alloc.nodes[id].kind = kind;
        self.alloc.nodes[id].children = children;
        id
    }

    fn embed(&mut self, ty: &Type, env: &BTreeMap<String, StarExpr>) -> StarExpr {
        match ty {
            Type::Var(x) => env.get(x).cloned().unwrap_or_else(|| StarExpr::TVar(x.clone())),
            Type::Club => StarExpr::TVar(CLUB.to_string()),
            Type::Arrow(l, r) => {
                let l = self.embed_q(l, env);
                let r = self.embed_q(r, env);
                StarExpr::arrow(l, r)
            }
            Type::Forall(..) => {
                let q = self.embed_q(ty, env);
                // Only reachable for a quantified boundary body, which callers strip.
                q.body
            }
        }
    }

    fn embed_q(&mut self, ty: &Type, env: &BTreeMap<String, StarExpr>) -> QType {
        let (vars, body) = ty.split_prefix();
        let e = self.fresh("e");
        self.constraints.push(Constraint::LengthPin(e.clone(), vars.len()));
        let mut env = env.clone();
        for (i, v) in vars.iter().enumerate() {
            env.insert(v.clone(), StarExpr::Pi(i + 1, SeqExpr::Var(e.clone())));
        }
        QType::new(e, self.embed(body, &env))
    }

    /// `S(head(a)) ⟨∀S(a).⟩ = ty`, lowered to position projections of `a`.
    fn boundary(&mut self, head: StarExpr, a: &str, ty: &Type) {
        let (vars, body) = ty.split_prefix();
        self.constraints.push(Constraint::LengthPin(a.to_string(), vars.len()));
        let env: BTreeMap<String, StarExpr> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), StarExpr::Pi(i + 1, SeqExpr::Var(a.to_string()))))
            .collect();
        let rhs = self.embed(body, &env);
        self.eqs.push((head, rhs));
    }
}

/// The equations of `t` and the variables allocated for it.  `t` must be a
/// Curry term whose binders are pairwise distinct and distinct from its free
/// variables.
pub fn gen_equations(t: &Term) -> (Vec<Equation>, VarAllocation) {
    let mut g = Gen::new();
    g.node(t, &[]);
    (g.eqs, g.alloc)
}

/// The problem for `Γ ⊢ t : A`, with `Γ` and `A` used verbatim.
pub fn gen_problem(ctx: &TypingContext, t: &Term, a: &Type) -> UnifProblem {
    gen_problem_with_allocation(ctx, t, a).0
}

pub fn gen_problem_with_allocation(ctx: &TypingContext, t: &Term, a: &Type) -> (UnifProblem, VarAllocation) {
    let mut g = Gen::new();
    g.node(t, &[]);
    let root = g.alloc.nodes[0].clone();
    g.boundary(root.g.clone(), &root.b, a);
    for x in g.alloc.free.clone() {
        if let Some(ty) = ctx.get(&x) {
            let b = g.alloc.binders[&x].clone();
            g.boundary(StarExpr::Meta(b.f.clone(), vec![SeqExpr::Var(b.a.clone())]), &b.a, ty);
        }
    }
    let mut p = UnifProblem::new();
    p.equations = g.eqs;
    p.constraints = g.constraints;
    p.declare_from_use();
    (p, g.alloc)
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Var,
    Abs,
    App,
    Star,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Var => "Var",
            Rule::Abs => "Abs",
            Rule::App => "App",
            Rule::Star => "Star",
        })
    }
}

/// `∀Y⃗.C ⪯ C[Y⃗ ↦ witnesses]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub stripped: Vec<String>,
    pub witnesses: Vec<Type>,
}

/// A synthetic derivation of `context ⊢ term : ty`, where
/// `ty = ∀generalized. C` and `C` comes from the premises by `rule`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticDerivation {
    pub context: TypingContext,
    pub term: Term,
    pub ty: Type,
    pub rule: Rule,
    pub generalized: Vec<String>,
    pub instantiation: Option<Instantiation>,
    pub premises: Vec<SyntheticDerivation>,
}

impl SyntheticDerivation {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "context": self.context.0.iter().map(|(k, t)| (k.clone(), Value::String(t.to_string()))).collect::<serde_json::Map<_, _>>(),
            "term": self.term.to_string(),
            "type": self.ty.to_string(),
            "rule": self.rule.to_string(),
            "generalized": self.generalized,
            "premises": self.premises.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        });
        if let Some(inst) = &self.instantiation {
            v["instantiation"] = json!({
                "stripped": inst.stripped,
                "witnesses": inst.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            });
        }
        v
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }
}

fn peel<'a>(ty: &'a Type, names: &[String]) -> Option<&'a Type> {
    let mut cur = ty;
    for n in names {
        match cur {
            Type::Forall(x, body) if x == n => cur = body,
            _ => return None,
        }
    }
    Some(cur)
}

fn contexts_agree(a: &TypingContext, b: &TypingContext) -> bool {
    a.0.len() == b.0.len() && a.0.iter().all(|(k, t)| b.0.get(k).is_some_and(|u| t.alpha_eq(u)))
}

fn check_instance(src: &Type, inst: &Instantiation, target: &Type) -> Result<(), String> {
    let body = peel(src, &inst.stripped).ok_or_else(|| format!("{src} does not start with ∀{:?}", inst.stripped))?;
    if inst.witnesses.len() != inst.stripped.len() {
        return Err("instantiation has the wrong number of witnesses".into());
    }
    if let Some(w) = inst.witnesses.iter().find(|w| !w.is_atomic()) {
        return Err(format!("witness {w} is not atomic"));
    }
    let m: BTreeMap<String, Type> = inst.stripped.iter().cloned().zip(inst.witnesses.iter().cloned()).collect();
    let got = body.subst_many(&m);
    if got.alpha_eq(target) {
        Ok(())
    } else {
        Err(format!("{src} instantiates to {got}, not {target}"))
    }
}

/// Why `d` is not a valid synthetic derivation, if it is not.
pub fn derivation_defect(d: &SyntheticDerivation) -> Option<String> {
    let body = match peel(&d.ty, &d.generalized) {
        Some(b) => b,
        None => return Some(format!("{} does not start with ∀{:?}", d.ty, d.generalized)),
    };
    let fv = d.context.free_type_vars();
    if let Some(x) = d.generalized.iter().find(|x| fv.contains(*x)) {
        return Some(format!("generalized variable {x} is free in the context"));
    }
    let arity = match d.rule {
        Rule::Var | Rule::Star => 0,
        Rule::Abs => 1,
        Rule::App => 2,
    };
    if d.premises.len() != arity {
        return Some(format!("{} rule with {} premises", d.rule, d.premises.len()));
    }
    let local = match (d.rule, &d.term) {
        (Rule::Var, Term::Var(x)) => match (d.context.get(x), &d.instantiation) {
            (Some(src), Some(inst)) => check_instance(src, inst, body).err(),
            (None, _) => Some(format!("{x} is not in the context")),
            (_, None) => Some("Var rule without an instantiation".into()),
        },
        (Rule::Abs, Term::Abs(x, u)) => {
            let p = &d.premises[0];
            match body {
                Type::Arrow(dom, cod) => {
                    if !contexts_agree(&p.context, &d.context.clone().with(x.clone(), (**dom).clone())) {
                        Some("premise context is not the extended context".into())
                    } else if p.term != **u {
                        Some("premise term is not the body".into())
                    } else if !p.ty.alpha_eq(cod) {
                        Some(format!("body has type {}, expected {cod}", p.ty))
                    } else {
                        None
                    }
                }
                other => Some(format!("abstraction typed by non-arrow {other}")),
            }
        }
        (Rule::App, Term::App(f, a)) => {
            let (pf, pa) = (&d.premises[0], &d.premises[1]);
            if !contexts_agree(&pf.context, &d.context) || !contexts_agree(&pa.context, &d.context) {
                Some("premise context differs".into())
            } else if pf.term != **f || pa.term != **a {
                Some("premise terms do not match".into())
            } else {
                match (&pf.ty, &d.instantiation) {
                    (Type::Arrow(dom, cod), Some(inst)) => {
                        if !pa.ty.alpha_eq(dom) {
                            Some(format!("argument has type {}, expected {dom}", pa.ty))
                        } else {
                            check_instance(cod, inst, body).err()
                        }
                    }
                    (Type::Arrow(..), None) => Some("App rule without an instantiation".into()),
                    (other, _) => Some(format!("function typed by non-arrow {other}")),
                }
            }
        }
        (Rule::Star, Term::Star) => {
            if *body == Type::Club {
                None
            } else {
                Some(format!("★ typed by {body}"))
            }
        }
        (rule, term) => Some(format!("{rule} rule does not apply to {term}")),
    };
    local.or_else(|| d.premises.iter().find_map(derivation_defect))
}

/// Validate every node against the synthetic rules.
pub fn check_derivation(d: &SyntheticDerivation) -> bool {
    derivation_defect(d).is_none()
}

/// Does `d` derive `Γ ⊢ t : A` (up to renaming of bound variables)?
pub fn derivation_proves(d: &SyntheticDerivation, ctx: &TypingContext, t: &Term, a: &Type) -> bool {
    check_derivation(d) && d.term.alpha_eq(t) && d.ty.alpha_eq(a) && contexts_agree(&d.context, ctx)
}

/// First-order matching of `pattern` against `target`, the `active` names of
/// `pattern` standing for atomic types.
fn fo_match(
    pattern: &Type,
    target: &Type,
    active: &BTreeSet<String>,
    bound: &mut Vec<(String, String)>,
    m: &mut BTreeMap<String, Type>,
) -> bool {
    match (pattern, target) {
        (Type::Var(v), _) => {
            if let Some(i) = bound.iter().rposition(|(p, _)| p == v) {
                return match target {
                    Type::Var(w) => *w == bound[i].1 && bound.iter().rposition(|(_, t)| t == w) == Some(i),
                    _ => false,
                };
            }
            let captured = |w: &String| bound.iter().any(|(_, t)| t == w);
            if active.contains(v) {
                let ok = match target {
                    Type::Var(w) => !captured(w),
                    Type::Club => true,
                    _ => false,
                };
                if !ok {
                    return false;
                }
                match m.get(v) {
                    Some(prev) => prev == target,
                    None => {
                        m.insert(v.clone(), target.clone());
                        true
                    }
                }
            } else {
                matches!(target, Type::Var(w) if w == v && !captured(w))
            }
        }
        (Type::Club, Type::Club) => true,
        (Type::Arrow(a, b), Type::Arrow(c, d)) => {
            fo_match(a, c, active, bound, m) && fo_match(b, d, active, bound, m)
        }
        (Type::Forall(x, a), Type::Forall(y, b)) => {
            bound.push((x.clone(), y.clone()));
            let ok = fo_match(a, b, active, bound, m);
            bound.pop();
            ok
        }
        _ => false,
    }
}

/// An instantiation with `src ⪯ target`, stripping as many quantifiers as
/// possible.
pub fn find_instantiation(src: &Type, target: &Type) -> Option<Instantiation> {
    let (vars, body) = src.split_prefix();
    for n in (0..=vars.len()).rev() {
        let stripped = vars[..n].to_vec();
        let inner = Type::foralls(&vars[n..], body.clone());
        let active: BTreeSet<String> = stripped.iter().cloned().collect();
        let mut m = BTreeMap::new();
        if fo_match(&inner, target, &active, &mut Vec::new(), &mut m) {
            let witnesses = stripped
                .iter()
                .map(|v| m.get(v).cloned().unwrap_or_else(|| Type::Var(v.clone())))
                .collect();
            return Some(Instantiation { stripped, witnesses });
        }
    }
    None
}

fn reconstruct_node(
    alloc: &VarAllocation,
    id: usize,
    ctx: &TypingContext,
    s: &UnifSubstitution,
) -> Option<SyntheticDerivation> {
    let node = &alloc.nodes[id];
    let generalized = s.seq.get(&node.b)?.clone();
    let body = s.star_value(&node.g)?;
    let ty = Type::foralls(&generalized, body.clone());
    let (rule, instantiation, premises) = match &node.kind {
        NodeKind::Var { x, .. } => (Rule::Var, Some(find_instantiation(ctx.get(x)?, &body)?), Vec::new()),
        NodeKind::Abs { x, binder } => {
            let dom = s.qtype_value(binder)?;
            let inner = ctx.clone().with(x.clone(), dom);
            let p = reconstruct_node(alloc, node.children[0], &inner, s)?;
            (Rule::Abs, None, vec![p])
        }
        NodeKind::App { .. } => {
            let pf = reconstruct_node(alloc, node.children[0], ctx, s)?;
            let pa = reconstruct_node(alloc, node.children[1], ctx, s)?;
            let inst = match &pf.ty {
                Type::Arrow(_, cod) => find_instantiation(cod, &body)?,
                _ => return None,
            };
            (Rule::App, Some(inst), vec![pf, pa])
        }
        NodeKind::Star => (Rule::Star, None, Vec::new()),
    };
    Some(SyntheticDerivation {
        context: ctx.clone(),
        term: node.term.clone(),
        ty,
        rule,
        generalized,
        instantiation,
        premises,
    })
}

/// Read a derivation off a unifier of the problem built for `alloc`.
pub fn reconstruct_derivation(
    alloc: &VarAllocation,
    ctx: &TypingContext,
    s: &UnifSubstitution,
) -> Option<SyntheticDerivation> {
    reconstruct_node(alloc, 0, ctx, s)
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    StlcFail,
    Cycle,
    ArrowClash,
    Exhausted,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::StlcFail => "StlcFail",
            RejectReason::Cycle => "Cycle",
            RejectReason::ArrowClash => "ArrowClash",
            RejectReason::Exhausted => "Exhausted",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<NoSolution> for RejectReason {
    fn from(n: NoSolution) -> Self {
        match n {
            NoSolution::Cycle => RejectReason::Cycle,
            NoSolution::ArrowClash => RejectReason::ArrowClash,
            NoSolution::Exhausted => RejectReason::Exhausted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept(SyntheticDerivation),
    Reject(RejectReason),
    /// The search budget ran out.
    Undecided,
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, Verdict::Reject(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::Accept(d) => json!({"result": "accept", "derivation": d.to_json()}),
            Verdict::Reject(r) => json!({"result": "reject", "reason": r.as_str()}),
            Verdict::Undecided => json!({"result": "undecided", "reason": "SearchLimit"}),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub node_limit: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            node_limit: SolveConfig::default().node_limit,
        }
    }
}

/// Decide `Γ ⊢ t : A` in Curry-style Fat.  Church annotations on `t` are
/// erased first.
pub fn check(ctx: &TypingContext, t: &Term, a: &Type) -> Verdict {
    check_with(ctx, t, a, CheckConfig::default()).0
}

pub fn check_with(ctx: &TypingContext, t: &Term, a: &Type, config: CheckConfig) -> (Verdict, SolveStats) {
    let t = t.erase();
    if !stlc_typecheck(&ctx.erase(), &t, &a.erase()) {
        return (Verdict::Reject(RejectReason::StlcFail), SolveStats::default());
    }
    let mut used: BTreeSet<String> = ctx.0.values().flat_map(|ty| ty.all_names()).collect();
    used.extend(a.all_names());
    let mut renamed = TypingContext::new();
    for (x, ty) in &ctx.0 {
        renamed.insert(x.clone(), barendregt_rename_type_in(ty, &mut used));
    }
    let a2 = barendregt_rename_type_in(a, &mut used);
    let t2 = barendregt_rename(&t);
    let (problem, alloc) = gen_problem_with_allocation(&renamed, &t2, &a2);
    let solve = SolveConfig {
        allow_pins: false,
        node_limit: config.node_limit,
    };
    let mut found = None;
    let (outcome, stats) = fat_unify_with(&problem, solve, &mut |s| {
        match reconstruct_derivation(&alloc, &renamed, s) {
            Some(d) if derivation_proves(&d, ctx, &t, a) => {
                found = Some(d);
                true
            }
            _ => false,
        }
    });
    let verdict = match outcome {
        SolveOutcome::Unifier(_) => Verdict::Accept(found.expect("accepted derivation")),
        SolveOutcome::NoSolution(n) => Verdict::Reject(n.into()),
        SolveOutcome::Aborted => Verdict::Undecided,
    };
    (verdict, stats)
}

/// The judgment `Γ ⊢ (λx y. y) t : ∀X. X ⇒ X` used to decide typability.
pub fn typability_judgment(ctx: &TypingContext, t: &Term) -> (Term, Type) {
    let mut avoid: BTreeSet<String> = t.all_vars();
    avoid.extend(ctx.0.keys().cloned());
    let x = fresh_name("x", &avoid);
    avoid.insert(x.clone());
    let y = fresh_name("y", &avoid);
    let probe = Term::app(Term::abss(&[x, y.clone()], Term::var(y)), t.clone());
    let tvars = ctx.free_type_vars();
    let v = fresh_name("X", &tvars);
    (probe, Type::forall(v.clone(), Type::arrow(Type::var(v.clone()), Type::var(v))))
}

/// Decide whether `t` has some type under `Γ`.
pub fn typable(ctx: &TypingContext, t: &Term) -> Verdict {
    let (probe, ty) = typability_judgment(ctx, t);
    check(ctx, &probe, &ty)
}
